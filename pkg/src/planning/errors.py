"""
规划模块异常
"""


class PlanningError(Exception):
    """规划模块异常基类"""


class ProblemError(PlanningError):
    """规划问题本身不合法（命题未声明、动作重名、时长上下界矛盾等）"""


class ResolutionError(PlanningError):
    """计划步骤引用了问题中不存在的动作"""

    def __init__(self, action: str, step_index: int = -1):
        self.action = action
        self.step_index = step_index
        where = f"第 {step_index + 1} 步" if step_index >= 0 else "计划"
        super().__init__(f"{where}引用了未知动作: {action}")


class ParseError(PlanningError):
    """输入文件语法或结构错误，带行列号（未知时为 0）"""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        prefix = f"{source}:" if source else ""
        super().__init__(f"{prefix}{line}:{column}: {message}")
