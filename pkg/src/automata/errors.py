"""
时间自动机模块异常
"""


class AutomataError(Exception):
    """时间自动机模块异常基类"""


class NetworkError(AutomataError):
    """网络结构不合法：引用无法解析、同一变量被更新两次等"""


class EvaluationError(AutomataError):
    """表达式求值失败"""


class UnboundVariable(EvaluationError):
    def __init__(self, var: str):
        self.var = var
        super().__init__(f"变量未绑定: {var}")


class DivisionByZero(EvaluationError):
    def __init__(self, expr: str = ""):
        self.expr = expr
        super().__init__(f"除数为零: {expr}" if expr else "除数为零")


class UnboundClock(AutomataError):
    def __init__(self, clock: str):
        self.clock = clock
        super().__init__(f"时钟未绑定: {clock}")


class TransitionError(AutomataError):
    """迁移（延迟或内部迁移）无法执行"""


class UrgentLocationBlocksDelay(TransitionError):
    def __init__(self, automaton: int, location: str):
        self.automaton = automaton
        self.location = location
        super().__init__(f"自动机 {automaton} 位于紧急位置 {location}，不允许时间流逝")


class NegativeDelay(TransitionError):
    def __init__(self, delta):
        self.delta = delta
        super().__init__(f"延迟不能为负: {delta}")


class LocationMismatch(TransitionError):
    def __init__(self, automaton: int, expected: str, actual: str):
        self.automaton = automaton
        self.expected = expected
        self.actual = actual
        super().__init__(f"自动机 {automaton} 当前位置为 {actual}，迁移要求 {expected}")


class ConditionFalse(TransitionError):
    def __init__(self, automaton: int, condition: str):
        self.automaton = automaton
        self.condition = condition
        super().__init__(f"自动机 {automaton} 的迁移条件不成立: {condition}")


class GuardFalse(TransitionError):
    def __init__(self, automaton: int, constraint: str):
        self.automaton = automaton
        self.constraint = constraint
        super().__init__(f"自动机 {automaton} 的时钟守卫不成立: {constraint}")


class VariableOutOfBounds(TransitionError):
    def __init__(self, var: str, value, lo: int, hi: int):
        self.var = var
        self.value = value
        super().__init__(f"变量 {var} 更新后的值 {value} 超出范围 [{lo}, {hi}]")


class NonIntegerUpdate(TransitionError):
    def __init__(self, var: str, value):
        self.var = var
        self.value = value
        super().__init__(f"变量 {var} 更新结果不是整数: {value}")
