"""
规划问题与计划的读写

问题文件为 JSON（pydantic 校验），计划文件为文本，每行一个步骤:
    <t>: (<动作名>) [<d>]
以 # 开头的行是注释。
"""

import json
import logging
import re
from typing import List

from pydantic import BaseModel, Field, ValidationError

from src.planning.errors import ParseError
from src.planning.models import (
    DurationBound,
    DurativeAction,
    Plan,
    PlanningProblem,
    PlanStep,
    SnapAction,
)
from src.utils.rationals import format_rational, parse_rational

logger = logging.getLogger(__name__)


# ============================================================
# 问题文件结构
# ============================================================

class SnapSchema(BaseModel):
    pre: List[str] = []
    add: List[str] = []
    # "del" 是保留字
    dels: List[str] = Field(default=[], alias="del")

    model_config = {"populate_by_name": True}


class BoundSchema(BaseModel):
    value: str
    strict: bool = False


class ActionSchema(BaseModel):
    name: str
    start: SnapSchema = SnapSchema()
    over_all: List[str] = []
    end: SnapSchema = SnapSchema()
    lower: BoundSchema
    upper: BoundSchema


class ProblemSchema(BaseModel):
    props: List[str]
    actions: List[ActionSchema] = []
    init: List[str] = []
    goal: List[str] = []


def _snap(schema: SnapSchema) -> SnapAction:
    return SnapAction.of(schema.pre, schema.add, schema.dels)


def _bound(schema: BoundSchema, where: str) -> DurationBound:
    try:
        return DurationBound(parse_rational(schema.value), schema.strict)
    except ValueError as e:
        raise ParseError(f"{where}: {e}") from e


def problem_from_dict(data: dict, source: str = "") -> PlanningProblem:
    """从已解析的 JSON 对象构造规划问题"""
    try:
        schema = ProblemSchema.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(part) for part in first["loc"])
        raise ParseError(f"问题结构错误 {loc}: {first['msg']}", source=source) from e

    actions = []
    for a in schema.actions:
        actions.append(DurativeAction(
            name=a.name,
            start=_snap(a.start),
            end=_snap(a.end),
            over_all=frozenset(a.over_all),
            lower=_bound(a.lower, f"{a.name}.lower"),
            upper=_bound(a.upper, f"{a.name}.upper"),
        ))
    return PlanningProblem(
        props=tuple(schema.props),
        actions=tuple(actions),
        init=frozenset(schema.init),
        goal=frozenset(schema.goal),
    )


def parse_problem(text: str, source: str = "") -> PlanningProblem:
    """
    解析问题 JSON 文本

    Raises:
        ParseError: JSON 语法或结构错误
        ProblemError: 结构正确但语义不合法
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"JSON 语法错误: {e.msg}", e.lineno, e.colno, source) from e
    if not isinstance(data, dict):
        raise ParseError("问题文件顶层必须是对象", 1, 1, source)
    return problem_from_dict(data, source)


def load_problem(path: str) -> PlanningProblem:
    with open(path, "r", encoding="utf-8") as f:
        problem = parse_problem(f.read(), source=path)
    logger.info(f"已加载问题 {path}: {len(problem.props)} 个命题, {len(problem.actions)} 个动作")
    return problem


def problem_to_dict(problem: PlanningProblem) -> dict:
    def snap(s: SnapAction) -> dict:
        return {"pre": sorted(s.pres), "add": sorted(s.adds), "del": sorted(s.dels)}

    return {
        "props": list(problem.props),
        "actions": [
            {
                "name": a.name,
                "start": snap(a.start),
                "over_all": sorted(a.over_all),
                "end": snap(a.end),
                "lower": {"value": format_rational(a.lower.value), "strict": a.lower.strict},
                "upper": {"value": format_rational(a.upper.value), "strict": a.upper.strict},
            }
            for a in problem.actions
        ],
        "init": sorted(problem.init),
        "goal": sorted(problem.goal),
    }


# ============================================================
# 计划文件
# ============================================================

_STEP_PATTERN = re.compile(
    r"^\s*(?P<t>[^:\s]+)\s*:\s*\(\s*(?P<name>[^()]*?)\s*\)\s*\[\s*(?P<d>[^\]\s]+)\s*\]\s*(;.*)?$"
)


def parse_plan(text: str, source: str = "") -> Plan:
    """
    解析计划文本

    Raises:
        ParseError: 行格式错误，带行列号
    """
    steps = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = _STEP_PATTERN.match(line)
        if not match:
            column = len(line) - len(line.lstrip()) + 1
            raise ParseError(f"无法识别的计划行: {stripped!r}", lineno, column, source)
        if not match.group("name"):
            raise ParseError("动作名为空", lineno, match.start("name") + 1, source)
        try:
            t = parse_rational(match.group("t"))
        except ValueError as e:
            raise ParseError(str(e), lineno, match.start("t") + 1, source) from e
        try:
            d = parse_rational(match.group("d"))
        except ValueError as e:
            raise ParseError(str(e), lineno, match.start("d") + 1, source) from e
        if t < 0:
            raise ParseError(f"开始时间不能为负: {match.group('t')}", lineno, match.start("t") + 1, source)
        steps.append(PlanStep(match.group("name"), t, d))
    return Plan(tuple(steps))


def load_plan(path: str) -> Plan:
    with open(path, "r", encoding="utf-8") as f:
        plan = parse_plan(f.read(), source=path)
    logger.info(f"已加载计划 {path}: {len(plan)} 步")
    return plan


def format_plan(plan: Plan) -> str:
    lines = [
        f"{format_rational(step.t)}: ({step.action}) [{format_rational(step.d)}]"
        for step in plan.steps
    ]
    return "\n".join(lines) + ("\n" if lines else "")

