"""
网络与运行轨迹的 JSON 读写

有理数序列化为 "p/q" 或整数字符串；配置中的 v、c 按键排序输出，
同一对象两次导出的字节完全相同。
"""

import json
import logging
from typing import Any, Dict, List

from pydantic import BaseModel, Field, ValidationError

from src.automata.errors import NetworkError
from src.automata.models import (
    And,
    Automaton,
    BExpr,
    BinOp,
    BoolConst,
    ClockConstraint,
    Cmp,
    Configuration,
    Const,
    DelayStep,
    Expr,
    InternalStep,
    Network,
    Rel,
    Run,
    Transition,
    Update,
    VarDecl,
    VarRef,
)
from src.planning.errors import ParseError
from src.utils.rationals import format_rational, parse_rational

logger = logging.getLogger(__name__)


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def _load_json(text: str, source: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"JSON 语法错误: {e.msg}", e.lineno, e.colno, source) from e
    if not isinstance(data, dict):
        raise ParseError("顶层必须是对象", 1, 1, source)
    return data


def _schema_error(e: ValidationError, source: str) -> ParseError:
    first = e.errors()[0]
    loc = ".".join(str(part) for part in first["loc"])
    return ParseError(f"结构错误 {loc}: {first['msg']}", source=source)


# ============================================================
# 表达式
# ============================================================

def expr_to_json(e: Expr) -> dict:
    if isinstance(e, VarRef):
        return {"var": e.var}
    if isinstance(e, Const):
        return {"const": format_rational(e.value)}
    return {"op": e.op, "left": expr_to_json(e.left), "right": expr_to_json(e.right)}


def expr_from_json(data: Any) -> Expr:
    if not isinstance(data, dict):
        raise ParseError(f"表达式必须是对象: {data!r}")
    if "var" in data:
        return VarRef(str(data["var"]))
    if "const" in data:
        try:
            return Const(parse_rational(data["const"]))
        except ValueError as e:
            raise ParseError(str(e)) from e
    if "op" in data:
        try:
            return BinOp(data["op"], expr_from_json(data["left"]), expr_from_json(data["right"]))
        except (KeyError, NetworkError) as e:
            raise ParseError(f"无效的运算表达式: {e}") from e
    raise ParseError(f"无法识别的表达式: {data!r}")


def bexpr_to_json(b: BExpr) -> dict:
    if isinstance(b, BoolConst):
        return {"bool": b.value}
    if isinstance(b, And):
        return {"and": [bexpr_to_json(b.left), bexpr_to_json(b.right)]}
    return {"cmp": b.rel.value, "left": expr_to_json(b.left), "right": expr_to_json(b.right)}


def bexpr_from_json(data: Any) -> BExpr:
    if not isinstance(data, dict):
        raise ParseError(f"布尔表达式必须是对象: {data!r}")
    if "bool" in data:
        return BoolConst(bool(data["bool"]))
    if "and" in data:
        parts = data["and"]
        if not isinstance(parts, list) or len(parts) != 2:
            raise ParseError("and 需要恰好两个子表达式")
        return And(bexpr_from_json(parts[0]), bexpr_from_json(parts[1]))
    if "cmp" in data:
        try:
            rel = Rel(data["cmp"])
        except ValueError as e:
            raise ParseError(f"未知的比较关系: {data['cmp']}") from e
        return Cmp(rel, expr_from_json(data.get("left")), expr_from_json(data.get("right")))
    raise ParseError(f"无法识别的布尔表达式: {data!r}")


# ============================================================
# 网络
# ============================================================

class VarSchema(BaseModel):
    id: str
    lo: int
    hi: int
    init: int = 0


class GuardSchema(BaseModel):
    clock: str
    rel: Rel
    bound: str


class UpdateSchema(BaseModel):
    var: str
    expr: Dict[str, Any]


class TransitionSchema(BaseModel):
    source: str = Field(alias="from")
    target: str = Field(alias="to")
    cond: Dict[str, Any] = {"bool": True}
    guard: List[GuardSchema] = []
    updates: List[UpdateSchema] = []
    resets: List[str] = []
    label: str = ""

    model_config = {"populate_by_name": True}


class AutomatonSchema(BaseModel):
    name: str
    locations: List[str]
    initial: str
    urgent: List[str] = []
    transitions: List[TransitionSchema] = []


class NetworkSchema(BaseModel):
    vars: List[VarSchema] = []
    clocks: List[str] = []
    automata: List[AutomatonSchema]


def network_to_dict(net: Network) -> dict:
    return {
        "vars": [{"id": d.id, "lo": d.lo, "hi": d.hi, "init": d.init} for d in net.vars],
        "clocks": list(net.clocks),
        "automata": [
            {
                "name": a.name,
                "locations": list(a.locations),
                "initial": a.initial,
                "urgent": [loc for loc in a.locations if loc in a.urgent],
                "transitions": [
                    {
                        "from": t.source,
                        "cond": bexpr_to_json(t.cond),
                        "guard": [
                            {"clock": g.clock, "rel": g.rel.value, "bound": format_rational(g.bound)}
                            for g in t.guard
                        ],
                        "updates": [{"var": u.var, "expr": expr_to_json(u.expr)} for u in t.updates],
                        "resets": list(t.resets),
                        "to": t.target,
                        "label": t.label,
                    }
                    for t in a.transitions
                ],
            }
            for a in net.automata
        ],
    }


def network_from_dict(data: dict, source: str = "") -> Network:
    """
    从 JSON 对象构造网络

    Raises:
        ParseError: 结构错误
        NetworkError: 结构正确但引用无法解析
    """
    try:
        schema = NetworkSchema.model_validate(data)
    except ValidationError as e:
        raise _schema_error(e, source) from e

    automata = []
    for a in schema.automata:
        transitions = []
        for t in a.transitions:
            try:
                guard = tuple(ClockConstraint(g.clock, g.rel, parse_rational(g.bound)) for g in t.guard)
            except ValueError as e:
                raise ParseError(f"自动机 {a.name} 的守卫常数无效: {e}", source=source) from e
            transitions.append(Transition(
                source=t.source,
                target=t.target,
                cond=bexpr_from_json(t.cond),
                guard=guard,
                updates=tuple(Update(u.var, expr_from_json(u.expr)) for u in t.updates),
                resets=tuple(t.resets),
                label=t.label,
            ))
        automata.append(Automaton(
            name=a.name,
            locations=tuple(a.locations),
            initial=a.initial,
            urgent=frozenset(a.urgent),
            transitions=tuple(transitions),
        ))
    return Network(
        automata=tuple(automata),
        vars=tuple(VarDecl(v.id, v.lo, v.hi, v.init) for v in schema.vars),
        clocks=tuple(schema.clocks),
    )


def parse_network(text: str, source: str = "") -> Network:
    return network_from_dict(_load_json(text, source), source)


def load_network(path: str) -> Network:
    with open(path, "r", encoding="utf-8") as f:
        net = parse_network(f.read(), source=path)
    logger.info(f"已加载网络 {path}: {len(net.automata)} 个自动机, {len(net.vars)} 个变量, {len(net.clocks)} 个时钟")
    return net


# ============================================================
# 配置与运行轨迹
# ============================================================

class ConfigurationSchema(BaseModel):
    L: List[str]
    v: Dict[str, int]
    c: Dict[str, str]


class StepSchema(BaseModel):
    type: str
    delta: str = ""
    automaton: int = -1
    transition: int = -1
    after: ConfigurationSchema


class RunSchema(BaseModel):
    initial: ConfigurationSchema
    steps: List[StepSchema] = []


def configuration_to_dict(q: Configuration) -> dict:
    return {
        "L": list(q.locations),
        "v": {k: q.variables[k] for k in sorted(q.variables)},
        "c": {k: format_rational(q.clocks[k]) for k in sorted(q.clocks)},
    }


def _configuration(schema: ConfigurationSchema) -> Configuration:
    return Configuration(
        locations=tuple(schema.L),
        variables=dict(schema.v),
        clocks={k: parse_rational(v) for k, v in schema.c.items()},
    )


def run_to_dict(run: Run) -> dict:
    steps = []
    for step in run.steps:
        if isinstance(step, DelayStep):
            steps.append({
                "type": "delay",
                "delta": format_rational(step.delta),
                "after": configuration_to_dict(step.after),
            })
        else:
            steps.append({
                "type": "internal",
                "automaton": step.automaton,
                "transition": step.transition,
                "after": configuration_to_dict(step.after),
            })
    return {"initial": configuration_to_dict(run.initial), "steps": steps}


def run_from_dict(data: dict, source: str = "") -> Run:
    try:
        schema = RunSchema.model_validate(data)
    except ValidationError as e:
        raise _schema_error(e, source) from e

    try:
        steps = []
        for index, step in enumerate(schema.steps):
            after = _configuration(step.after)
            if step.type == "delay":
                steps.append(DelayStep(parse_rational(step.delta), after))
            elif step.type == "internal":
                steps.append(InternalStep(step.automaton, step.transition, after))
            else:
                raise ParseError(f"第 {index} 步类型未知: {step.type}", source=source)
        return Run(_configuration(schema.initial), tuple(steps))
    except ValueError as e:
        raise ParseError(f"运行轨迹中的有理数无效: {e}", source=source) from e


def parse_run(text: str, source: str = "") -> Run:
    return run_from_dict(_load_json(text, source), source)


def load_run(path: str) -> Run:
    with open(path, "r", encoding="utf-8") as f:
        run = parse_run(f.read(), source=path)
    logger.info(f"已加载运行轨迹 {path}: {len(run)} 步")
    return run
