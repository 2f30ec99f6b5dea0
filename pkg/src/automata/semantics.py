"""
时间自动机网络的操作语义

eval / bval / ccval、延迟迁移、内部迁移、运行重放和 EF 目标判定。
所有函数为纯函数，不修改传入的配置。
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Optional, Tuple

from src.automata.errors import (
    AutomataError,
    ConditionFalse,
    DivisionByZero,
    GuardFalse,
    LocationMismatch,
    NegativeDelay,
    NonIntegerUpdate,
    TransitionError,
    UnboundClock,
    UnboundVariable,
    UrgentLocationBlocksDelay,
    VariableOutOfBounds,
)
from src.automata.models import (
    And,
    BExpr,
    BoolConst,
    ClockConstraint,
    Configuration,
    Const,
    DelayStep,
    Expr,
    Network,
    Run,
    VarRef,
)
from src.utils.rationals import format_rational

logger = logging.getLogger(__name__)


def eval_expr(v: Mapping[str, int], e: Expr) -> Fraction:
    """按结构递归求值表达式"""
    if isinstance(e, VarRef):
        if e.var not in v:
            raise UnboundVariable(e.var)
        return Fraction(v[e.var])
    if isinstance(e, Const):
        return e.value
    left = eval_expr(v, e.left)
    right = eval_expr(v, e.right)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    if right == 0:
        raise DivisionByZero(str(e))
    return left / right


def bval(v: Mapping[str, int], b: BExpr) -> bool:
    if isinstance(b, BoolConst):
        return b.value
    if isinstance(b, And):
        # 不短路
        left = bval(v, b.left)
        right = bval(v, b.right)
        return left and right
    return b.rel.holds(eval_expr(v, b.left), eval_expr(v, b.right))


def ccval(c: Mapping[str, Fraction], g: Iterable[ClockConstraint]) -> bool:
    return first_false_constraint(c, g) is None


def first_false_constraint(c: Mapping[str, Fraction], g: Iterable[ClockConstraint]) -> Optional[ClockConstraint]:
    for constraint in g:
        if constraint.clock not in c:
            raise UnboundClock(constraint.clock)
        if not constraint.rel.holds(c[constraint.clock], constraint.bound):
            return constraint
    return None


def urgent_automaton(net: Network, q: Configuration) -> Optional[int]:
    """返回第一个处于紧急位置的自动机下标"""
    for index, (automaton, location) in enumerate(zip(net.automata, q.locations)):
        if location in automaton.urgent:
            return index
    return None


def delay(net: Network, q: Configuration, delta: Fraction) -> Configuration:
    """
    延迟迁移：所有时钟同时增加 delta

    紧急位置只阻止 delta > 0，delta = 0 总是允许。

    Raises:
        NegativeDelay: delta < 0
        UrgentLocationBlocksDelay: delta > 0 且某个自动机处于紧急位置
    """
    delta = Fraction(delta)
    if delta < 0:
        raise NegativeDelay(delta)
    if delta > 0:
        blocked = urgent_automaton(net, q)
        if blocked is not None:
            raise UrgentLocationBlocksDelay(blocked, q.locations[blocked])
    return Configuration(
        locations=q.locations,
        variables=q.variables,
        clocks={clock: value + delta for clock, value in q.clocks.items()},
    )


def internal(net: Network, q: Configuration, i: int, k: int) -> Configuration:
    """
    内部迁移：自动机 i 执行其第 k 条迁移

    所有更新基于旧的变量赋值同时求值。

    Raises:
        TransitionError 的各个子类，指出失败的位置、条件或守卫
    """
    if not 0 <= i < len(net.automata):
        raise TransitionError(f"自动机下标越界: {i}")
    automaton = net.automata[i]
    if not 0 <= k < len(automaton.transitions):
        raise TransitionError(f"自动机 {i} 的迁移下标越界: {k}")
    t = automaton.transitions[k]

    if q.locations[i] != t.source:
        raise LocationMismatch(i, t.source, q.locations[i])
    if not bval(q.variables, t.cond):
        raise ConditionFalse(i, _first_false_conjunct(q.variables, t.cond))
    failed = first_false_constraint(q.clocks, t.guard)
    if failed is not None:
        raise GuardFalse(i, f"{failed}（当前 {failed.clock}={format_rational(q.clocks[failed.clock])}）")

    variables = dict(q.variables)
    for update in t.updates:
        value = eval_expr(q.variables, update.expr)
        if value.denominator != 1:
            raise NonIntegerUpdate(update.var, value)
        decl = net.decl(update.var)
        if decl is not None and not decl.lo <= value <= decl.hi:
            raise VariableOutOfBounds(update.var, value, decl.lo, decl.hi)
        variables[update.var] = int(value)

    clocks = dict(q.clocks)
    for clock in t.resets:
        clocks[clock] = Fraction(0)

    locations = list(q.locations)
    locations[i] = t.target
    return Configuration(tuple(locations), variables, clocks)


def _first_false_conjunct(v: Mapping[str, int], b: BExpr) -> str:
    if isinstance(b, And):
        if not bval(v, b.left):
            return _first_false_conjunct(v, b.left)
        return _first_false_conjunct(v, b.right)
    return str(b)


def successors(net: Network, q: Configuration) -> Iterator[Tuple[int, int, Configuration]]:
    """所有可执行的内部迁移 (i, k, q')，按自动机、迁移顺序"""
    for i, automaton in enumerate(net.automata):
        for k, t in enumerate(automaton.transitions):
            if t.source != q.locations[i]:
                continue
            try:
                yield i, k, internal(net, q, i, k)
            except TransitionError:
                continue


# ============================================================
# 运行重放
# ============================================================

@dataclass(frozen=True)
class ReplayResult:
    """重放结果；真值等价于 accepted。失败时 failed_step 为首个出错步骤的下标"""
    accepted: bool
    steps_replayed: int = 0
    failed_step: int = -1
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


def _well_formed(net: Network, q: Configuration) -> str:
    if len(q.locations) != len(net.automata):
        return f"位置向量长度 {len(q.locations)} 与自动机数 {len(net.automata)} 不一致"
    for automaton, location in zip(net.automata, q.locations):
        if location not in automaton.locations:
            return f"自动机 {automaton.name} 没有位置 {location}"
    if set(q.variables) != {d.id for d in net.vars}:
        return "变量赋值不完整或含多余变量"
    if set(q.clocks) != set(net.clocks):
        return "时钟赋值不完整或含多余时钟"
    if any(value < 0 for value in q.clocks.values()):
        return "时钟值为负"
    return ""


def run_check(net: Network, run: Run) -> ReplayResult:
    """
    从运行的初始配置逐步重放，每一步都必须成功并精确复现记录的后继配置

    Returns:
        ReplayResult，不抛异常
    """
    problem = _well_formed(net, run.initial)
    if problem:
        return ReplayResult(False, 0, -1, f"初始配置不合法: {problem}")

    current = run.initial
    for index, step in enumerate(run.steps):
        try:
            if isinstance(step, DelayStep):
                produced = delay(net, current, step.delta)
                label = f"delay {format_rational(step.delta)}"
            else:
                produced = internal(net, current, step.automaton, step.transition)
                label = f"internal ({step.automaton}, {step.transition})"
        except AutomataError as e:
            logger.debug(f"重放在第 {index} 步失败: {e}")
            return ReplayResult(False, index, index, f"第 {index} 步无法执行: {e}")
        if produced != step.after:
            logger.debug(f"重放在第 {index} 步 ({label}) 与记录的配置不一致")
            return ReplayResult(False, index, index, f"第 {index} 步 {label} 的结果与记录的配置不一致")
        current = produced
    return ReplayResult(True, len(run.steps))


def ef_goal(run: Run, pred: Callable[[Configuration], bool]) -> bool:
    """运行中是否存在满足 pred 的配置"""
    return any(pred(q) for q in run.configurations())


def at_location(automaton: int, location: str) -> Callable[[Configuration], bool]:
    return lambda q: q.locations[automaton] == location
