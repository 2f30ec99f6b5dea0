"""
时序计划有效性语义

实现互斥、时长约束、诱导并行计划、发生时间点序列、状态序列、
互斥分隔、自重叠以及完整的计划有效性判定。全部为纯函数。
"""

import logging
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from itertools import combinations
from typing import FrozenSet, List, Optional, Set, Tuple

from src.planning.errors import ResolutionError
from src.planning.models import (
    DurativeAction,
    Plan,
    PlanningProblem,
    Proposition,
    SnapAction,
    SnapKind,
    StateSequence,
    TimedSnap,
)
from src.utils.rationals import format_rational

logger = logging.getLogger(__name__)


# ============================================================
# 基本关系
# ============================================================

def _mutex_one_way(a: SnapAction, b: SnapAction) -> bool:
    return bool(a.pres & b.adds or a.pres & b.dels or a.adds & b.dels)


def mutex(a: SnapAction, b: SnapAction) -> bool:
    """两个瞬时动作是否互斥（对称）"""
    return _mutex_one_way(a, b) or _mutex_one_way(b, a)


def dur_c_sat(action: DurativeAction, d: Fraction) -> bool:
    """时长 d 是否同时满足下界和上界"""
    lower, upper = action.lower, action.upper
    lower_ok = lower.value < d if lower.strict else lower.value <= d
    upper_ok = d < upper.value if upper.strict else d <= upper.value
    return lower_ok and upper_ok


# ============================================================
# 诱导并行计划与发生时间点
# ============================================================

def induced_parallel_plan(plan: Plan) -> FrozenSet[TimedSnap]:
    """每个步骤产生 ⟨t, a⊢⟩ 与 ⟨t+d, a⊣⟩"""
    snaps = set()
    for step in plan.steps:
        snaps.add(TimedSnap(step.t, step.action, SnapKind.START))
        snaps.add(TimedSnap(step.end, step.action, SnapKind.END))
    return frozenset(snaps)


def htps(plan: Plan) -> List[Fraction]:
    """严格递增、无重复的发生时间点序列"""
    return sorted({snap.time for snap in induced_parallel_plan(plan)})


def snaps_at(plan: Plan, t: Fraction) -> List[TimedSnap]:
    """时间点 t 上的全部瞬时动作（按动作名、类型排序）"""
    return sorted(s for s in induced_parallel_plan(plan) if s.time == t)


def effects_at(problem: PlanningProblem, plan: Plan, t: Fraction) -> Tuple[FrozenSet[Proposition], FrozenSet[Proposition]]:
    """时间点 t 上所有瞬时动作的添加集与删除集之并"""
    adds: Set[Proposition] = set()
    dels: Set[Proposition] = set()
    for timed in snaps_at(plan, t):
        snap = timed.snap(problem)
        adds |= snap.adds
        dels |= snap.dels
    return frozenset(adds), frozenset(dels)


def invs_at(problem: PlanningProblem, plan: Plan, t: Fraction) -> FrozenSet[Proposition]:
    """时间点 t 上生效的不变式：t' < t ≤ t' + d"""
    invs: Set[Proposition] = set()
    for step in plan.steps:
        if step.t < t <= step.end:
            invs |= problem.action(step.action).over_all
    return frozenset(invs)


def state_sequence(problem: PlanningProblem, plan: Plan) -> StateSequence:
    """按更新规则 M_{i+1} = (M_i − Dels(t_i)) ∪ Adds(t_i) 计算状态序列，不做有效性判断"""
    states = [frozenset(problem.init)]
    for t in htps(plan):
        adds, dels = effects_at(problem, plan, t)
        states.append((states[-1] - dels) | adds)
    return StateSequence(tuple(states))


# ============================================================
# 互斥分隔与自重叠
# ============================================================

def separation_violations(problem: PlanningProblem, plan: Plan, epsilon: Fraction) -> List[Tuple[TimedSnap, TimedSnap]]:
    """违反 0/ε 分隔的互斥瞬时动作对"""
    epsilon = Fraction(epsilon)
    violations = []
    for first, second in combinations(sorted(induced_parallel_plan(plan)), 2):
        if not mutex(first.snap(problem), second.snap(problem)):
            continue
        gap = abs(second.time - first.time)
        if not (0 < gap and epsilon <= gap):
            violations.append((first, second))
    return violations


def separation_ok(problem: PlanningProblem, plan: Plan, epsilon: Fraction) -> bool:
    return not separation_violations(problem, plan, epsilon)


def self_overlaps(plan: Plan) -> List[Tuple[int, int]]:
    """同一动作的两个步骤闭区间相交的下标对"""
    overlaps = []
    for (i, a), (j, b) in combinations(enumerate(plan.steps), 2):
        if a.action != b.action:
            continue
        if a.t <= b.t <= a.end or b.t <= a.t <= b.end:
            overlaps.append((i, j))
    return overlaps


def no_self_overlap(plan: Plan) -> bool:
    return not self_overlaps(plan)


# ============================================================
# 有效性判定
# ============================================================

class Clause(IntEnum):
    """有效计划的各条款，数值即诊断中的条款编号"""
    PRECONDITION = 1
    UPDATE = 2
    INVARIANT = 3
    GOAL = 4
    INITIAL = 5
    DURATION = 6
    NON_NEGATIVE = 7
    SEPARATION = 8


@dataclass(frozen=True)
class Diagnostic:
    """一条违规诊断"""
    clause: Clause
    message: str
    time: Optional[Fraction] = None
    steps: Tuple[int, ...] = ()

    def format(self) -> str:
        at = f" @ t={format_rational(self.time)}" if self.time is not None else ""
        return f"[条款 {int(self.clause)} {self.clause.name.lower()}]{at} {self.message}"


@dataclass(frozen=True)
class Verdict:
    """计划判定结果；真值等价于 valid"""
    valid: bool
    diagnostics: Tuple[Diagnostic, ...] = ()
    no_self_overlap: bool = True
    states: Optional[StateSequence] = field(default=None, compare=False)

    def __bool__(self) -> bool:
        return self.valid

    @property
    def first(self) -> Optional[Diagnostic]:
        """最早时间点上编号最小的违规条款"""
        if not self.diagnostics:
            return None
        never = Fraction(-1)
        return min(self.diagnostics, key=lambda d: (d.time if d.time is not None else never, d.clause))

    def clauses(self) -> Set[Clause]:
        return {d.clause for d in self.diagnostics}


def resolve_plan(problem: PlanningProblem, plan: Plan) -> None:
    """检查每个步骤引用的动作都存在"""
    for index, step in enumerate(plan.steps):
        if not problem.has_action(step.action):
            raise ResolutionError(step.action, index)


def validate_plan(problem: PlanningProblem, plan: Plan, epsilon: Fraction = Fraction(0)) -> Verdict:
    """
    判定计划是否有效

    Args:
        problem: 规划问题
        plan: 计划
        epsilon: 互斥瞬时动作之间的最小间隔

    Returns:
        Verdict，包含全部违规诊断与自重叠状态

    Raises:
        ResolutionError: 步骤引用了未知动作
    """
    resolve_plan(problem, plan)
    epsilon = Fraction(epsilon)
    diagnostics: List[Diagnostic] = []

    states = state_sequence(problem, plan)
    points = htps(plan)

    if states[0] != problem.init:
        diagnostics.append(Diagnostic(Clause.INITIAL, "初始状态与 I 不一致"))

    for i, t in enumerate(points):
        current = states[i]
        for timed in snaps_at(plan, t):
            missing = timed.snap(problem).pres - current
            if missing:
                diagnostics.append(Diagnostic(
                    Clause.PRECONDITION,
                    f"{timed.action} 的{_kind_text(timed.kind)}前提不满足: {sorted(missing)}",
                    t,
                    _steps_of(plan, timed),
                ))

        adds, dels = effects_at(problem, plan, t)
        if states[i + 1] != (current - dels) | adds:
            diagnostics.append(Diagnostic(Clause.UPDATE, "状态更新规则不成立", t))

        broken = invs_at(problem, plan, t) - current
        if broken:
            diagnostics.append(Diagnostic(Clause.INVARIANT, f"不变式不满足: {sorted(broken)}", t))

    missing_goal = problem.goal - states.final
    if missing_goal:
        final_time = points[-1] if points else None
        diagnostics.append(Diagnostic(Clause.GOAL, f"终态未满足目标: {sorted(missing_goal)}", final_time))

    for index, step in enumerate(plan.steps):
        if step.d < 0:
            diagnostics.append(Diagnostic(
                Clause.NON_NEGATIVE, f"{step.action} 的时长为负: {format_rational(step.d)}", step.t, (index,)
            ))
        if not dur_c_sat(problem.action(step.action), step.d):
            diagnostics.append(Diagnostic(
                Clause.DURATION, f"{step.action} 的时长 {format_rational(step.d)} 不满足时长约束", step.t, (index,)
            ))

    for first, second in separation_violations(problem, plan, epsilon):
        gap = abs(second.time - first.time)
        diagnostics.append(Diagnostic(
            Clause.SEPARATION,
            f"互斥瞬时动作 {first.action}{_kind_mark(first.kind)}@{format_rational(first.time)} 与 "
            f"{second.action}{_kind_mark(second.kind)}@{format_rational(second.time)} 间隔 {format_rational(gap)} 不足",
            max(first.time, second.time),
            _steps_of(plan, first) + _steps_of(plan, second),
        ))

    verdict = Verdict(
        valid=not diagnostics,
        diagnostics=tuple(diagnostics),
        no_self_overlap=no_self_overlap(plan),
        states=states,
    )
    if verdict.valid:
        logger.debug(f"计划有效: {len(plan)} 步, {len(points)} 个发生时间点")
    else:
        logger.debug(f"计划无效: {len(diagnostics)} 条诊断, 首条: {verdict.first.format()}")
    return verdict


def _kind_text(kind: SnapKind) -> str:
    return "开始" if kind == SnapKind.START else "结束"


def _kind_mark(kind: SnapKind) -> str:
    return "⊢" if kind == SnapKind.START else "⊣"


def _steps_of(plan: Plan, timed: TimedSnap) -> Tuple[int, ...]:
    found = []
    for index, step in enumerate(plan.steps):
        if step.action != timed.action:
            continue
        at = step.t if timed.kind == SnapKind.START else step.end
        if at == timed.time:
            found.append(index)
    return tuple(found)
