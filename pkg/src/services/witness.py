"""
见证运行构造

由有效计划构造编码网络的一条到达 goal_M 的运行，并提供
encodes_before / encodes_after 的可执行检查。

每个发生时间点内的迁移顺序:
    1. 每个结束动作的 ee
    2. 每个瞬时动作依次 se, ie, ee'
    3. 每个结束动作的 ee'
    4. 每个开始动作的 se
    5. 每个开始动作的 se'
同一阶段内按动作声明顺序。
"""

import logging
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from src.automata.errors import AutomataError
from src.automata.models import Configuration, DelayStep, InternalStep, Run
from src.automata.semantics import delay, internal, run_check
from src.planning.models import Plan, PlanningProblem, SnapKind, StateSequence
from src.planning.semantics import htps, mutex, state_sequence, validate_plan
from src.services.encoder import GOAL_M, PLAN_M, EncodedNetwork, TransitionKind
from src.utils.rationals import format_rational

logger = logging.getLogger(__name__)


class WitnessError(Exception):
    """见证构造失败：前置条件不满足，或某一步内部迁移失败"""

    def __init__(self, message: str, label: str = "", cause: Optional[Exception] = None):
        self.label = label
        self.cause = cause
        super().__init__(f"{label}: {message}" if label else message)


def arbitrary_delay(epsilon: Fraction) -> Fraction:
    """初始延迟 δ0 与“从未执行”的时钟标记 d_arb，均为 max(1, ε)"""
    return max(Fraction(1), Fraction(epsilon))


# ============================================================
# 发生时间点分类
# ============================================================

@dataclass(frozen=True)
class ScheduleAt:
    ending: Tuple[str, ...] = ()
    instantaneous: Tuple[str, ...] = ()
    starting: Tuple[str, ...] = ()


def classify_at(plan: Plan, t: Fraction, order: Sequence[str] = ()) -> ScheduleAt:
    """
    把时间点 t 上的步骤分为结束、瞬时、开始三类

    Args:
        plan: 计划
        t: 发生时间点
        order: 动作声明顺序，未给出时按步骤出现顺序

    Raises:
        WitnessError: t 不是发生时间点
    """
    t = Fraction(t)
    if t not in htps(plan):
        raise WitnessError(f"{format_rational(t)} 不是发生时间点")

    ending, instantaneous, starting = [], [], []
    for step in plan.steps:
        if step.d == 0:
            if step.t == t:
                instantaneous.append(step.action)
        elif step.t == t:
            starting.append(step.action)
        elif step.end == t:
            ending.append(step.action)

    def ordered(names: List[str]) -> Tuple[str, ...]:
        if not order:
            return tuple(names)
        return tuple(sorted(names, key=list(order).index))

    return ScheduleAt(ordered(ending), ordered(instantaneous), ordered(starting))


# ============================================================
# 编码状态
# ============================================================

def _rel(strict: bool):
    return operator.lt if strict else operator.le


def running_at(plan: Plan, action: str, t: Fraction, strict: bool) -> bool:
    """
    ∃⟨a, s, d⟩ ∈ π: s ◁ t ∧ ¬(s + d ◁ t)

    strict=True 时 ◁ 为 <（before），否则为 ≤（after）
    """
    rel = _rel(strict)
    return any(step.action == action and rel(step.t, t) and not rel(step.end, t) for step in plan.steps)


def time_since_at(plan: Plan, action: str, kind: SnapKind, t: Fraction, strict: bool,
                  d_arb: Fraction = Fraction(1)) -> Fraction:
    """距瞬时动作上一次执行的时间；从未执行时返回 t + d_arb"""
    rel = _rel(strict)
    times = [step.t if kind == SnapKind.START else step.end for step in plan.steps if step.action == action]
    earlier = [s for s in times if rel(s, t)]
    if not earlier:
        return Fraction(t) + d_arb
    return Fraction(t) - max(earlier)


@dataclass(frozen=True)
class EncState:
    """计划在第 i 个发生时间点的编码视角"""
    plan: Plan
    points: Tuple[Fraction, ...]
    i: int
    d_arb: Fraction = Fraction(1)

    @property
    def t(self) -> Fraction:
        return self.points[self.i]

    def running_before(self, action: str) -> bool:
        return running_at(self.plan, action, self.t, strict=True)

    def running_after(self, action: str) -> bool:
        return running_at(self.plan, action, self.t, strict=False)

    def time_since_before(self, action: str, kind: SnapKind) -> Fraction:
        return time_since_at(self.plan, action, kind, self.t, True, self.d_arb)

    def time_since_after(self, action: str, kind: SnapKind) -> Fraction:
        return time_since_at(self.plan, action, kind, self.t, False, self.d_arb)


def encoding_mismatches(enc: EncodedNetwork, plan: Plan, i: int, q: Configuration, after: bool,
                        states: Optional[StateSequence] = None) -> List[str]:
    """列出配置 q 不满足的编码条款；空列表表示 q 编码了第 i 个时间点前/后的状态"""
    problem = enc.problem
    d_arb = arbitrary_delay(enc.epsilon)
    points = tuple(htps(plan))
    states = states or state_sequence(problem, plan)
    v, c = q.variables, q.clocks
    issues = []

    if q.locations[0] != PLAN_M:
        issues.append(f"主自动机位置 {q.locations[0]} ≠ {PLAN_M}")
    if v.get(enc.vars.ps) != 1:
        issues.append(f"ps = {v.get(enc.vars.ps)} ≠ 1")

    if not points:
        for index, action in enumerate(enc.action_order, 1):
            if q.locations[index] != f"{action}.inactive":
                issues.append(f"{action} 不在 inactive")
            for clock in (enc.clocks.start[action], enc.clocks.end[action]):
                if not c[clock] > 0:
                    issues.append(f"{clock} = {format_rational(c[clock])} 不为正")
        expected_state = problem.init
        running = set()
    else:
        view = EncState(plan, points, i, d_arb)
        running = set()
        for index, action in enumerate(enc.action_order, 1):
            is_running = view.running_after(action) if after else view.running_before(action)
            if is_running:
                running.add(action)
            expected = f"{action}.{'running' if is_running else 'inactive'}"
            if q.locations[index] != expected:
                issues.append(f"{action} 位于 {q.locations[index]}，应为 {expected}")
            for kind in (SnapKind.START, SnapKind.END):
                clock = enc.clocks.clock(action, kind)
                since = view.time_since_after(action, kind) if after else view.time_since_before(action, kind)
                if c[clock] != since:
                    issues.append(f"{clock} = {format_rational(c[clock])}，应为 {format_rational(since)}")
        expected_state = states[i + 1] if after else states[i]

    for p in problem.props:
        want = 1 if p in expected_state else 0
        if v[enc.vars.vp[p]] != want:
            issues.append(f"{enc.vars.vp[p]} = {v[enc.vars.vp[p]]}，应为 {want}")
        count = sum(1 for a in running if p in problem.action(a).over_all)
        if v[enc.vars.lp[p]] != count:
            issues.append(f"{enc.vars.lp[p]} = {v[enc.vars.lp[p]]}，应为 {count}")
    if v[enc.vars.aa] != len(running):
        issues.append(f"aa = {v[enc.vars.aa]}，应为 {len(running)}")
    return issues


def encodes_before(enc: EncodedNetwork, plan: Plan, i: int, q: Configuration) -> bool:
    return not encoding_mismatches(enc, plan, i, q, after=False)


def encodes_after(enc: EncodedNetwork, plan: Plan, i: int, q: Configuration) -> bool:
    return not encoding_mismatches(enc, plan, i, q, after=True)


# ============================================================
# 构造
# ============================================================

def segment_order(schedule: ScheduleAt) -> List[Tuple[str, TransitionKind]]:
    order = [(a, TransitionKind.EE) for a in schedule.ending]
    for a in schedule.instantaneous:
        order += [(a, TransitionKind.SE), (a, TransitionKind.IE), (a, TransitionKind.EE_PRIME)]
    order += [(a, TransitionKind.EE_PRIME) for a in schedule.ending]
    order += [(a, TransitionKind.SE) for a in schedule.starting]
    order += [(a, TransitionKind.SE_PRIME) for a in schedule.starting]
    return order


def build_happening_segment(enc: EncodedNetwork, plan: Plan, i: int, q_in: Configuration,
                            check: bool = True) -> List[InternalStep]:
    """
    第 i 个发生时间点上的内部迁移序列

    Raises:
        WitnessError: 入口配置不满足 encodes_before，某步迁移失败，或结果不满足 encodes_after
    """
    states = state_sequence(enc.problem, plan)
    if check:
        issues = encoding_mismatches(enc, plan, i, q_in, after=False, states=states)
        if issues:
            raise WitnessError(f"第 {i} 个时间点的入口配置不满足 encodes_before: {issues[0]}")

    t = htps(plan)[i]
    schedule = classify_at(plan, t, enc.action_order)
    q = q_in
    steps = []
    for action, kind in segment_order(schedule):
        a, k = enc.transition_of(action, kind)
        label = enc.label_text(a, k)
        try:
            q = internal(enc.network, q, a, k)
        except AutomataError as e:
            raise WitnessError(f"t={format_rational(t)} 迁移失败: {e}", label, e) from e
        logger.debug(f"t={format_rational(t)} {label}")
        steps.append(InternalStep(a, k, q))

    if check:
        issues = encoding_mismatches(enc, plan, i, q, after=True, states=states)
        if issues:
            raise WitnessError(f"第 {i} 个时间点的结果不满足 encodes_after: {issues[0]}")
    return steps


def build_witness(enc: EncodedNetwork, problem: PlanningProblem, plan: Plan,
                  epsilon: Optional[Fraction] = None, upto: Optional[int] = None) -> Run:
    """
    由有效计划构造见证运行

    运行形如 e1M; δ0; (δ_i; 第 i 段)*; e2M。δ_0 = t_0，之后 δ_i = t_i − t_{i−1}。

    Args:
        enc: 编码网络
        problem: 规划问题
        plan: 计划
        epsilon: 互斥间隔，默认取编码时的 ε
        upto: 只构造前 upto 个时间点（不含 e2M），用于前缀检查

    Raises:
        WitnessError: 计划无效、自重叠，或构造过程中任何一步失败
    """
    epsilon = enc.epsilon if epsilon is None else Fraction(epsilon)
    verdict = validate_plan(problem, plan, epsilon)
    if not verdict:
        raise WitnessError(f"计划无效: {verdict.first.format()}")
    if not verdict.no_self_overlap:
        raise WitnessError("计划存在同一动作的重叠执行")
    for step in plan.steps:
        action = problem.action(step.action)
        if step.d == 0 and mutex(action.start, action.end):
            raise WitnessError(f"瞬时执行的动作 {step.action} 的开始与结束互斥")

    net = enc.network
    points = htps(plan)
    d0 = arbitrary_delay(enc.epsilon)
    steps = []

    q = enc.initial
    e1 = enc.main_transition(TransitionKind.E1M)
    q = internal(net, q, *e1)
    steps.append(InternalStep(*e1, q))
    q = delay(net, q, d0)
    steps.append(DelayStep(d0, q))

    count = len(points) if upto is None else min(upto, len(points))
    for i in range(count):
        delta = points[i] if i == 0 else points[i] - points[i - 1]
        try:
            q = delay(net, q, delta)
        except AutomataError as e:
            raise WitnessError(f"第 {i} 个时间点前的延迟失败: {e}", "delay", e) from e
        steps.append(DelayStep(delta, q))
        segment = build_happening_segment(enc, plan, i, q)
        steps += segment
        q = segment[-1].after

    if upto is None or upto >= len(points):
        e2 = enc.main_transition(TransitionKind.E2M)
        try:
            q = internal(net, q, *e2)
        except AutomataError as e:
            raise WitnessError(f"无法进入 {GOAL_M}: {e}", TransitionKind.E2M.value, e) from e
        steps.append(InternalStep(*e2, q))

    run = Run(enc.initial, tuple(steps))
    replay = run_check(net, run)
    if not replay:
        raise WitnessError(f"见证运行重放失败: {replay.reason}")
    logger.info(f"见证运行构造完成: {len(points)} 个发生时间点, {len(run)} 步")
    return run


def timeline(enc: EncodedNetwork, run: Run) -> List[str]:
    """每步一行: 内部迁移为 "t=<计划时间> <标签> <动作>"，延迟为 "delay <δ>" """
    d0 = arbitrary_delay(enc.epsilon)
    elapsed = Fraction(0)
    lines = []
    for step in run.steps:
        if isinstance(step, DelayStep):
            elapsed += step.delta
            lines.append(f"delay {format_rational(step.delta)}")
            continue
        kind = enc.labels[(step.automaton, step.transition)]
        owner = "main" if step.automaton == 0 else enc.action_order[step.automaton - 1]
        at = format_rational(elapsed - d0) if elapsed >= d0 else "-"
        lines.append(f"t={at} {kind.value} {owner}")
    return lines
