"""
随机小规模规划问题与计划生成器

全部随机性来自调用方传入的 random.Random，给定种子即可复现。
"""

import logging
import random
from fractions import Fraction
from typing import List, Optional, Tuple

from src.planning.models import DurationBound, DurativeAction, Plan, PlanningProblem, PlanStep, SnapAction
from src.planning.semantics import dur_c_sat, state_sequence, validate_plan

logger = logging.getLogger(__name__)

DENOMINATORS = (1, 2, 4)


def _rational(rng: random.Random, low: int, high: int) -> Fraction:
    den = rng.choice(DENOMINATORS)
    return Fraction(rng.randint(low * den, high * den), den)


def _subset(rng: random.Random, items: List[str], p: float) -> frozenset:
    return frozenset(x for x in items if rng.random() < p)


def random_action(rng: random.Random, name: str, props: List[str]) -> DurativeAction:
    lower = _rational(rng, 0, 2)
    upper = lower + _rational(rng, 0, 2)
    lower_strict = upper > lower and rng.random() < 0.2
    upper_strict = upper > lower and not lower_strict and rng.random() < 0.2
    return DurativeAction(
        name=name,
        start=SnapAction(_subset(rng, props, 0.25), _subset(rng, props, 0.2), _subset(rng, props, 0.1)),
        end=SnapAction(_subset(rng, props, 0.2), _subset(rng, props, 0.3), _subset(rng, props, 0.1)),
        over_all=_subset(rng, props, 0.1),
        lower=DurationBound(lower, lower_strict),
        upper=DurationBound(upper, upper_strict),
    )


def random_problem(rng: random.Random, max_props: int = 5, max_actions: int = 4,
                   goal: Optional[frozenset] = None) -> PlanningProblem:
    props = [f"p{i}" for i in range(rng.randint(1, max_props))]
    actions = [random_action(rng, f"a{i}", props) for i in range(rng.randint(1, max_actions))]
    init = _subset(rng, props, 0.5)
    return PlanningProblem(tuple(props), tuple(actions), init, goal if goal is not None else frozenset())


def random_duration(rng: random.Random, action: DurativeAction) -> Fraction:
    lo, hi = action.lower.value, action.upper.value
    candidates = [lo, hi, (lo + hi) / 2, lo + (hi - lo) / 4]
    fitting = [d for d in candidates if dur_c_sat(action, d)]
    return rng.choice(fitting) if fitting else lo


def random_plan(rng: random.Random, problem: PlanningProblem, max_steps: int = 4, horizon: int = 6) -> Plan:
    """时间取分母 ≤ 4 的有理数；时长一般满足时长约束，偶尔故意越界"""
    steps = []
    for _ in range(rng.randint(0, max_steps)):
        action = rng.choice(problem.actions)
        t = _rational(rng, 0, horizon)
        d = random_duration(rng, action)
        if rng.random() < 0.05:
            d = action.upper.value + 1
        steps.append(PlanStep(action.name, t, d))
    return Plan(tuple(steps))


def with_reachable_goal(rng: random.Random, problem: PlanningProblem, plan: Plan) -> PlanningProblem:
    """目标取计划终态的随机子集"""
    final = sorted(state_sequence(problem, plan).final)
    goal = frozenset(p for p in final if rng.random() < 0.5)
    return PlanningProblem(problem.props, problem.actions, problem.init, goal)


def valid_instance(rng: random.Random, max_props: int = 5, max_actions: int = 4,
                   max_tries: int = 500, epsilon: Fraction = Fraction(0)) -> Tuple[PlanningProblem, Plan]:
    """
    生成有效且无自重叠的 (问题, 计划)

    Raises:
        RuntimeError: max_tries 次内未生成
    """
    for attempt in range(max_tries):
        problem = random_problem(rng, max_props, max_actions)
        plan = random_plan(rng, problem)
        problem = with_reachable_goal(rng, problem, plan)
        verdict = validate_plan(problem, plan, epsilon)
        if verdict and verdict.no_self_overlap:
            logger.debug(f"第 {attempt + 1} 次尝试生成有效实例: {len(problem.actions)} 个动作, {len(plan)} 步")
            return problem, plan
    raise RuntimeError(f"{max_tries} 次尝试内未能生成有效实例")


def unreachable_goal_problem(rng: random.Random, max_props: int = 4, max_actions: int = 2) -> PlanningProblem:
    """目标包含一个初始为假且没有动作添加的命题"""
    problem = random_problem(rng, max_props, max_actions)
    missing = "unreachable"
    props = problem.props + (missing,)
    return PlanningProblem(props, problem.actions, problem.init, frozenset({missing}))
