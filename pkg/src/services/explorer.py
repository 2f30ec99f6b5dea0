"""
有界显式状态可达性搜索

从初始配置出发，按层广度优先交替执行延迟（取自有限延迟网格）与内部迁移，
寻找 main 自动机到达 goal_M 的运行。找到的运行一定经过 run_check 重放确认。

延迟网格是启发式的：守卫只把时钟与少数常数比较，默认网格取
{0, 1, ε, 所有时长界常数} 及其两两正差。
"""

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterable, List, Optional, Tuple

from src.automata.errors import TransitionError
from src.automata.models import Configuration, DelayStep, InternalStep, Network, Run, Step
from src.automata.semantics import delay, ef_goal, run_check, successors
from src.planning.models import PlanningProblem
from src.services.encoder import EncodedNetwork
from src.utils.rationals import format_rational

logger = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 16


class SearchStatus(str, Enum):
    FOUND = "found"
    NOT_FOUND = "not_found"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class SearchBudget:
    max_internal_steps: int = 24
    delay_grid: Tuple[Fraction, ...] = (Fraction(0), Fraction(1))
    max_configs: int = 5000

    def __post_init__(self):
        object.__setattr__(self, "delay_grid", tuple(sorted({Fraction(d) for d in self.delay_grid})))
        if self.max_internal_steps <= 0 or self.max_configs <= 0:
            raise ValueError("搜索预算必须为正")
        if not self.delay_grid:
            raise ValueError("延迟网格不能为空")
        if any(d < 0 for d in self.delay_grid):
            raise ValueError("延迟网格中的值不能为负")


@dataclass(frozen=True)
class SearchResult:
    """搜索结果；未找到时 run 为 None。status 区分“空间已穷尽”与“预算用尽”"""
    status: SearchStatus
    run: Optional[Run] = None
    visited: int = 0
    depth: int = 0

    def __bool__(self) -> bool:
        return self.status == SearchStatus.FOUND

    def describe(self, budget: SearchBudget) -> str:
        if self.status == SearchStatus.FOUND:
            return f"找到目标运行: {len(self.run)} 步, 访问 {self.visited} 个配置"
        if self.status == SearchStatus.NOT_FOUND:
            return f"not found ≤ budget: 内部迁移 ≤ {budget.max_internal_steps} 步内的空间已穷尽（访问 {self.visited} 个配置）"
        return f"not found ≤ budget: 配置预算 {budget.max_configs} 已用尽"


def default_grid(problem: PlanningProblem, epsilon: Fraction = Fraction(0),
                 limit: int = DEFAULT_GRID_SIZE) -> Tuple[Fraction, ...]:
    """{0, 1, ε, 时长界常数} ∪ 两两正差，按大小保留前 limit 个"""
    constants = {Fraction(0), Fraction(1), Fraction(epsilon)}
    for action in problem.actions:
        constants.add(action.lower.value)
        constants.add(action.upper.value)
    grid = set(constants)
    for a, b in combinations(sorted(constants), 2):
        if b - a > 0:
            grid.add(b - a)
    return tuple(sorted(grid)[:limit])


def _max_constant(net: Network) -> Fraction:
    bounds = [g.bound for a in net.automata for t in a.transitions for g in t.guard]
    return max(bounds, default=Fraction(0))


@dataclass(frozen=True)
class _Node:
    config: Configuration
    step: Optional[Step]
    parent: Optional["_Node"]
    internal_steps: int
    after_delay: bool

    def path(self) -> List[Step]:
        steps = []
        node = self
        while node.step is not None:
            steps.append(node.step)
            node = node.parent
        return list(reversed(steps))


class Explorer:
    """
    有界广度优先搜索

    运行严格交替：每个内部迁移之后必须先延迟（可为 0），再执行下一个内部迁移。
    每层的扩展可交给多个线程，合并时按前沿顺序，结果与线程数无关。
    """

    def __init__(self, enc: EncodedNetwork, budget: SearchBudget, seed: Optional[int] = 0, workers: int = 1):
        self.enc = enc
        self.net = enc.network
        self.budget = budget
        self.workers = max(1, workers)
        self.rng = random.Random(seed) if seed is not None else None
        self.cap = _max_constant(self.net) + 1

    def _key(self, node: _Node) -> tuple:
        q = node.config
        clocks = tuple(min(q.clocks[c], self.cap) for c in self.net.clocks)
        return q.locations, tuple(sorted(q.variables.items())), clocks, node.after_delay

    def _expand(self, node: _Node) -> List[_Node]:
        children = []
        if node.after_delay:
            if node.internal_steps >= self.budget.max_internal_steps:
                return children
            for i, k, q in successors(self.net, node.config):
                children.append(_Node(q, InternalStep(i, k, q), node, node.internal_steps + 1, False))
        else:
            for delta in self.budget.delay_grid:
                try:
                    q = delay(self.net, node.config, delta)
                except TransitionError:
                    continue
                children.append(_Node(q, DelayStep(delta, q), node, node.internal_steps, True))
        return children

    def _expand_level(self, frontier: List[_Node]) -> Iterable[List[_Node]]:
        if self.workers == 1 or len(frontier) < 2:
            return [self._expand(node) for node in frontier]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(self._expand, frontier))

    def _verified(self, node: _Node) -> Optional[Run]:
        run = Run(self.enc.initial, tuple(node.path()))
        replay = run_check(self.net, run)
        if not replay or not ef_goal(run, self.enc.accepting):
            logger.error(f"搜索得到的运行未通过重放: {replay.reason}")
            return None
        return run

    def search(self) -> SearchResult:
        root = _Node(self.enc.initial, None, None, 0, True)
        visited = {self._key(root)}
        frontier = [root]
        depth = 0
        while frontier:
            depth += 1
            next_frontier = []
            for children in self._expand_level(frontier):
                if self.rng is not None:
                    self.rng.shuffle(children)
                for child in children:
                    key = self._key(child)
                    if key in visited:
                        continue
                    if self.enc.accepting(child.config):
                        run = self._verified(child)
                        if run is not None:
                            logger.info(f"搜索完成: 找到目标运行, {len(run)} 步, 访问 {len(visited)} 个配置")
                            return SearchResult(SearchStatus.FOUND, run, len(visited), depth)
                    visited.add(key)
                    if len(visited) > self.budget.max_configs:
                        logger.info(f"搜索预算用尽: 已访问 {len(visited)} 个配置")
                        return SearchResult(SearchStatus.BUDGET_EXHAUSTED, None, len(visited), depth)
                    next_frontier.append(child)
            logger.debug(f"第 {depth} 层: 前沿 {len(next_frontier)}, 已访问 {len(visited)}")
            frontier = next_frontier
        logger.info(f"搜索完成: 内部迁移 ≤ {self.budget.max_internal_steps} 步内未找到目标")
        return SearchResult(SearchStatus.NOT_FOUND, None, len(visited), depth)


def bounded_reach(enc: EncodedNetwork, budget: SearchBudget, seed: Optional[int] = 0, workers: int = 1) -> SearchResult:
    grid = ", ".join(format_rational(d) for d in budget.delay_grid)
    logger.debug(f"开始搜索: 延迟网格 [{grid}], 内部迁移上限 {budget.max_internal_steps}, 配置上限 {budget.max_configs}")
    return Explorer(enc, budget, seed, workers).search()
