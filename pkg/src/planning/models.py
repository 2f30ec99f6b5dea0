"""
时序规划数据模型

接地（grounded）的命题时序规划：命题、瞬时动作（snap action）、
持续动作、规划问题和计划。所有类型构造后不可变。
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

from src.planning.errors import ProblemError

Proposition = str


class SnapKind(str, Enum):
    """瞬时动作类型：开始 / 结束"""
    START = "start"
    END = "end"


@dataclass(frozen=True)
class SnapAction:
    """瞬时动作：前提、添加、删除"""
    pres: FrozenSet[Proposition] = frozenset()
    adds: FrozenSet[Proposition] = frozenset()
    dels: FrozenSet[Proposition] = frozenset()

    @classmethod
    def of(cls, pres: Iterable[str] = (), adds: Iterable[str] = (), dels: Iterable[str] = ()) -> "SnapAction":
        return cls(frozenset(pres), frozenset(adds), frozenset(dels))

    def propositions(self) -> FrozenSet[Proposition]:
        return self.pres | self.adds | self.dels


@dataclass(frozen=True)
class DurationBound:
    """时长界：value 为常数，strict=True 表示 <，否则 ≤"""
    value: Fraction
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if self.value < 0:
            raise ProblemError(f"时长界不能为负: {self.value}")


@dataclass(frozen=True)
class DurativeAction:
    """持续动作"""
    name: str
    start: SnapAction
    end: SnapAction
    over_all: FrozenSet[Proposition] = frozenset()
    lower: DurationBound = DurationBound(Fraction(0))
    upper: DurationBound = DurationBound(Fraction(0))

    def __post_init__(self):
        if not self.name:
            raise ProblemError("动作名不能为空")
        object.__setattr__(self, "over_all", frozenset(self.over_all))
        if self.lower.value > self.upper.value:
            raise ProblemError(
                f"动作 {self.name} 的时长下界 {self.lower.value} 大于上界 {self.upper.value}"
            )

    def snap(self, kind: SnapKind) -> SnapAction:
        return self.start if kind == SnapKind.START else self.end


@dataclass(frozen=True)
class PlanningProblem:
    """时序规划问题 ⟨P, A, I, G⟩，props 与 actions 保持声明顺序"""
    props: Tuple[Proposition, ...]
    actions: Tuple[DurativeAction, ...]
    init: FrozenSet[Proposition] = frozenset()
    goal: FrozenSet[Proposition] = frozenset()
    _by_name: Dict[str, DurativeAction] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "props", tuple(self.props))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "init", frozenset(self.init))
        object.__setattr__(self, "goal", frozenset(self.goal))

        known = set()
        for p in self.props:
            if not p:
                raise ProblemError("命题名不能为空")
            if p in known:
                raise ProblemError(f"命题重复声明: {p}")
            known.add(p)

        by_name = {}
        for action in self.actions:
            if action.name in by_name:
                raise ProblemError(f"动作重复声明: {action.name}")
            used = action.start.propositions() | action.end.propositions() | action.over_all
            unknown = sorted(used - known)
            if unknown:
                raise ProblemError(f"动作 {action.name} 引用了未声明的命题: {unknown}")
            by_name[action.name] = action
        object.__setattr__(self, "_by_name", by_name)

        for label, subset in (("初始状态", self.init), ("目标", self.goal)):
            unknown = sorted(subset - known)
            if unknown:
                raise ProblemError(f"{label}包含未声明的命题: {unknown}")

    def action(self, name: str) -> Optional[DurativeAction]:
        return self._by_name.get(name)

    def has_action(self, name: str) -> bool:
        return name in self._by_name

    def action_index(self, name: str) -> int:
        for i, action in enumerate(self.actions):
            if action.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class PlanStep:
    """计划步骤：动作名、开始时间 t、时长 d"""
    action: str
    t: Fraction
    d: Fraction

    def __post_init__(self):
        object.__setattr__(self, "t", Fraction(self.t))
        object.__setattr__(self, "d", Fraction(self.d))
        if self.t < 0:
            raise ValueError(f"计划步骤开始时间不能为负: {self.action} @ {self.t}")

    @property
    def end(self) -> Fraction:
        return self.t + self.d


@dataclass(frozen=True)
class Plan:
    steps: Tuple[PlanStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


@dataclass(frozen=True, order=True)
class TimedSnap:
    """诱导并行计划中的元素，身份为 (时间, 动作名, 类型)"""
    time: Fraction
    action: str
    kind: SnapKind

    def snap(self, problem: PlanningProblem) -> SnapAction:
        return problem.action(self.action).snap(self.kind)


@dataclass(frozen=True)
class StateSequence:
    """状态序列 M_0 … M_{k+1}"""
    states: Tuple[FrozenSet[Proposition], ...]

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, index: int) -> FrozenSet[Proposition]:
        return self.states[index]

    @property
    def final(self) -> FrozenSet[Proposition]:
        return self.states[-1]
