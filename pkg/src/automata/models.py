"""
时间自动机网络数据模型

表达式树、时钟约束、迁移、自动机、网络、配置和运行。
时钟常数与时钟值均为 Fraction，变量为有界整数。
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, Mapping, Optional, Tuple, Union

from src.automata.errors import NetworkError
from src.utils.rationals import format_rational


class Rel(str, Enum):
    LT = "<"
    LE = "<="
    EQ = "=="
    GE = ">="
    GT = ">"

    def holds(self, left: Fraction, right: Fraction) -> bool:
        if self is Rel.LT:
            return left < right
        if self is Rel.LE:
            return left <= right
        if self is Rel.EQ:
            return left == right
        if self is Rel.GE:
            return left >= right
        return left > right


# ============================================================
# 表达式
# ============================================================

@dataclass(frozen=True)
class VarRef:
    var: str

    def __str__(self) -> str:
        return self.var


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def __str__(self) -> str:
        return format_rational(self.value)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    OPS = ("+", "-", "*", "/")

    def __post_init__(self):
        if self.op not in self.OPS:
            raise NetworkError(f"不支持的运算符: {self.op}")

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


Expr = Union[VarRef, Const, BinOp]


@dataclass(frozen=True)
class Cmp:
    rel: Rel
    left: Expr
    right: Expr

    def __str__(self) -> str:
        return f"{self.left} {self.rel.value} {self.right}"


@dataclass(frozen=True)
class And:
    left: "BExpr"
    right: "BExpr"

    def __str__(self) -> str:
        return f"{self.left} && {self.right}"


@dataclass(frozen=True)
class BoolConst:
    """布尔常量；空合取序列化为 true"""
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


BExpr = Union[Cmp, And, BoolConst]

TRUE = BoolConst(True)
FALSE = BoolConst(False)


def var_eq(var: str, value: int) -> Cmp:
    return Cmp(Rel.EQ, VarRef(var), Const(value))


def conj(*parts: BExpr) -> BExpr:
    """左结合合取，忽略 true 文字；无项时为 true"""
    kept = [p for p in parts if p != TRUE]
    if not kept:
        return TRUE
    result = kept[0]
    for part in kept[1:]:
        result = And(result, part)
    return result


def conjuncts(b: BExpr) -> Tuple[BExpr, ...]:
    """展开合取树"""
    if isinstance(b, And):
        return conjuncts(b.left) + conjuncts(b.right)
    if b == TRUE:
        return ()
    return (b,)


def expr_vars(e: Union[Expr, BExpr]) -> FrozenSet[str]:
    if isinstance(e, VarRef):
        return frozenset({e.var})
    if isinstance(e, (BinOp, Cmp, And)):
        return expr_vars(e.left) | expr_vars(e.right)
    return frozenset()


# ============================================================
# 自动机与网络
# ============================================================

@dataclass(frozen=True)
class ClockConstraint:
    """c(clock) rel bound"""
    clock: str
    rel: Rel
    bound: Fraction

    def __post_init__(self):
        object.__setattr__(self, "rel", Rel(self.rel))
        object.__setattr__(self, "bound", Fraction(self.bound))
        if self.bound < 0:
            raise NetworkError(f"时钟约束常数不能为负: {self}")

    def sort_key(self) -> tuple:
        return self.clock, list(Rel).index(self.rel), self.bound

    def __str__(self) -> str:
        return f"{self.clock} {self.rel.value} {format_rational(self.bound)}"


@dataclass(frozen=True)
class Update:
    var: str
    expr: Expr

    def __str__(self) -> str:
        return f"{self.var} := {self.expr}"


@dataclass(frozen=True)
class Transition:
    """⟨source, cond, guard, updates, resets, target⟩，label 仅用于诊断"""
    source: str
    target: str
    cond: BExpr = TRUE
    guard: Tuple[ClockConstraint, ...] = ()
    updates: Tuple[Update, ...] = ()
    resets: Tuple[str, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "guard", tuple(self.guard))
        object.__setattr__(self, "updates", tuple(self.updates))
        object.__setattr__(self, "resets", tuple(self.resets))
        seen = set()
        for update in self.updates:
            if update.var in seen:
                raise NetworkError(f"迁移 {self.label or self.source} 对变量 {update.var} 更新了两次")
            seen.add(update.var)


@dataclass(frozen=True)
class Automaton:
    name: str
    locations: Tuple[str, ...]
    initial: str
    urgent: FrozenSet[str] = frozenset()
    transitions: Tuple[Transition, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "urgent", frozenset(self.urgent))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        known = set(self.locations)
        if len(known) != len(self.locations):
            raise NetworkError(f"自动机 {self.name} 的位置重复")
        if self.initial not in known:
            raise NetworkError(f"自动机 {self.name} 的初始位置 {self.initial} 不存在")
        if not self.urgent <= known:
            raise NetworkError(f"自动机 {self.name} 的紧急位置不存在: {sorted(self.urgent - known)}")
        for t in self.transitions:
            for end in (t.source, t.target):
                if end not in known:
                    raise NetworkError(f"自动机 {self.name} 的迁移 {t.label} 引用了未知位置 {end}")


@dataclass(frozen=True)
class VarDecl:
    """有界整数变量 [lo, hi]，初值 init"""
    id: str
    lo: int
    hi: int
    init: int = 0

    def __post_init__(self):
        if self.lo > self.hi:
            raise NetworkError(f"变量 {self.id} 的范围为空: [{self.lo}, {self.hi}]")
        if not self.lo <= self.init <= self.hi:
            raise NetworkError(f"变量 {self.id} 的初值 {self.init} 超出范围")


@dataclass(frozen=True)
class Network:
    """时间自动机网络：自动机有序列表，共享整数变量和时钟"""
    automata: Tuple[Automaton, ...]
    vars: Tuple[VarDecl, ...] = ()
    clocks: Tuple[str, ...] = ()
    _decls: Dict[str, VarDecl] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "automata", tuple(self.automata))
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "clocks", tuple(self.clocks))

        decls = {}
        for decl in self.vars:
            if decl.id in decls:
                raise NetworkError(f"变量重复声明: {decl.id}")
            decls[decl.id] = decl
        object.__setattr__(self, "_decls", decls)

        clocks = set(self.clocks)
        if len(clocks) != len(self.clocks):
            raise NetworkError("时钟重复声明")
        overlap = clocks & set(decls)
        if overlap:
            raise NetworkError(f"变量与时钟同名: {sorted(overlap)}")

        for index, automaton in enumerate(self.automata):
            for t in automaton.transitions:
                used = expr_vars(t.cond) | {u.var for u in t.updates}
                for u in t.updates:
                    used |= expr_vars(u.expr)
                unknown = sorted(used - set(decls))
                if unknown:
                    raise NetworkError(f"自动机 {index} 的迁移 {t.label} 引用了未声明的变量: {unknown}")
                unknown = sorted(({g.clock for g in t.guard} | set(t.resets)) - clocks)
                if unknown:
                    raise NetworkError(f"自动机 {index} 的迁移 {t.label} 引用了未声明的时钟: {unknown}")

    def decl(self, var: str) -> Optional[VarDecl]:
        return self._decls.get(var)

    def initial_configuration(self) -> "Configuration":
        return Configuration(
            locations=tuple(a.initial for a in self.automata),
            variables={d.id: d.init for d in self.vars},
            clocks={c: Fraction(0) for c in self.clocks},
        )

    @property
    def location_count(self) -> int:
        return sum(len(a.locations) for a in self.automata)

    @property
    def transition_count(self) -> int:
        return sum(len(a.transitions) for a in self.automata)


# ============================================================
# 配置与运行
# ============================================================

@dataclass(frozen=True)
class Configuration:
    """⟨L, v, c⟩；比较按值，key() 用于哈希"""
    locations: Tuple[str, ...]
    variables: Mapping[str, int]
    clocks: Mapping[str, Fraction]

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "variables", dict(self.variables))
        object.__setattr__(self, "clocks", {k: Fraction(v) for k, v in self.clocks.items()})

    __hash__ = None

    def key(self) -> tuple:
        return (
            self.locations,
            tuple(sorted(self.variables.items())),
            tuple(sorted(self.clocks.items())),
        )


@dataclass(frozen=True)
class DelayStep:
    delta: Fraction
    after: Configuration

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))


@dataclass(frozen=True)
class InternalStep:
    automaton: int
    transition: int
    after: Configuration


Step = Union[DelayStep, InternalStep]


@dataclass(frozen=True)
class Run:
    initial: Configuration
    steps: Tuple[Step, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def configurations(self) -> Iterator[Configuration]:
        yield self.initial
        for step in self.steps:
            yield step.after

    @property
    def final(self) -> Configuration:
        return self.steps[-1].after if self.steps else self.initial

    def prefix(self, n: int) -> "Run":
        return Run(self.initial, self.steps[:n])
