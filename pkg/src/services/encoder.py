"""
规划问题 → 时间自动机网络编码器

变量: vp.<p> (命题真值), lp.<p> (保护 p 的运行中动作数), aa (运行中动作数), ps (规划阶段)
时钟: 每个动作两个, ca.<a>.S / ca.<a>.E
自动机: [main, <a1>, ..., <aN>]，main 为第 0 个
"""

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Tuple

from src.automata.models import (
    Automaton,
    BExpr,
    BinOp,
    ClockConstraint,
    Cmp,
    Configuration,
    Const,
    Network,
    Rel,
    Transition,
    TRUE,
    Update,
    VarDecl,
    VarRef,
    conj,
    conjuncts,
    var_eq,
)
from src.automata.io import dump_json, expr_to_json, network_from_dict, network_to_dict
from src.planning.errors import ParseError
from src.planning.io import problem_from_dict, problem_to_dict
from src.planning.models import DurativeAction, PlanningProblem, SnapAction, SnapKind
from src.planning.semantics import mutex
from src.utils.rationals import format_rational, parse_rational

logger = logging.getLogger(__name__)

INIT_M = "init_M"
PLAN_M = "plan_M"
GOAL_M = "goal_M"

ACTION_LOCATIONS = ("inactive", "starting", "running", "ending")


class TransitionKind(str, Enum):
    E1M = "e1M"
    E2M = "e2M"
    LOOP = "cLoop"
    SE = "se"
    SE_PRIME = "se'"
    EE = "ee"
    EE_PRIME = "ee'"
    IE = "ie"


# 动作自动机中迁移的固定下标
ACTION_TRANSITIONS = (
    TransitionKind.SE,
    TransitionKind.SE_PRIME,
    TransitionKind.EE,
    TransitionKind.EE_PRIME,
    TransitionKind.IE,
)
MAIN_TRANSITIONS = (TransitionKind.E1M, TransitionKind.E2M, TransitionKind.LOOP)


class OwnClockPolicy(str, Enum):
    """互斥守卫排除哪些自身时钟：snap 只排除当前瞬时动作的时钟，action 排除所属动作的两个时钟"""
    SNAP = "snap"
    ACTION = "action"


class ExportFormat(str, Enum):
    INTERNAL = "internal"
    CHECKER_COMPAT = "checker-compat"


@dataclass(frozen=True)
class VarTable:
    vp: Dict[str, str]
    lp: Dict[str, str]
    aa: str = "aa"
    ps: str = "ps"

    def ids(self) -> List[str]:
        return list(self.vp.values()) + list(self.lp.values()) + [self.aa, self.ps]


@dataclass(frozen=True)
class ClockTable:
    start: Dict[str, str]
    end: Dict[str, str]

    def clock(self, action: str, kind: SnapKind) -> str:
        return self.start[action] if kind == SnapKind.START else self.end[action]

    def ids(self) -> List[str]:
        clocks = []
        for action in self.start:
            clocks += [self.start[action], self.end[action]]
        return clocks


@dataclass(frozen=True)
class EncodedNetwork:
    """编码结果：网络、符号表、动作顺序、迁移标签，以及编码时使用的问题和 ε"""
    network: Network
    vars: VarTable
    clocks: ClockTable
    action_order: Tuple[str, ...]
    labels: Dict[Tuple[int, int], TransitionKind]
    problem: PlanningProblem = field(compare=False)
    epsilon: Fraction = Fraction(0)
    strict_ee_guard: bool = False
    own_clock_policy: OwnClockPolicy = OwnClockPolicy.SNAP

    @property
    def initial(self) -> Configuration:
        """所有位置为初始位置，v ≡ 0，c ≡ 0"""
        return self.network.initial_configuration()

    @staticmethod
    def accepting(q: Configuration) -> bool:
        return q.locations[0] == GOAL_M

    def automaton_of(self, action: str) -> int:
        return self.action_order.index(action) + 1

    def transition_of(self, action: str, kind: TransitionKind) -> Tuple[int, int]:
        return self.automaton_of(action), ACTION_TRANSITIONS.index(kind)

    def main_transition(self, kind: TransitionKind) -> Tuple[int, int]:
        return 0, MAIN_TRANSITIONS.index(kind)

    def label_text(self, i: int, k: int) -> str:
        kind = self.labels[(i, k)]
        if i == 0:
            return kind.value
        return f"{kind.value}_{self.action_order[i - 1]}"


# ============================================================
# 符号表
# ============================================================

def encode_vars(problem: PlanningProblem) -> VarTable:
    return VarTable(
        vp={p: f"vp.{p}" for p in problem.props},
        lp={p: f"lp.{p}" for p in problem.props},
    )


def start_clock(action: str) -> str:
    return f"ca.{action}.S"


def end_clock(action: str) -> str:
    return f"ca.{action}.E"


def encode_clocks(problem: PlanningProblem) -> ClockTable:
    return ClockTable(
        start={a.name: start_clock(a.name) for a in problem.actions},
        end={a.name: end_clock(a.name) for a in problem.actions},
    )


def _var_decls(problem: PlanningProblem, table: VarTable) -> Tuple[VarDecl, ...]:
    n = len(problem.actions)
    decls = [VarDecl(table.vp[p], 0, 1) for p in problem.props]
    decls += [VarDecl(table.lp[p], 0, n) for p in problem.props]
    decls += [VarDecl(table.aa, 0, n), VarDecl(table.ps, 0, 2)]
    return tuple(decls)


# ============================================================
# 守卫、条件与更新
# ============================================================

def _sorted_guard(constraints) -> Tuple[ClockConstraint, ...]:
    return tuple(sorted(set(constraints), key=ClockConstraint.sort_key))


def mutex_guards(
    action: DurativeAction,
    kind: SnapKind,
    problem: PlanningProblem,
    epsilon: Fraction = Fraction(0),
    own_clock_policy: OwnClockPolicy = OwnClockPolicy.SNAP,
) -> Tuple[ClockConstraint, ...]:
    """
    瞬时动作 action/kind 的互斥守卫

    对每个与之互斥的瞬时动作 g，要求 g 的时钟 > 0，ε > 0 时还要求 ≥ ε。
    """
    h = action.snap(kind)
    clocks = encode_clocks(problem)
    epsilon = Fraction(epsilon)
    constraints = []
    for other in problem.actions:
        for other_kind in (SnapKind.START, SnapKind.END):
            if other.name == action.name:
                if other_kind == kind or own_clock_policy == OwnClockPolicy.ACTION:
                    continue
            if not mutex(h, other.snap(other_kind)):
                continue
            clock = clocks.clock(other.name, other_kind)
            constraints.append(ClockConstraint(clock, Rel.GT, Fraction(0)))
            if epsilon > 0:
                constraints.append(ClockConstraint(clock, Rel.GE, epsilon))
    return _sorted_guard(constraints)


def sat_dur_bounds(action: DurativeAction) -> Tuple[ClockConstraint, ...]:
    clock = start_clock(action.name)
    lower = ClockConstraint(clock, Rel.GT if action.lower.strict else Rel.GE, action.lower.value)
    upper = ClockConstraint(clock, Rel.LT if action.upper.strict else Rel.LE, action.upper.value)
    return lower, upper


def prop_effs(h: SnapAction, table: VarTable, problem: PlanningProblem) -> Tuple[Update, ...]:
    """删除（且不被添加）置 0，添加置 1；添加优先"""
    updates = []
    for p in problem.props:
        if p in h.adds:
            updates.append(Update(table.vp[p], Const(1)))
        elif p in h.dels:
            updates.append(Update(table.vp[p], Const(0)))
    return tuple(updates)


def pre_sat(h: SnapAction, table: VarTable, problem: PlanningProblem) -> BExpr:
    return conj(*(var_eq(table.vp[p], 1) for p in problem.props if p in h.pres))


def eff_sat_invs(h: SnapAction, table: VarTable, problem: PlanningProblem) -> BExpr:
    removed = h.dels - h.adds
    return conj(*(var_eq(table.lp[p], 0) for p in problem.props if p in removed))


def _increment(var: str, amount: int) -> Update:
    op = "+" if amount > 0 else "-"
    return Update(var, BinOp(op, VarRef(var), Const(abs(amount))))


# ============================================================
# 自动机
# ============================================================

def build_main_automaton(problem: PlanningProblem, table: VarTable = None) -> Automaton:
    table = table or encode_vars(problem)
    e1 = Transition(
        source=INIT_M,
        target=PLAN_M,
        cond=TRUE,
        updates=(Update(table.ps, Const(1)),) + tuple(
            Update(table.vp[p], Const(1)) for p in problem.props if p in problem.init
        ),
        label=TransitionKind.E1M.value,
    )
    e2 = Transition(
        source=PLAN_M,
        target=GOAL_M,
        cond=conj(var_eq(table.aa, 0), *(var_eq(table.vp[p], 1) for p in problem.props if p in problem.goal)),
        updates=(Update(table.ps, Const(2)),),
        label=TransitionKind.E2M.value,
    )
    loop = Transition(source=GOAL_M, target=GOAL_M, label=TransitionKind.LOOP.value)
    return Automaton(
        name="main",
        locations=(INIT_M, PLAN_M, GOAL_M),
        initial=INIT_M,
        urgent=frozenset({INIT_M}),
        transitions=(e1, e2, loop),
    )


def build_action_automaton(
    action: DurativeAction,
    problem: PlanningProblem,
    epsilon: Fraction = Fraction(0),
    strict_ee_guard: bool = False,
    own_clock_policy: OwnClockPolicy = OwnClockPolicy.SNAP,
) -> Automaton:
    table = encode_vars(problem)
    clocks = encode_clocks(problem)
    name = action.name
    inactive, starting, running, ending = (f"{name}.{loc}" for loc in ACTION_LOCATIONS)
    planning = var_eq(table.ps, 1)
    protected = [p for p in problem.props if p in action.over_all]

    start_guard = mutex_guards(action, SnapKind.START, problem, epsilon, own_clock_policy)
    end_guard = mutex_guards(action, SnapKind.END, problem, epsilon, own_clock_policy)
    durations = sat_dur_bounds(action)
    ee_guard = _sorted_guard((start_guard if strict_ee_guard else end_guard) + durations)

    se = Transition(
        source=inactive,
        target=starting,
        cond=conj(planning, pre_sat(action.start, table, problem), eff_sat_invs(action.start, table, problem)),
        guard=start_guard,
        updates=prop_effs(action.start, table, problem) + (_increment(table.aa, 1),),
        resets=(clocks.start[name],),
        label=f"se_{name}",
    )
    se_prime = Transition(
        source=starting,
        target=running,
        cond=conj(planning, *(var_eq(table.vp[p], 1) for p in protected)),
        updates=tuple(_increment(table.lp[p], 1) for p in protected),
        label=f"se'_{name}",
    )
    ee = Transition(
        source=running,
        target=ending,
        cond=planning,
        guard=ee_guard,
        updates=tuple(_increment(table.lp[p], -1) for p in protected),
        resets=(clocks.end[name],),
        label=f"ee_{name}",
    )
    ee_prime = Transition(
        source=ending,
        target=inactive,
        cond=conj(planning, pre_sat(action.end, table, problem), eff_sat_invs(action.end, table, problem)),
        updates=prop_effs(action.end, table, problem) + (_increment(table.aa, -1),),
        label=f"ee'_{name}",
    )
    ie = Transition(
        source=starting,
        target=ending,
        cond=planning,
        guard=_sorted_guard(end_guard + durations),
        resets=(clocks.end[name],),
        label=f"ie_{name}",
    )
    return Automaton(
        name=name,
        locations=(inactive, starting, running, ending),
        initial=inactive,
        urgent=frozenset({starting, ending}),
        transitions=(se, se_prime, ee, ee_prime, ie),
    )


def encode(
    problem: PlanningProblem,
    epsilon: Fraction = Fraction(0),
    strict_ee_guard: bool = False,
    own_clock_policy: OwnClockPolicy = OwnClockPolicy.SNAP,
) -> EncodedNetwork:
    """
    编码规划问题

    Args:
        problem: 规划问题
        epsilon: 互斥瞬时动作的最小间隔
        strict_ee_guard: ee 迁移的互斥守卫使用开始瞬时动作
        own_clock_policy: 互斥守卫排除自身时钟的方式

    Returns:
        EncodedNetwork
    """
    epsilon = Fraction(epsilon)
    own_clock_policy = OwnClockPolicy(own_clock_policy)
    table = encode_vars(problem)
    clocks = encode_clocks(problem)

    automata = [build_main_automaton(problem, table)]
    labels = {(0, k): kind for k, kind in enumerate(MAIN_TRANSITIONS)}
    for i, action in enumerate(problem.actions, 1):
        automata.append(build_action_automaton(action, problem, epsilon, strict_ee_guard, own_clock_policy))
        labels.update({(i, k): kind for k, kind in enumerate(ACTION_TRANSITIONS)})

    network = Network(
        automata=tuple(automata),
        vars=_var_decls(problem, table),
        clocks=tuple(clocks.ids()),
    )
    logger.info(
        f"编码完成: {len(network.automata)} 个自动机, {len(network.vars)} 个变量, "
        f"{len(network.clocks)} 个时钟, {network.location_count} 个位置, {network.transition_count} 条迁移"
    )
    return EncodedNetwork(
        network=network,
        vars=table,
        clocks=clocks,
        action_order=tuple(a.name for a in problem.actions),
        labels=labels,
        problem=problem,
        epsilon=epsilon,
        strict_ee_guard=strict_ee_guard,
        own_clock_policy=own_clock_policy,
    )


# ============================================================
# 导出
# ============================================================

def symbols_to_dict(enc: EncodedNetwork) -> dict:
    """编码符号到问题实体的映射"""
    return {
        "epsilon": format_rational(enc.epsilon),
        "strict_ee_guard": enc.strict_ee_guard,
        "own_clock_policy": enc.own_clock_policy.value,
        "vars": {
            **{v: {"kind": "vp", "prop": p} for p, v in enc.vars.vp.items()},
            **{v: {"kind": "lp", "prop": p} for p, v in enc.vars.lp.items()},
            enc.vars.aa: {"kind": "aa"},
            enc.vars.ps: {"kind": "ps"},
        },
        "clocks": {
            clock: {"action": action, "snap": kind.value}
            for action in enc.action_order
            for kind, clock in ((SnapKind.START, enc.clocks.start[action]), (SnapKind.END, enc.clocks.end[action]))
        },
        "automata": ["main"] + list(enc.action_order),
        "acceptance": f"L[0] == {GOAL_M}",
        "problem": problem_to_dict(enc.problem),
    }


def export_network(enc: EncodedNetwork, fmt: ExportFormat = ExportFormat.INTERNAL) -> bytes:
    fmt = ExportFormat(fmt)
    if fmt == ExportFormat.INTERNAL:
        data = network_to_dict(enc.network)
        data["symbols"] = symbols_to_dict(enc)
    else:
        data = checker_compat_dict(enc)
    return dump_json(data).encode("utf-8")


def import_network(data: bytes, source: str = "") -> EncodedNetwork:
    """读取 internal 格式导出，重建 EncodedNetwork"""
    try:
        raw = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"无法解析导出的网络: {e}", source=source) from e
    if not isinstance(raw, dict) or "symbols" not in raw:
        raise ParseError("导出文件缺少 symbols", source=source)
    symbols = raw["symbols"]
    network = network_from_dict(raw, source)
    problem = problem_from_dict(symbols["problem"], source)

    labels = {(0, k): kind for k, kind in enumerate(MAIN_TRANSITIONS)}
    for i in range(1, len(network.automata)):
        labels.update({(i, k): kind for k, kind in enumerate(ACTION_TRANSITIONS)})
    return EncodedNetwork(
        network=network,
        vars=encode_vars(problem),
        clocks=encode_clocks(problem),
        action_order=tuple(symbols["automata"][1:]),
        labels=labels,
        problem=problem,
        epsilon=parse_rational(symbols["epsilon"]),
        strict_ee_guard=bool(symbols.get("strict_ee_guard", False)),
        own_clock_policy=OwnClockPolicy(symbols.get("own_clock_policy", "snap")),
    )


_UNSAFE = re.compile(r"[^A-Za-z0-9_]")


def _sanitizer():
    """返回 sanitize(kind, name)：同类同名映射到同一标识符，所有类别共用一个已占用集合"""
    assigned: Dict[Tuple[str, str], str] = {}
    used = set()

    def sanitize(kind: str, name: str) -> str:
        if (kind, name) in assigned:
            return assigned[(kind, name)]
        base = _UNSAFE.sub("_", name) or "_"
        if base[0].isdigit():
            base = f"_{base}"
        candidate, n = base, 2
        while candidate in used:
            candidate = f"{base}_{n}"
            n += 1
        used.add(candidate)
        assigned[(kind, name)] = candidate
        return candidate

    return sanitize


def _expr_text(data: dict, sanitize) -> str:
    if "var" in data:
        return sanitize("var", data["var"])
    if "const" in data:
        return data["const"]
    return f"({_expr_text(data['left'], sanitize)} {data['op']} {_expr_text(data['right'], sanitize)})"


def checker_compat_dict(enc: EncodedNetwork) -> dict:
    """按模型检查器输入的习惯整理网络：合法标识符、带范围的变量声明、节点下标"""
    sanitize = _sanitizer()
    net = enc.network
    # 主自动机及其位置先占位，公式中的 goal_M 保持原名
    if net.automata:
        sanitize("automaton:0", net.automata[0].name)
        for loc in net.automata[0].locations:
            sanitize("location", loc)
    automaton_names = [sanitize(f"automaton:{i}", a.name) for i, a in enumerate(net.automata)]
    automata = []
    for automaton, automaton_name in zip(net.automata, automaton_names):
        index = {loc: n for n, loc in enumerate(automaton.locations)}
        nodes = [{"id": n, "name": sanitize("location", loc)} for n, loc in enumerate(automaton.locations)]
        edges = []
        for t in automaton.transitions:
            parts = []
            for c in conjuncts(t.cond):
                if isinstance(c, Cmp):
                    left = _expr_text(expr_to_json(c.left), sanitize)
                    right = _expr_text(expr_to_json(c.right), sanitize)
                    parts.append(f"{left} {c.rel.value} {right}")
                else:
                    parts.append(str(c))
            parts += [f"{sanitize('clock', g.clock)} {g.rel.value} {format_rational(g.bound)}" for g in t.guard]
            updates = [f"{sanitize('var', u.var)} = {_expr_text(expr_to_json(u.expr), sanitize)}" for u in t.updates]
            updates += [f"{sanitize('clock', c)} = 0" for c in t.resets]
            edges.append({
                "source": index[t.source],
                "target": index[t.target],
                "guard": " && ".join(parts) if parts else "true",
                "update": ", ".join(updates),
                "label": _UNSAFE.sub("_", t.label),
            })
        automata.append({
            "name": automaton_name,
            "nodes": nodes,
            "initial": index[automaton.initial],
            "urgent": [index[loc] for loc in automaton.locations if loc in automaton.urgent],
            "edges": edges,
        })
    return {
        "vars": [f"{sanitize('var', d.id)}[{d.lo}:{d.hi}]" for d in net.vars],
        "clocks": [sanitize("clock", c) for c in net.clocks],
        "automata": automata,
        "formula": f"E<> L[0] == {GOAL_M}",
    }
