"""时间自动机网络语义测试"""

import random
from fractions import Fraction

import pytest

from src.automata.errors import (
    ConditionFalse,
    DivisionByZero,
    GuardFalse,
    LocationMismatch,
    NegativeDelay,
    NetworkError,
    NonIntegerUpdate,
    TransitionError,
    UnboundVariable,
    UrgentLocationBlocksDelay,
    VariableOutOfBounds,
)
from src.automata.models import (
    FALSE,
    TRUE,
    And,
    Automaton,
    BinOp,
    ClockConstraint,
    Cmp,
    Configuration,
    Const,
    DelayStep,
    InternalStep,
    Network,
    Rel,
    Run,
    Transition,
    Update,
    VarDecl,
    VarRef,
    conj,
    conjuncts,
    var_eq,
)
from src.automata.semantics import (
    at_location,
    bval,
    ccval,
    delay,
    ef_goal,
    eval_expr,
    internal,
    run_check,
    successors,
)
from src.services.encoder import encode
from src.utils.generator import random_problem
from tests.conftest import random_walk
from tests.oracles import random_cmp, random_expr, tree_value, truth_value


def _swap_network(updates=None) -> Network:
    """
    两个自动机:
        A: l0(紧急) -swap-> l1 -tick[c >= 1]-> l2
        B: m0 -bump[x == 1]-> m1
    """
    swap = Transition(
        source="l0",
        target="l1",
        updates=updates or (Update("x", VarRef("y")), Update("y", VarRef("x"))),
        label="swap",
    )
    tick = Transition(
        source="l1",
        target="l2",
        guard=(ClockConstraint("c", Rel.GE, 1),),
        resets=("c",),
        label="tick",
    )
    bump = Transition(
        source="m0",
        target="m1",
        cond=var_eq("x", 1),
        updates=(Update("x", BinOp("+", VarRef("x"), Const(1))),),
        label="bump",
    )
    return Network(
        automata=(
            Automaton("A", ("l0", "l1", "l2"), "l0", frozenset({"l0"}), (swap, tick)),
            Automaton("B", ("m0", "m1"), "m0", frozenset(), (bump,)),
        ),
        vars=(VarDecl("x", 0, 2), VarDecl("y", 0, 2, init=1)),
        clocks=("c",),
    )


@pytest.fixture
def net():
    return _swap_network()


def _run(net, *moves) -> Run:
    """按 ("d", δ) / ("i", i, k) 执行并记录"""
    q0 = net.initial_configuration()
    q = q0
    steps = []
    for move in moves:
        if move[0] == "d":
            q = delay(net, q, Fraction(move[1]))
            steps.append(DelayStep(Fraction(move[1]), q))
        else:
            q = internal(net, q, move[1], move[2])
            steps.append(InternalStep(move[1], move[2], q))
    return Run(q0, tuple(steps))


class TestExpressions:
    def test_arithmetic(self):
        e = BinOp("/", BinOp("+", VarRef("x"), Const(1)), Const(4))
        assert eval_expr({"x": 1}, e) == Fraction(1, 2)

    def test_unbound(self):
        with pytest.raises(UnboundVariable) as info:
            eval_expr({}, VarRef("z"))
        assert info.value.var == "z"

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZero):
            eval_expr({"x": 0}, BinOp("/", Const(1), VarRef("x")))

    def test_unknown_operator(self):
        with pytest.raises(NetworkError):
            BinOp("%", Const(1), Const(2))

    def test_and_does_not_short_circuit(self):
        b = And(Cmp(Rel.EQ, Const(0), Const(1)), var_eq("missing", 0))
        with pytest.raises(UnboundVariable):
            bval({}, b)

    def test_empty_conjunction_is_true(self):
        assert conj() == TRUE
        assert conj(TRUE, TRUE) == TRUE
        assert bval({}, conj())
        assert not bval({}, FALSE)

    def test_conjuncts_flatten(self):
        parts = (var_eq("x", 1), var_eq("y", 0), var_eq("z", 2))
        assert conjuncts(conj(*parts)) == parts

    def test_matches_tree_oracle(self):
        rng = random.Random(5)
        names = ["x", "y", "z"]
        for _ in range(300):
            v = {n: rng.randint(-3, 3) for n in names}
            e = random_expr(rng, names)
            expected = tree_value(v, e)
            if expected is None:
                with pytest.raises(DivisionByZero):
                    eval_expr(v, e)
            else:
                assert eval_expr(v, e) == expected

    def test_conjunction_matches_oracle(self):
        rng = random.Random(6)
        names = ["x", "y"]
        checked = 0
        while checked < 200:
            v = {n: rng.randint(-2, 2) for n in names}
            b = conj(*(random_cmp(rng, names) for _ in range(3)))
            try:
                expected = truth_value(v, b)
            except ZeroDivisionError:
                continue
            assert bval(v, b) == expected
            checked += 1


class TestClockConstraints:
    def test_conjunction(self):
        g = (ClockConstraint("c", Rel.GT, 0), ClockConstraint("c", Rel.LE, 2))
        assert ccval({"c": Fraction(1)}, g)
        assert not ccval({"c": Fraction(0)}, g)
        assert not ccval({"c": Fraction(5, 2)}, g)

    def test_empty_guard(self):
        assert ccval({}, ())

    def test_negative_bound(self):
        with pytest.raises(NetworkError):
            ClockConstraint("c", Rel.GE, -1)


class TestNetworkStructure:
    def test_double_update(self):
        with pytest.raises(NetworkError):
            Transition("a", "b", updates=(Update("x", Const(0)), Update("x", Const(1))))

    def test_unknown_variable(self):
        t = Transition("a", "a", cond=var_eq("ghost", 0))
        with pytest.raises(NetworkError):
            Network((Automaton("A", ("a",), "a", transitions=(t,)),))

    def test_unknown_clock(self):
        t = Transition("a", "a", resets=("c",))
        with pytest.raises(NetworkError):
            Network((Automaton("A", ("a",), "a", transitions=(t,)),))

    def test_unknown_location(self):
        with pytest.raises(NetworkError):
            Automaton("A", ("a",), "b")

    def test_initial_configuration(self, net):
        q = net.initial_configuration()
        assert q.locations == ("l0", "m0")
        assert q.variables == {"x": 0, "y": 1}
        assert q.clocks == {"c": 0}

    def test_counts(self, net):
        assert net.location_count == 5
        assert net.transition_count == 3


class TestDelay:
    def test_urgent_blocks_positive_delay(self, net):
        with pytest.raises(UrgentLocationBlocksDelay) as info:
            delay(net, net.initial_configuration(), Fraction(1))
        assert info.value.automaton == 0

    def test_zero_delay_in_urgent_location(self, net):
        q = net.initial_configuration()
        assert delay(net, q, Fraction(0)) == q

    def test_negative(self, net):
        with pytest.raises(NegativeDelay):
            delay(net, net.initial_configuration(), Fraction(-1))

    def test_shifts_all_clocks(self, net):
        q = internal(net, net.initial_configuration(), 0, 0)
        q = delay(net, q, Fraction(3, 4))
        assert q.clocks == {"c": Fraction(3, 4)}
        assert q.locations == ("l1", "m0")


class TestInternal:
    def test_simultaneous_updates(self, net):
        q = internal(net, net.initial_configuration(), 0, 0)
        assert q.variables == {"x": 1, "y": 0}

    def test_update_order_irrelevant(self):
        forward = _swap_network()
        backward = _swap_network((Update("y", VarRef("x")), Update("x", VarRef("y"))))
        q1 = internal(forward, forward.initial_configuration(), 0, 0)
        q2 = internal(backward, backward.initial_configuration(), 0, 0)
        assert q1 == q2

    def test_does_not_mutate_input(self, net):
        q = net.initial_configuration()
        internal(net, q, 0, 0)
        assert q.variables == {"x": 0, "y": 1}

    def test_location_mismatch(self, net):
        with pytest.raises(LocationMismatch):
            internal(net, net.initial_configuration(), 0, 1)

    def test_condition_false(self, net):
        with pytest.raises(ConditionFalse) as info:
            internal(net, net.initial_configuration(), 1, 0)
        assert "x == 1" in info.value.condition

    def test_guard_false(self, net):
        q = internal(net, net.initial_configuration(), 0, 0)
        with pytest.raises(GuardFalse):
            internal(net, q, 0, 1)

    def test_reset(self, net):
        q = internal(net, net.initial_configuration(), 0, 0)
        q = internal(net, delay(net, q, Fraction(3, 2)), 0, 1)
        assert q.clocks["c"] == 0
        assert q.locations[0] == "l2"

    def test_out_of_bounds(self):
        t = Transition("a", "a", updates=(Update("x", BinOp("+", VarRef("x"), Const(2))),))
        n = Network((Automaton("A", ("a",), "a", transitions=(t,)),), (VarDecl("x", 0, 1),))
        with pytest.raises(VariableOutOfBounds):
            internal(n, n.initial_configuration(), 0, 0)

    def test_non_integer_update(self):
        t = Transition("a", "a", updates=(Update("x", BinOp("/", Const(1), Const(2))),))
        n = Network((Automaton("A", ("a",), "a", transitions=(t,)),), (VarDecl("x", 0, 1),))
        with pytest.raises(NonIntegerUpdate):
            internal(n, n.initial_configuration(), 0, 0)

    def test_index_out_of_range(self, net):
        with pytest.raises(TransitionError):
            internal(net, net.initial_configuration(), 2, 0)
        with pytest.raises(TransitionError):
            internal(net, net.initial_configuration(), 0, 7)

    def test_successors(self, net):
        found = [(i, k) for i, k, _ in successors(net, net.initial_configuration())]
        assert found == [(0, 0)]


class TestRunCheck:
    def test_zero_step_run(self, net):
        assert run_check(net, Run(net.initial_configuration()))

    def test_accepts_recorded_run(self, net):
        run = _run(net, ("i", 0, 0), ("d", 0), ("i", 1, 0), ("d", "3/2"), ("i", 0, 1))
        replay = run_check(net, run)
        assert replay
        assert replay.steps_replayed == 5

    def test_prefix_closed(self, net):
        run = _run(net, ("i", 0, 0), ("d", 1), ("i", 0, 1))
        for n in range(len(run) + 1):
            assert run_check(net, run.prefix(n))

    def test_perturbed_clock_rejected(self, net):
        run = _run(net, ("i", 0, 0), ("d", 1), ("i", 0, 1))
        bad = run.steps[1].after
        perturbed = Configuration(bad.locations, bad.variables, {"c": bad.clocks["c"] + Fraction(1, 7)})
        steps = list(run.steps)
        steps[1] = DelayStep(steps[1].delta, perturbed)
        replay = run_check(net, Run(run.initial, tuple(steps)))
        assert not replay
        assert replay.failed_step == 1

    def test_disabled_step_rejected(self, net):
        q0 = net.initial_configuration()
        run = Run(q0, (DelayStep(Fraction(1), q0),))
        replay = run_check(net, run)
        assert not replay
        assert replay.failed_step == 0

    def test_malformed_initial(self, net):
        q = Configuration(("l0",), {"x": 0, "y": 1}, {"c": 0})
        assert not run_check(net, Run(q))

    def test_ef_goal(self, net):
        run = _run(net, ("i", 0, 0), ("d", 1), ("i", 0, 1))
        assert ef_goal(run, at_location(0, "l2"))
        assert not ef_goal(run.prefix(2), at_location(0, "l2"))


class TestProperties:
    def test_delay_additive(self, net):
        rng = random.Random(31)
        q = internal(net, net.initial_configuration(), 0, 0)
        for _ in range(100):
            d1 = Fraction(rng.randint(0, 9), rng.randint(1, 5))
            d2 = Fraction(rng.randint(0, 9), rng.randint(1, 5))
            assert delay(net, delay(net, q, d1), d2) == delay(net, q, d1 + d2)

    def test_zero_delays_compose_in_urgent_location(self, net):
        q = net.initial_configuration()
        assert delay(net, delay(net, q, Fraction(0)), Fraction(0)) == delay(net, q, Fraction(0)) == q

    def test_delay_additive_on_encoded_networks(self):
        rng = random.Random(32)
        for _ in range(20):
            net = encode(random_problem(rng, max_props=3, max_actions=3)).network
            for q in random_walk(rng, net, net.initial_configuration()):
                d1, d2 = Fraction(rng.randint(0, 6), 4), Fraction(rng.randint(0, 6), 3)
                try:
                    expected = delay(net, q, d1 + d2)
                except UrgentLocationBlocksDelay:
                    continue
                assert delay(net, delay(net, q, d1), d2) == expected

    def test_internal_frame(self):
        rng = random.Random(33)
        checked = 0
        for _ in range(30):
            net = encode(random_problem(rng, max_props=4, max_actions=3)).network
            for q in random_walk(rng, net, net.initial_configuration()):
                for i, k, after in successors(net, q):
                    t = net.automata[i].transitions[k]
                    updated = {u.var for u in t.updates}
                    assert after.locations[i] == t.target
                    assert all(after.locations[j] == q.locations[j] for j in range(len(q.locations)) if j != i)
                    assert all(after.variables[v] == q.variables[v] for v in q.variables if v not in updated)
                    assert all(after.clocks[c] == 0 for c in t.resets)
                    assert all(after.clocks[c] == q.clocks[c] for c in q.clocks if c not in t.resets)
                    checked += 1
        assert checked > 100

    @pytest.mark.parametrize("rel", [Rel.GE, Rel.GT])
    def test_lower_bound_guard_monotone(self, rel):
        rng = random.Random(34)
        for _ in range(300):
            c = Fraction(rng.randint(0, 20), rng.randint(1, 4))
            d = Fraction(rng.randint(0, 20), rng.randint(1, 4))
            delta = Fraction(rng.randint(0, 8), rng.randint(1, 4))
            guard = (ClockConstraint("x", rel, d),)
            if ccval({"x": c}, guard):
                assert ccval({"x": c + delta}, guard)

    @pytest.mark.parametrize("rel", [Rel.LE, Rel.LT])
    def test_upper_bound_guard_antitone(self, rel):
        rng = random.Random(35)
        for _ in range(300):
            c = Fraction(rng.randint(0, 20), rng.randint(1, 4))
            d = Fraction(rng.randint(0, 20), rng.randint(1, 4))
            delta = Fraction(rng.randint(0, 8), rng.randint(1, 4))
            guard = (ClockConstraint("x", rel, d),)
            if ccval({"x": c + delta}, guard):
                assert ccval({"x": c}, guard)
