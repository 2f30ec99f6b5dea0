"""计划有效性语义测试"""

import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest

from src.planning.errors import ProblemError, ResolutionError
from src.planning.models import (
    DurationBound,
    DurativeAction,
    Plan,
    PlanningProblem,
    PlanStep,
    SnapAction,
    SnapKind,
    TimedSnap,
)
from src.planning.semantics import (
    Clause,
    dur_c_sat,
    effects_at,
    htps,
    induced_parallel_plan,
    invs_at,
    mutex,
    no_self_overlap,
    self_overlaps,
    separation_ok,
    snaps_at,
    state_sequence,
    validate_plan,
)
from src.utils.generator import random_duration, random_plan, random_problem, with_reachable_goal
from tests.conftest import CLOSE_DOOR, FIG4_STATES, MOVE, OPEN_DOOR, PICK_UP
from tests.oracles import mutex_by_enumeration, violated_clauses


def _action(name, start=SnapAction(), end=SnapAction(), over_all=(), lower=0, upper=0, **strict):
    return DurativeAction(
        name=name,
        start=start,
        end=end,
        over_all=frozenset(over_all),
        lower=DurationBound(Fraction(lower), strict.get("lower_strict", False)),
        upper=DurationBound(Fraction(upper), strict.get("upper_strict", False)),
    )


class TestModels:
    def test_negative_start_time_rejected(self):
        with pytest.raises(ValueError):
            PlanStep("a", Fraction(-1), Fraction(1))

    def test_negative_duration_accepted_at_construction(self):
        assert PlanStep("a", Fraction(1), Fraction(-1)).end == 0

    def test_duplicate_proposition(self):
        with pytest.raises(ProblemError):
            PlanningProblem(("p", "p"), ())

    def test_unknown_proposition_in_action(self):
        with pytest.raises(ProblemError):
            PlanningProblem(("p",), (_action("a", start=SnapAction.of(pres=["q"])),))

    def test_unknown_goal_proposition(self):
        with pytest.raises(ProblemError):
            PlanningProblem(("p",), (), goal=frozenset({"q"}))

    def test_lower_above_upper(self):
        with pytest.raises(ProblemError):
            _action("a", lower=3, upper=2)

    def test_duplicate_action(self):
        with pytest.raises(ProblemError):
            PlanningProblem((), (_action("a"), _action("a")))

    def test_lookup(self, robots_problem):
        assert robots_problem.has_action(MOVE)
        assert robots_problem.action("nope") is None
        assert robots_problem.action_index(PICK_UP) == 2


class TestMutex:
    def test_end_adds_what_start_requires(self, robots_problem):
        door_end = robots_problem.action(OPEN_DOOR).end
        pick_start = robots_problem.action(PICK_UP).start
        assert mutex(door_end, pick_start)
        assert mutex(pick_start, door_end)

    def test_unrelated_snaps(self, robots_problem):
        assert not mutex(robots_problem.action(OPEN_DOOR).end, robots_problem.action(MOVE).start)

    def test_shared_adds_not_mutex(self):
        a = SnapAction.of(adds=["p"])
        assert not mutex(a, a)

    def test_matches_enumeration(self):
        rng = random.Random(3)
        props = ["p", "q", "r"]

        def snap():
            return SnapAction.of(*(frozenset(p for p in props if rng.random() < 0.4) for _ in range(3)))

        for _ in range(300):
            a, b = snap(), snap()
            assert mutex(a, b) == mutex_by_enumeration(a, b)
            assert mutex(a, b) == mutex(b, a)


class TestDurations:
    def test_move_bounds(self, robots_problem):
        assert dur_c_sat(robots_problem.action(MOVE), Fraction(3))

    def test_open_door_exact(self, robots_problem):
        door = robots_problem.action(OPEN_DOOR)
        assert dur_c_sat(door, Fraction(3))
        assert not dur_c_sat(door, Fraction(5, 2))

    def test_strict_bounds(self):
        a = _action("a", lower=1, upper=2, lower_strict=True, upper_strict=True)
        assert not dur_c_sat(a, Fraction(1))
        assert dur_c_sat(a, Fraction(3, 2))
        assert not dur_c_sat(a, Fraction(2))


class TestHappenings:
    def test_induced_plan_of_schedule(self, fig4_plan):
        snaps = induced_parallel_plan(fig4_plan)
        assert len(snaps) == 8
        assert TimedSnap(Fraction(3), OPEN_DOOR, SnapKind.END) in snaps
        assert TimedSnap(Fraction(3), MOVE, SnapKind.START) in snaps
        assert TimedSnap(Fraction(11), CLOSE_DOOR, SnapKind.END) in snaps

    def test_htps_strictly_increasing(self, fig4_plan):
        assert htps(fig4_plan) == [0, 3, 4, 5, 8, 11]

    def test_htps_deduplicates(self):
        plan = Plan((PlanStep("a", 2, 3), PlanStep("b", 2, 0)))
        assert htps(plan) == [2, 5]

    def test_empty_plan(self):
        assert htps(Plan()) == []

    def test_snaps_at(self, fig4_plan):
        assert [(s.action, s.kind) for s in snaps_at(fig4_plan, Fraction(8))] == [
            (CLOSE_DOOR, SnapKind.START),
            (MOVE, SnapKind.END),
        ]

    def test_effects_at_door_end(self, robots_problem, fig4_plan):
        adds, dels = effects_at(robots_problem, fig4_plan, Fraction(3))
        assert {"idle_rb2", "open_d"} <= adds
        assert dels == {"idle_rb1", "in_rb1_rm1"}

    def test_invariants(self, robots_problem, fig4_plan):
        assert invs_at(robots_problem, fig4_plan, Fraction(3)) == {"in_rb2_rm1"}
        assert invs_at(robots_problem, fig4_plan, Fraction(5)) == {"open_d", "in_rb2_rm1"}
        assert invs_at(robots_problem, fig4_plan, Fraction(0)) == frozenset()


class TestStateSequence:
    def test_hand_simulation(self, robots_problem, fig4_plan):
        states = state_sequence(robots_problem, fig4_plan)
        assert [set(s) for s in states.states] == FIG4_STATES

    def test_length(self, robots_problem, fig4_plan):
        assert len(state_sequence(robots_problem, fig4_plan)) == len(htps(fig4_plan)) + 1

    def test_add_wins_over_delete(self):
        a = _action("a", start=SnapAction.of(adds=["p"], dels=["p"]))
        problem = PlanningProblem(("p",), (a,))
        states = state_sequence(problem, Plan((PlanStep("a", 0, 0),)))
        assert states.final == {"p"}

    def test_non_mutex_effects_commute(self):
        rng = random.Random(17)
        checked = 0
        for _ in range(200):
            problem = random_problem(rng, max_props=4, max_actions=4)
            chosen = rng.sample(problem.actions, rng.randint(1, len(problem.actions)))
            plan = Plan(tuple(PlanStep(a.name, 0, random_duration(rng, a)) for a in chosen))
            states = state_sequence(problem, plan)
            for i, t in enumerate(htps(plan)):
                snaps = [timed.snap(problem) for timed in snaps_at(plan, t)]
                if len(snaps) < 2 or any(mutex(a, b) for a, b in combinations(snaps, 2)):
                    continue
                for order in permutations(snaps):
                    state = states[i]
                    for snap in order:
                        state = (state - snap.dels) | snap.adds
                    assert state == states[i + 1]
                checked += 1
        assert checked > 0


class TestSeparation:
    def test_simultaneous_mutex(self, robots_problem, clash_plan):
        assert not separation_ok(robots_problem, clash_plan, Fraction(0))

    def test_separated(self, robots_problem, fig4_plan):
        assert separation_ok(robots_problem, fig4_plan, Fraction(0))
        assert separation_ok(robots_problem, fig4_plan, Fraction(1))

    def test_epsilon_too_large(self, robots_problem, fig4_plan):
        assert not separation_ok(robots_problem, fig4_plan, Fraction(3, 2))

    def test_monotone_in_epsilon(self):
        rng = random.Random(18)
        epsilons = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(7)]
        for _ in range(200):
            problem = random_problem(rng, max_props=4, max_actions=3)
            plan = random_plan(rng, problem)
            results = [separation_ok(problem, plan, e) for e in epsilons]
            # 一旦某个 ε 失败，更大的 ε 也失败
            assert results == sorted(results, reverse=True)


class TestSelfOverlap:
    def test_disjoint(self, fig4_plan):
        assert no_self_overlap(fig4_plan)

    def test_touching_intervals_overlap(self):
        plan = Plan((PlanStep("a", 0, 1), PlanStep("a", 1, 1)))
        assert self_overlaps(plan) == [(0, 1)]

    def test_nested(self):
        plan = Plan((PlanStep("a", 0, 5), PlanStep("b", 1, 1), PlanStep("a", 2, 1)))
        assert self_overlaps(plan) == [(0, 2)]


class TestValidatePlan:
    def test_schedule_valid(self, robots_problem, fig4_plan):
        verdict = validate_plan(robots_problem, fig4_plan, Fraction(0))
        assert verdict
        assert verdict.first is None
        assert verdict.no_self_overlap

    def test_clash_cites_separation(self, robots_problem, clash_plan):
        verdict = validate_plan(robots_problem, clash_plan, Fraction(0))
        assert not verdict
        assert Clause.SEPARATION in verdict.clauses()
        separation = [d for d in verdict.diagnostics if d.clause == Clause.SEPARATION]
        assert any(OPEN_DOOR in d.message and PICK_UP in d.message for d in separation)
        assert verdict.first.time == 3

    def test_first_is_earliest_lowest_clause(self, robots_problem, clash_plan):
        verdict = validate_plan(robots_problem, clash_plan, Fraction(0))
        at_three = [d for d in verdict.diagnostics if d.time == 3]
        assert verdict.first.clause == min(d.clause for d in at_three)

    def test_unknown_action(self, robots_problem):
        with pytest.raises(ResolutionError) as info:
            validate_plan(robots_problem, Plan((PlanStep(MOVE, 0, 3), PlanStep("fly", 1, 1))))
        assert info.value.step_index == 1
        assert info.value.action == "fly"

    def test_empty_plan_goal_in_init(self):
        problem = PlanningProblem(("p",), (), frozenset({"p"}), frozenset({"p"}))
        assert validate_plan(problem, Plan())

    def test_empty_plan_goal_missing(self):
        problem = PlanningProblem(("p",), (), frozenset(), frozenset({"p"}))
        verdict = validate_plan(problem, Plan())
        assert verdict.clauses() == {Clause.GOAL}
        assert verdict.first.time is None

    def test_duration_violation(self, robots_problem):
        plan = Plan((PlanStep(OPEN_DOOR, 0, 2),))
        verdict = validate_plan(robots_problem, plan)
        assert Clause.DURATION in verdict.clauses()
        assert verdict.first.steps == (0,)

    def test_negative_duration(self, robots_problem):
        plan = Plan((PlanStep(MOVE, 4, -1),))
        assert Clause.NON_NEGATIVE in validate_plan(robots_problem, plan).clauses()

    def test_invariant_violation(self, robots_problem):
        # 门还没开就开始移动，移动期间 open_d 不成立
        plan = Plan((PlanStep(MOVE, 0, 3),))
        assert Clause.INVARIANT in validate_plan(robots_problem, plan).clauses()

    def test_precondition_violation(self, robots_problem):
        plan = Plan((PlanStep(CLOSE_DOOR, 0, 3),))
        verdict = validate_plan(robots_problem, plan)
        assert verdict.first.clause == Clause.PRECONDITION

    def test_diagnostic_format(self, robots_problem, clash_plan):
        text = validate_plan(robots_problem, clash_plan).first.format()
        assert text.startswith("[条款 ")
        assert "t=3" in text

    def test_matches_clause_oracle(self):
        rng = random.Random(11)
        for n in range(500):
            problem = random_problem(rng, max_props=4, max_actions=3)
            plan = random_plan(rng, problem)
            if n % 2:
                problem = with_reachable_goal(rng, problem, plan)
            if n % 17 == 0 and plan.steps:
                first = plan.steps[0]
                plan = Plan((PlanStep(first.action, first.t, -first.d - 1),) + plan.steps[1:])
            epsilon = Fraction(rng.choice((0, 0, 1, 1, 2)), 2)
            verdict = validate_plan(problem, plan, epsilon)
            expected = violated_clauses(problem, plan, epsilon)
            assert {int(c) for c in verdict.clauses()} == expected
            assert verdict.valid == (not expected)
