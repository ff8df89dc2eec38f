"""Solver verdicts, counters, budgets, and cross-solver agreement."""

import pytest

from conftest import (
    CONSTRAINT_KINDS,
    PO_VALID_COUNT,
    random_instance,
    valid_plans_longhand,
)
from wspkit.core import (
    AtLeast,
    AuthorisationFunction,
    BoD,
    CapacityError,
    Instance,
    SoD,
    WspError,
    is_valid,
)
from wspkit.patterns import bell
from wspkit.solver import (
    Budget,
    SolveResult,
    SolveStats,
    Verdict,
    compile_search_problem,
    count_valid_plans,
    solve_backtracking,
    solve_bruteforce,
    solve_pattern_enum,
    valid_plans,
    verify,
)
from wspkit.absorption import absorb

SOLVERS = (solve_bruteforce, solve_pattern_enum, solve_backtracking)


@pytest.mark.parametrize("solve", SOLVERS)
def test_purchase_order_sat(po_instance, solve):
    res = solve(po_instance)
    assert res.verdict is Verdict.SAT
    assert res.sat
    assert is_valid(res.plan, po_instance)
    assert verify(res.plan, po_instance)


def test_purchase_order_count(po_instance):
    assert count_valid_plans(po_instance) == PO_VALID_COUNT
    assert len(valid_plans(po_instance)) == PO_VALID_COUNT


def test_bruteforce_returns_lexicographically_first(po_instance):
    res = solve_bruteforce(po_instance)
    assert res.plan == min(valid_plans(po_instance))


@pytest.mark.parametrize("solve", SOLVERS)
def test_unsat_contradictory_pair(solve):
    inst = Instance(2, 3, AuthorisationFunction.total(2, 3),
                    (SoD(0, 1), BoD(0, 1)))
    res = solve(inst)
    assert res.verdict is Verdict.UNSAT
    assert res.plan is None


@pytest.mark.parametrize("solve", SOLVERS)
def test_unsat_empty_authorisation(solve):
    inst = Instance(2, 3, AuthorisationFunction.from_lists([[0, 1], []], 3), ())
    assert solve(inst).verdict is Verdict.UNSAT


@pytest.mark.parametrize("solve", SOLVERS)
def test_unsat_too_few_users_for_atleast(solve):
    inst = Instance(3, 2, AuthorisationFunction.total(3, 2),
                    (AtLeast(3, (0, 1, 2)),))
    assert solve(inst).verdict is Verdict.UNSAT


def test_pattern_enum_exhausts_before_unsat():
    inst = Instance(4, 2, AuthorisationFunction.total(4, 2),
                    (AtLeast(4, (0, 1, 2, 3)),))
    res = solve_pattern_enum(inst)
    assert res.verdict is Verdict.UNSAT
    assert res.stats.patterns_visited == bell(4)


def test_backtracker_counters_on_unsat():
    # complete patterns and certified matchings both stay at zero on UNSAT
    inst = Instance(4, 2, AuthorisationFunction.total(4, 2),
                    (AtLeast(4, (0, 1, 2, 3)),))
    res = solve_backtracking(inst)
    assert res.verdict is Verdict.UNSAT
    assert res.stats.patterns_visited == 0
    assert res.stats.matchings_computed == 0
    assert res.stats.nodes_expanded > 0


def test_backtracker_counters_on_sat(po_instance):
    res = solve_backtracking(po_instance)
    assert res.stats.patterns_visited >= 1
    assert res.stats.matchings_computed >= 1
    assert res.stats.nodes_expanded >= po_instance.k


def test_counter_bounds_against_family_product(po_instance):
    absorbed = absorb(po_instance)
    members = max(1, len(absorbed.static_functions))
    res = solve_pattern_enum(po_instance)
    assert res.stats.patterns_visited <= bell(po_instance.k)
    assert res.stats.matchings_computed <= bell(po_instance.k) * members
    res = solve_backtracking(po_instance)
    assert res.stats.patterns_visited <= bell(po_instance.k)
    assert res.stats.matchings_computed <= bell(po_instance.k) * members


def test_budget_pattern_cap():
    inst = Instance(4, 2, AuthorisationFunction.total(4, 2),
                    (AtLeast(4, (0, 1, 2, 3)),))
    res = solve_pattern_enum(inst, Budget(max_patterns=3))
    assert res.verdict is Verdict.BUDGET
    assert res.plan is None
    assert res.stats.patterns_visited == 3


def test_budget_node_cap():
    inst = Instance(6, 3, AuthorisationFunction.total(6, 3),
                    (AtLeast(4, (0, 1, 2, 3)),))
    res = solve_backtracking(inst, Budget(max_nodes=2))
    assert res.verdict is Verdict.BUDGET
    assert res.plan is None


def test_budget_deadline_already_expired(po_instance):
    res = solve_pattern_enum(po_instance, Budget(max_millis=0.0))
    assert res.verdict is Verdict.BUDGET


def test_budget_generous_enough_still_solves(po_instance):
    res = solve_backtracking(po_instance, Budget(max_millis=60_000,
                                                 max_nodes=10_000_000))
    assert res.verdict is Verdict.SAT


def test_budget_deadline_helper():
    assert Budget().deadline(5.0) is None
    assert Budget(max_millis=1500).deadline(2.0) == pytest.approx(3.5)


@pytest.mark.parametrize("kind", CONSTRAINT_KINDS + ("mixed",))
@pytest.mark.parametrize("seed", range(8))
def test_solvers_agree_with_ground_truth(kind, seed):
    inst = random_instance(kind, seed, k_max=4, n_max=6)
    truth = valid_plans_longhand(inst)
    for solve in SOLVERS:
        res = solve(inst)
        if truth:
            assert res.verdict is Verdict.SAT, (kind, seed, solve.__name__)
            assert res.plan in truth
        else:
            assert res.verdict is Verdict.UNSAT, (kind, seed, solve.__name__)


@pytest.mark.parametrize("solve", SOLVERS)
def test_solutions_are_deterministic(po_instance, solve):
    assert {solve(po_instance).plan for _ in range(3)} == {solve(po_instance).plan}


def test_valid_plans_matches_longhand_oracle():
    for seed in range(10):
        inst = random_instance("mixed", seed, k_max=4, n_max=5)
        assert set(valid_plans(inst)) == valid_plans_longhand(inst)


def test_bruteforce_capacity_cap():
    inst = Instance(8, 10, AuthorisationFunction.total(8, 10), ())
    with pytest.raises(CapacityError):
        solve_bruteforce(inst, cap=1000)
    with pytest.raises(CapacityError):
        count_valid_plans(inst, cap=1000)


def test_kernel_step_limit():
    k = 65
    inst = Instance(k, 2, AuthorisationFunction.total(k, 2), ())
    with pytest.raises(CapacityError):
        compile_search_problem(absorb(inst))


def test_compile_returns_none_for_dead_family():
    inst = Instance(2, 2, AuthorisationFunction.from_lists([[0], []], 2), ())
    assert compile_search_problem(absorb(inst)) is None
    assert solve_backtracking(inst).verdict is Verdict.UNSAT


def test_guard_rejects_bad_plan(po_instance):
    from wspkit.solver import _guard
    with pytest.raises(WspError):
        _guard((0, 0, 0, 0, 0, 0), po_instance)


@pytest.mark.parametrize("jobs", [2, 3])
def test_parallel_split_agrees(jobs, po_instance):
    res = solve_backtracking(po_instance, jobs=jobs)
    assert res.verdict is Verdict.SAT
    assert is_valid(res.plan, po_instance)
    unsat = Instance(5, 3, AuthorisationFunction.total(5, 3),
                     (AtLeast(4, (0, 1, 2, 3)),))
    assert solve_backtracking(unsat, jobs=jobs).verdict is Verdict.UNSAT


def test_parallel_small_k_falls_back_to_serial():
    inst = Instance(2, 2, AuthorisationFunction.total(2, 2), (SoD(0, 1),))
    res = solve_backtracking(inst, jobs=4)
    assert res.verdict is Verdict.SAT


def test_solve_result_shapes():
    r = SolveResult(Verdict.UNSAT, None)
    assert not r.sat
    assert isinstance(r.stats, SolveStats)
