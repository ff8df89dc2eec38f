"""The compiled and pure kernels must agree call for call.

The compiled backend is a transliteration of the pure one, so parity is
asserted on the full result tuple: status, plan, and all three counters.
Any divergence, even in node counts, means the two implementations stopped
being the same algorithm.
"""

import pytest

from conftest import CONSTRAINT_KINDS, random_instance, valid_plans_longhand
from wspkit import _kernel
from wspkit._kernel import SearchProblem, available_backends, backend_run_search
from wspkit.absorption import absorb
from wspkit.patterns import enumerate_patterns
from wspkit.solver import Verdict, solve_backtracking

HAVE_COMPILED = "compiled" in available_backends()
needs_compiled = pytest.mark.skipif(not HAVE_COMPILED,
                                    reason="compiled kernel not built")

ALL_MIXES = CONSTRAINT_KINDS + ("mixed",)


def compile_problem(inst):
    from wspkit.solver import compile_search_problem
    return compile_search_problem(absorb(inst))


def run_both(prob, **kw):
    pure = backend_run_search("pure")(prob, **kw)
    comp = backend_run_search("compiled")(prob, **kw)
    return pure, comp


@needs_compiled
@pytest.mark.parametrize("kind", ALL_MIXES)
@pytest.mark.parametrize("seed", range(10))
def test_unlimited_run_parity(kind, seed):
    inst = random_instance(kind, seed, k_max=5, n_max=7)
    prob = compile_problem(inst)
    if prob is None:
        return
    pure, comp = run_both(prob)
    assert pure == comp, (kind, seed)


@needs_compiled
@pytest.mark.parametrize("kind", ALL_MIXES)
@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("cap", [1, 3, 17])
def test_node_budget_parity(kind, seed, cap):
    inst = random_instance(kind, seed, k_max=5, n_max=7)
    prob = compile_problem(inst)
    if prob is None:
        return
    pure, comp = run_both(prob, max_nodes=cap)
    assert pure == comp, (kind, seed, cap)


@needs_compiled
@pytest.mark.parametrize("seed", range(4))
def test_pattern_budget_parity(seed):
    inst = random_instance("mixed", seed, k_max=5, n_max=7)
    prob = compile_problem(inst)
    if prob is None:
        return
    for cap in (0, 1, 2):
        pure, comp = run_both(prob, max_patterns=cap)
        assert pure == comp, (seed, cap)


@needs_compiled
@pytest.mark.parametrize("kind", ("mixed", "sual", "wl"))
@pytest.mark.parametrize("seed", range(4))
def test_prefix_replay_parity(kind, seed):
    inst = random_instance(kind, seed, k_max=5, n_max=7)
    prob = compile_problem(inst)
    if prob is None or prob.k < 3:
        return
    for head in enumerate_patterns(2):
        pure, comp = run_both(prob, prefix=head.rgs)
        assert pure == comp, (kind, seed, head.rgs)
    # non-canonical prefixes resolve to an empty branch, identically
    pure, comp = run_both(prob, prefix=(0, 2))
    assert pure == comp


@needs_compiled
def test_prefix_split_covers_whole_tree():
    """Splitting by prefixes at depth 2 reaches the same verdict as the
    unsplit run (SAT if any branch is SAT, else UNSAT)."""
    for seed in range(8):
        inst = random_instance("mixed", seed, k_max=5, n_max=7)
        prob = compile_problem(inst)
        if prob is None or prob.k < 3:
            continue
        whole = backend_run_search("pure")(prob)
        branch_statuses = set()
        for head in enumerate_patterns(2):
            got = backend_run_search("compiled")(prob, prefix=head.rgs)
            branch_statuses.add(got[0])
        split_verdict = _kernel.SAT if _kernel.SAT in branch_statuses else _kernel.UNSAT
        assert split_verdict == whole[0], seed


@needs_compiled
def test_degenerate_problem_parity():
    dead = SearchProblem(
        k=2, n=2, order=(0, 1), combo_masks=(),
        sod_prev=((), ()), bod_prev=((), ()))
    pure, comp = run_both(dead)
    assert pure == comp == (_kernel.UNSAT, None, 0, 0, 0)


@needs_compiled
@pytest.mark.parametrize("kind", ALL_MIXES)
@pytest.mark.parametrize("seed", range(5))
def test_backend_verdicts_match_ground_truth(kind, seed):
    inst = random_instance(kind, seed, k_max=4, n_max=6)
    truth = valid_plans_longhand(inst)
    for backend in ("pure", "compiled"):
        res = solve_backtracking(inst, backend=backend)
        if truth:
            assert res.verdict is Verdict.SAT, (kind, seed, backend)
            assert res.plan in truth, (kind, seed, backend)
        else:
            assert res.verdict is Verdict.UNSAT, (kind, seed, backend)


@needs_compiled
def test_backends_return_the_same_plan(po_instance):
    a = solve_backtracking(po_instance, backend="pure")
    b = solve_backtracking(po_instance, backend="compiled")
    assert a.plan == b.plan
    assert (a.stats.patterns_visited, a.stats.nodes_expanded,
            a.stats.matchings_computed) == \
           (b.stats.patterns_visited, b.stats.nodes_expanded,
            b.stats.matchings_computed)


def test_backend_selection_errors():
    with pytest.raises(ValueError):
        backend_run_search("turbo")


def test_pure_backend_always_available():
    assert "pure" in available_backends()
    assert backend_run_search("pure") is not None
