"""Decision procedures: pattern enumeration, backtracking search, brute force.

All three return a SolveResult whose verdict is SAT, UNSAT, or BUDGET (the
search gave up on a resource limit before reaching an answer; never to be
confused with UNSAT).  Any plan returned is re-checked against the original
instance semantics before the result leaves this module.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from enum import Enum
from math import prod
from typing import Iterator, Optional, Sequence

from . import _kernel
from ._kernel import CountSpec, SearchProblem, SualSpec
from .absorption import AbsorbedInstance, absorb
from .core import (
    AtLeast,
    AtMost,
    BoD,
    CapacityError,
    Instance,
    SoD,
    WspError,
    bits_of,
    is_eligible,
    is_valid,
    mask_of,
)
from .matching import authorised_plan_for
from .patterns import enumerate_patterns, pattern_satisfies


class Verdict(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    BUDGET = "budget"


@dataclass
class SolveStats:
    """Work counters.

    patterns_visited: complete patterns examined (pattern enumeration counts
    every pattern it iterates; the backtracker counts patterns whose full
    construction survived pruning).  matchings_computed: complete
    block-saturation checks (one per family member tried by pattern
    enumeration; one per certified full-depth matching in the backtracker,
    whose incremental repairs are accounted under nodes_expanded).
    """

    patterns_visited: int = 0
    matchings_computed: int = 0
    nodes_expanded: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class SolveResult:
    verdict: Verdict
    plan: Optional[tuple[int, ...]]
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def sat(self) -> bool:
        return self.verdict is Verdict.SAT


@dataclass(frozen=True)
class Budget:
    """Resource limits; None means unlimited."""

    max_millis: Optional[float] = None
    max_patterns: Optional[int] = None
    max_nodes: Optional[int] = None

    def deadline(self, t0: float) -> Optional[float]:
        if self.max_millis is None:
            return None
        return t0 + self.max_millis / 1000.0


def verify(plan: Sequence[int], inst: Instance) -> bool:
    """Ground-truth check of a single plan."""
    return is_valid(plan, inst)


def _guard(plan: Sequence[int], inst: Instance) -> tuple[int, ...]:
    plan = tuple(plan)
    if not is_valid(plan, inst):
        raise WspError("internal: solver produced a plan that fails verification")
    return plan


# --- pattern enumeration ---------------------------------------------------


def solve_pattern_enum(inst: Instance, budget: Optional[Budget] = None) -> SolveResult:
    """Iterate all patterns in lexicographic RGS order; for each, check the
    residual user-independent constraints against the pattern, then try one
    saturating matching per member of the absorbed family.  UNSAT only after
    every pattern is exhausted."""
    t0 = time.perf_counter()
    budget = budget or Budget()
    deadline = budget.deadline(t0)
    stats = SolveStats()
    absorbed = absorb(inst)
    residual = absorbed.residual
    for p in enumerate_patterns(inst.k):
        if budget.max_patterns is not None and stats.patterns_visited >= budget.max_patterns:
            stats.wall_time = time.perf_counter() - t0
            return SolveResult(Verdict.BUDGET, None, stats)
        if deadline is not None and time.perf_counter() > deadline:
            stats.wall_time = time.perf_counter() - t0
            return SolveResult(Verdict.BUDGET, None, stats)
        stats.patterns_visited += 1
        if not all(pattern_satisfies(p, c) for c in residual):
            continue
        for fn in absorbed.family_for(p).functions:
            stats.matchings_computed += 1
            plan = authorised_plan_for(p, fn)
            if plan is not None:
                stats.wall_time = time.perf_counter() - t0
                return SolveResult(Verdict.SAT, _guard(plan, inst), stats)
    stats.wall_time = time.perf_counter() - t0
    return SolveResult(Verdict.UNSAT, None, stats)


# --- backtracking over pattern prefixes -------------------------------------


def compile_search_problem(absorbed: AbsorbedInstance) -> Optional[SearchProblem]:
    """Reindex an absorbed instance into visit-depth space for the kernel.

    Returns None when the static family is already empty (trivially UNSAT).
    Step visit order is static: ascending constraint degree, ties by index.
    """
    inst = absorbed.instance
    k, n = inst.k, inst.n
    if k > _kernel.KERNEL_MAX_STEPS:
        raise CapacityError(
            f"search kernel handles at most {_kernel.KERNEL_MAX_STEPS} steps, got {k}")
    if not absorbed.static_functions:
        return None

    degree = [0] * k
    for c in inst.constraints:
        for s in set(c.steps):
            degree[s] += 1
    order = tuple(sorted(range(k), key=lambda s: (degree[s], s)))
    pos = {s: d for d, s in enumerate(order)}

    combo_masks = tuple(
        tuple(fn.step_masks[order[d]] for d in range(k))
        for fn in absorbed.static_functions)

    sod_prev: list[list[int]] = [[] for _ in range(k)]
    bod_prev: list[list[int]] = [[] for _ in range(k)]
    counts: list[CountSpec] = []
    for c in absorbed.residual:
        if isinstance(c, SoD):
            d1, d2 = sorted((pos[c.s1], pos[c.s2]))
            sod_prev[d2].append(d1)
        elif isinstance(c, BoD):
            d1, d2 = sorted((pos[c.s1], pos[c.s2]))
            bod_prev[d2].append(d1)
        elif isinstance(c, AtMost):
            counts.append(CountSpec(True, c.r, tuple(sorted(pos[s] for s in c.scope))))
        elif isinstance(c, AtLeast):
            counts.append(CountSpec(False, c.r, tuple(sorted(pos[s] for s in c.scope))))
    suals = tuple(
        SualSpec(tuple(sorted(pos[s] for s in c.scope)), c.h, mask_of(c.supers))
        for c in absorbed.suals)

    return SearchProblem(
        k=k,
        n=n,
        order=order,
        combo_masks=combo_masks,
        sod_prev=tuple(tuple(sorted(x)) for x in sod_prev),
        bod_prev=tuple(tuple(sorted(x)) for x in bod_prev),
        counts=tuple(counts),
        suals=suals,
    )


def _run_kernel(prob: SearchProblem, budget: Budget, t0: float, backend: str,
                prefix: Sequence[int] = ()):
    run = _kernel.backend_run_search(backend)
    return run(
        prob,
        max_nodes=budget.max_nodes,
        max_patterns=budget.max_patterns,
        deadline=budget.deadline(t0),
        prefix=tuple(prefix),
    )


def _branch_payload(args):
    inst, prefix, budget, backend, t0 = args
    absorbed = absorb(inst)
    prob = compile_search_problem(absorbed)
    if prob is None:
        return (_kernel.UNSAT, None, 0, 0, 0)
    return _run_kernel(prob, budget, t0, backend, prefix)


def solve_backtracking(
    inst: Instance,
    budget: Optional[Budget] = None,
    jobs: int = 1,
    backend: str = "auto",
    max_family_size: int = 4096,
) -> SolveResult:
    """Depth-first search over pattern prefixes with structural pruning and
    one incrementally-maintained matching per authorisation alternative.

    jobs > 1 partitions the top of the tree across worker processes; the
    verdict stays deterministic but which satisfying plan comes back first
    does not.  `backend` selects the kernel ("auto", "compiled", "pure").
    """
    t0 = time.perf_counter()
    budget = budget or Budget()
    stats = SolveStats()
    absorbed = absorb(inst, max_family_size=max_family_size)
    prob = compile_search_problem(absorbed)
    if prob is None:
        stats.wall_time = time.perf_counter() - t0
        return SolveResult(Verdict.UNSAT, None, stats)

    if jobs <= 1 or inst.k < 3:
        status, plan, patterns, nodes, matchings = _run_kernel(prob, budget, t0, backend)
        stats.patterns_visited = patterns
        stats.nodes_expanded = nodes
        stats.matchings_computed = matchings
        stats.wall_time = time.perf_counter() - t0
        if status == _kernel.SAT:
            return SolveResult(Verdict.SAT, _guard(plan, inst), stats)
        if status == _kernel.BUDGET:
            return SolveResult(Verdict.BUDGET, None, stats)
        return SolveResult(Verdict.UNSAT, None, stats)

    split = min(inst.k - 1, 4)
    prefixes = [p.rgs for p in enumerate_patterns(split)]
    overall = _kernel.UNSAT
    plan_found = None
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = {
            pool.submit(_branch_payload, (inst, prefix, budget, backend, t0))
            for prefix in prefixes
        }
        pending = set(futures)
        while pending:
            done, pending = wait(pending, return_when=FIRST_COMPLETED)
            for fut in done:
                status, plan, patterns, nodes, matchings = fut.result()
                stats.patterns_visited += patterns
                stats.nodes_expanded += nodes
                stats.matchings_computed += matchings
                if status == _kernel.SAT and plan_found is None:
                    plan_found = plan
                elif status == _kernel.BUDGET and overall == _kernel.UNSAT:
                    overall = _kernel.BUDGET
            if plan_found is not None:
                for fut in pending:
                    fut.cancel()
                break
    stats.wall_time = time.perf_counter() - t0
    if plan_found is not None:
        return SolveResult(Verdict.SAT, _guard(plan_found, inst), stats)
    if overall == _kernel.BUDGET:
        return SolveResult(Verdict.BUDGET, None, stats)
    return SolveResult(Verdict.UNSAT, None, stats)


# --- exhaustive ground truth -------------------------------------------------


def _auth_lists(inst: Instance) -> list[tuple[int, ...]]:
    return [bits_of(inst.auth.mask(s)) for s in range(inst.k)]


def _check_cap(inst: Instance, cap: int) -> list[tuple[int, ...]]:
    lists = _auth_lists(inst)
    work = prod(len(us) for us in lists)
    if work > cap:
        raise CapacityError(
            f"brute force would enumerate {work} authorised plans, above cap={cap}; "
            f"the full plan space is n^k = {inst.n ** inst.k}")
    return lists

def iter_valid_plans(inst: Instance, cap: int = 10_000_000) -> Iterator[tuple[int, ...]]:
    """All valid plans in lexicographic order.  Enumeration runs over the
    authorised product (plans outside it are invalid by definition), capped
    at `cap` candidates."""
    lists = _check_cap(inst, cap)
    constraints = inst.constraints
    for plan in itertools.product(*lists):
        if all(is_eligible(plan, c) for c in constraints):
            yield plan


def solve_bruteforce(inst: Instance, cap: int = 10_000_000) -> SolveResult:
    """Exhaustive scan in lexicographic plan order; the ground-truth oracle
    for the other solvers at small sizes."""
    t0 = time.perf_counter()
    stats = SolveStats()
    lists = _check_cap(inst, cap)
    constraints = inst.constraints
    for plan in itertools.product(*lists):
        stats.nodes_expanded += 1
        if all(is_eligible(plan, c) for c in constraints):
            stats.wall_time = time.perf_counter() - t0
            return SolveResult(Verdict.SAT, _guard(plan, inst), stats)
    stats.wall_time = time.perf_counter() - t0
    return SolveResult(Verdict.UNSAT, None, stats)


def valid_plans(inst: Instance, cap: int = 10_000_000) -> list[tuple[int, ...]]:
    return list(iter_valid_plans(inst, cap))


def count_valid_plans(inst: Instance, cap: int = 10_000_000) -> int:
    return sum(1 for _ in iter_valid_plans(inst, cap))
