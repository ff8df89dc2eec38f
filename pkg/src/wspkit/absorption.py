"""Folding constraints into context-dependent authorisations.

Each constraint maps, at a fixed pattern p, to a small disjunctive family of
authorisation functions: a plan with pattern p satisfies the constraint iff
some family member authorises it.  Families of different constraints combine
by pairwise intersection, so an instance reduces to (a) user-independent
constraints, checked against the pattern alone, and (b) one authorisation
family per pattern.  The family size per constraint is its branching bound:
1 for user-independent constraints and SUAL, 2 for ADA, d (team count) for
WL; the solvers' work scales with the product of these bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .core import (
    ADA,
    AtLeast,
    AtMost,
    AuthorisationFunction,
    BoD,
    CapacityError,
    Constraint,
    Instance,
    InvariantError,
    SUAL,
    SoD,
    WL,
    _users_named,
    is_authorised,
    is_ui,
    mask_of,
)
from .patterns import Pattern, pattern_of, pattern_satisfies


@dataclass(frozen=True)
class PAuthorisationFamily:
    """Disjunctive alternatives at one pattern: a plan is authorised by the
    family when at least one member function authorises it."""

    functions: tuple[AuthorisationFunction, ...]

    @property
    def size(self) -> int:
        return len(self.functions)

    def authorises(self, plan: Sequence[int]) -> bool:
        return any(is_authorised(plan, fn) for fn in self.functions)


def _masks_function(n: int, masks: Sequence[int]) -> AuthorisationFunction:
    return AuthorisationFunction(n, tuple(masks))


def _uniform(k: int, n: int, mask: int) -> AuthorisationFunction:
    return AuthorisationFunction(n, (mask,) * k)


def family_for_constraint(c: Constraint, p: Pattern, k: int, n: int) -> PAuthorisationFamily:
    """The constraint's own authorisation family at pattern p.

    Member order is fixed (teams in declaration order, the trigger case of
    ADA first) so downstream intersections stay deterministic.
    """
    full = (1 << n) - 1
    if is_ui(c):
        # One member: unrestricted when the pattern already satisfies the
        # constraint, otherwise a function authorising nothing.
        mask = full if pattern_satisfies(p, c) else 0
        return PAuthorisationFamily((_uniform(k, n, mask),))
    if isinstance(c, SUAL):
        covered = len({p.rgs[s] for s in c.scope})
        masks = [full] * k
        if covered <= c.h:
            xmask = mask_of(c.supers)
            for s in c.scope:
                masks[s] = xmask
        return PAuthorisationFamily((_masks_function(n, masks),))
    if isinstance(c, WL):
        members = []
        for team in c.teams:
            tmask = mask_of(team)
            masks = [full] * k
            for s in c.scope:
                masks[s] = tmask
            members.append(_masks_function(n, masks))
        return PAuthorisationFamily(tuple(members))
    if isinstance(c, ADA):
        trig = mask_of(c.trigger)
        req = mask_of(c.required)
        first = [full] * k
        first[c.s1] = trig
        first[c.s2] = req
        second = [full] * k
        second[c.s1] = full & ~trig
        return PAuthorisationFamily(
            (_masks_function(n, first), _masks_function(n, second)))
    raise InvariantError(f"unknown constraint type: {type(c).__name__}")


def intersect_families(
    f1: PAuthorisationFamily,
    f2: PAuthorisationFamily,
    prune: bool = True,
) -> PAuthorisationFamily:
    """Pairwise step-wise intersection of two families.

    With prune=True (the default), members left with an empty set on some
    step are dropped: such a function authorises no plan at all, so removing
    it never loses a plan.
    """
    out = []
    for a in f1.functions:
        for b in f2.functions:
            if a.n != b.n or a.k != b.k:
                raise InvariantError("intersect: families over different step/user ranges")
            masks = tuple(ma & mb for ma, mb in zip(a.step_masks, b.step_masks))
            if prune and any(m == 0 for m in masks):
                continue
            out.append(AuthorisationFunction(a.n, masks))
    return PAuthorisationFamily(tuple(out))


class AuthorisationFamily:
    """Pattern -> family map, lazily computed and memoised by RGS.

    The memo is only mutated by interning fully-built values into a dict, so
    concurrent readers under the GIL see either a hit or a miss, never a
    partial value; parallel solvers each build their own copy per process.
    """

    def __init__(self, k: int, n: int,
                 build: Callable[[Pattern], PAuthorisationFamily]) -> None:
        self.k = k
        self.n = n
        self._build = build
        self._memo: dict[tuple[int, ...], PAuthorisationFamily] = {}

    @classmethod
    def constant(cls, k: int, n: int,
                 functions: Iterable[AuthorisationFunction]) -> "AuthorisationFamily":
        fam = PAuthorisationFamily(tuple(functions))
        return cls(k, n, lambda p: fam)

    def family_for(self, p: Pattern) -> PAuthorisationFamily:
        if p.k != self.k:
            raise InvariantError(f"pattern has {p.k} steps, family expects {self.k}")
        got = self._memo.get(p.rgs)
        if got is None:
            got = self._build(p)
            self._memo[p.rgs] = got
        return got


@dataclass
class AbsorbedInstance:
    """An instance rewritten as: residual user-independent constraints plus a
    per-pattern authorisation family.

    `static_functions` is the pattern-independent part (base authorisations
    intersected with the WL/ADA families); SUAL constraints are folded in per
    pattern by `family_for` since their effect depends on how many blocks
    cover the scope.
    """

    instance: Instance
    residual: tuple[Constraint, ...]
    static_functions: tuple[AuthorisationFunction, ...]
    suals: tuple[SUAL, ...]

    def __post_init__(self) -> None:
        self._memo: dict[tuple[int, ...], PAuthorisationFamily] = {}
        self._sual_masks = tuple(mask_of(c.supers) for c in self.suals)

    @property
    def family(self) -> AuthorisationFamily:
        return AuthorisationFamily(self.instance.k, self.instance.n, self.family_for)

    def family_for(self, p: Pattern) -> PAuthorisationFamily:
        if p.k != self.instance.k:
            raise InvariantError(
                f"pattern has {p.k} steps, instance has {self.instance.k}")
        got = self._memo.get(p.rgs)
        if got is not None:
            return got
        functions = self.static_functions
        for c, xmask in zip(self.suals, self._sual_masks):
            covered = len({p.rgs[s] for s in c.scope})
            if covered > c.h:
                continue
            kept = []
            for fn in functions:
                masks = list(fn.step_masks)
                for s in c.scope:
                    masks[s] &= xmask
                if any(m == 0 for m in masks):
                    continue
                kept.append(AuthorisationFunction(fn.n, tuple(masks)))
            functions = tuple(kept)
        fam = PAuthorisationFamily(functions)
        self._memo[p.rgs] = fam
        return fam


def absorb(inst: Instance, max_family_size: int = 4096) -> AbsorbedInstance:
    """Split an instance into residual user-independent constraints and a
    per-pattern authorisation family.

    Plan-equivalent: a plan is valid for the original instance iff its
    pattern satisfies every residual constraint and some family member at
    that pattern authorises it.  WL and ADA families are pattern-independent,
    so their product with the base authorisations is built once; the product
    size is capped by `max_family_size`.
    """
    k, n = inst.k, inst.n
    residual = inst.ui_constraints()
    suals = tuple(c for c in inst.nonui_constraints() if isinstance(c, SUAL))

    functions: tuple[AuthorisationFunction, ...] = (inst.auth,)
    if any(m == 0 for m in inst.auth.step_masks):
        functions = ()
    trivial = Pattern(tuple(range(k)))  # WL/ADA families ignore the pattern
    for c in inst.nonui_constraints():
        if isinstance(c, SUAL):
            continue
        fam = family_for_constraint(c, trivial, k, n)
        if len(functions) * fam.size > max_family_size:
            raise CapacityError(
                f"authorisation family would exceed max_family_size={max_family_size}; "
                f"raise the limit to absorb this many WL/ADA alternatives")
        functions = intersect_families(
            PAuthorisationFamily(functions), fam).functions
    return AbsorbedInstance(inst, residual, functions, suals)


def plan_authorised_cda(plan: Sequence[int], family: AuthorisationFamily) -> bool:
    """Is the plan authorised by the family evaluated at the plan's own
    pattern?"""
    return family.family_for(pattern_of(plan)).authorises(plan)


@dataclass(frozen=True)
class BranchingReport:
    """Per-constraint absorption cost summary.

    `bound` is the family-size bound the dedicated construction achieves.
    The two generic bounds come from scope enumeration (n^t over t scope
    steps) and from user-set enumeration ((k+1)^t over t named users); the
    dedicated bound is never worse.
    """

    kind: str
    bound: int
    scope_bound: int
    user_bound: int
    max_family_size_observed: Optional[int] = None


def branching_bound(c: Constraint, k: int, n: int) -> BranchingReport:
    kind = type(c).__name__.lower()
    if is_ui(c) or isinstance(c, SUAL):
        bound = 1
    elif isinstance(c, ADA):
        bound = 2
    elif isinstance(c, WL):
        bound = len(c.teams)
    else:
        raise InvariantError(f"unknown constraint type: {type(c).__name__}")
    scope_t = len(set(c.steps))
    users_t = len(_users_named(c))
    return BranchingReport(
        kind=kind,
        bound=bound,
        scope_bound=n ** scope_t,
        user_bound=(k + 1) ** users_t,
    )


def generic_scope_family(
    scope: Sequence[int],
    predicate: Callable[[tuple[int, ...]], bool],
    k: int,
    n: int,
    max_assignments: int = 65536,
) -> PAuthorisationFamily:
    """Fallback absorber for an arbitrary constraint over a step scope.

    Enumerates all user assignments to the scope, keeps the satisfying ones,
    and emits one family member per survivor (the member pins each scope step
    to that assignment's user and leaves other steps unrestricted).  Works
    for any predicate but costs n^|scope| assignments, so it refuses scopes
    whose enumeration exceeds `max_assignments`.
    """
    steps = tuple(scope)
    if len(set(steps)) != len(steps):
        raise InvariantError("generic absorber: scope has repeated steps")
    total = n ** len(steps)
    if total > max_assignments:
        raise CapacityError(
            f"generic absorber would enumerate n^|scope| = {total} assignments, "
            f"above max_assignments={max_assignments}")
    full = (1 << n) - 1
    members = []
    for idx in range(total):
        assignment = []
        rest = idx
        for _ in steps:
            assignment.append(rest % n)
            rest //= n
        sigma = tuple(assignment)
        if not predicate(sigma):
            continue
        masks = [full] * k
        for s, u in zip(steps, sigma):
            masks[s] = 1 << u
        members.append(AuthorisationFunction(n, tuple(masks)))
    return PAuthorisationFamily(tuple(members))
