"""Domain types for workflow satisfiability instances.

An instance consists of k steps, n users, an authorisation function mapping
each step to the set of users permitted to perform it, and a list of
constraints.  A plan assigns one user to every step; it is valid when it is
authorised (every step performed by a permitted user) and eligible (no
constraint violated).

Steps and users are dense 0-based integer indices throughout.  User sets are
kept as frozensets at the constraint level and as integer bitmasks inside
authorisation functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union


class WspError(Exception):
    """Base class for errors raised by this package."""


class InvariantError(WspError, ValueError):
    """A domain object violates one of its structural invariants."""


class CapacityError(WspError):
    """Requested work exceeds a configured size limit; the message names the
    limit so callers can raise it deliberately."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvariantError(msg)


def mask_of(users: Iterable[int]) -> int:
    """Pack an iterable of user indices into a bitmask."""
    m = 0
    for u in users:
        m |= 1 << u
    return m


def bits_of(mask: int) -> tuple[int, ...]:
    """Unpack a bitmask into an ascending tuple of indices."""
    out = []
    while mask:
        lsb = mask & -mask
        out.append(lsb.bit_length() - 1)
        mask ^= lsb
    return tuple(out)


def _steps_tuple(scope: Iterable[int], what: str) -> tuple[int, ...]:
    steps = tuple(sorted(scope))
    _require(len(steps) == len(set(steps)), f"{what}: scope has repeated steps")
    _require(all(isinstance(s, int) and s >= 0 for s in steps),
             f"{what}: step indices must be non-negative integers")
    return steps


def _user_set(users: Iterable[int], what: str) -> frozenset[int]:
    us = frozenset(users)
    _require(all(isinstance(u, int) and u >= 0 for u in us),
             f"{what}: user indices must be non-negative integers")
    return us


@dataclass(frozen=True)
class AuthorisationFunction:
    """Per-step authorised user sets, stored as n-bit masks.

    An empty set for some step is legal; it just leaves every plan
    unauthorised at that step.
    """

    n: int
    step_masks: tuple[int, ...]

    def __post_init__(self) -> None:
        _require(self.n >= 1, "authorisation: n must be >= 1")
        _require(len(self.step_masks) >= 1, "authorisation: needs at least one step")
        full = (1 << self.n) - 1
        for s, m in enumerate(self.step_masks):
            _require(0 <= m <= full,
                     f"authorisation: step {s} names a user outside [0, {self.n})")

    @classmethod
    def from_lists(cls, lists: Sequence[Iterable[int]], n: int) -> "AuthorisationFunction":
        return cls(n, tuple(mask_of(us) for us in lists))

    @classmethod
    def total(cls, k: int, n: int) -> "AuthorisationFunction":
        """Every user authorised for every step."""
        full = (1 << n) - 1
        return cls(n, (full,) * k)

    @property
    def k(self) -> int:
        return len(self.step_masks)

    def mask(self, s: int) -> int:
        return self.step_masks[s]

    def users(self, s: int) -> tuple[int, ...]:
        return bits_of(self.step_masks[s])

    def allows(self, s: int, u: int) -> bool:
        return (self.step_masks[s] >> u) & 1 == 1

    def to_lists(self) -> list[list[int]]:
        return [list(bits_of(m)) for m in self.step_masks]


# --- constraint catalogue -------------------------------------------------
#
# SoD / BoD bind a pair of steps; AtMost / AtLeast bound the number of
# distinct users on a scope; SUAL, WL and ADA restrict which users may
# appear, so they are not expressible over the step partition alone.


@dataclass(frozen=True)
class SoD:
    """Separation of duty: the two steps get different users."""

    s1: int
    s2: int

    def __post_init__(self) -> None:
        _require(self.s1 != self.s2, "sod: steps must differ")

    @property
    def steps(self) -> tuple[int, ...]:
        return (self.s1, self.s2)


@dataclass(frozen=True)
class BoD:
    """Binding of duty: the two steps get the same user."""

    s1: int
    s2: int

    def __post_init__(self) -> None:
        _require(self.s1 != self.s2, "bod: steps must differ")

    @property
    def steps(self) -> tuple[int, ...]:
        return (self.s1, self.s2)


@dataclass(frozen=True)
class AtMost:
    """At most r distinct users over the scope."""

    r: int
    scope: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", _steps_tuple(self.scope, "atmost"))
        _require(len(self.scope) >= 2,
                 "atmost: scope must have at least 2 steps (|T| = 1 is vacuous)")
        _require(1 <= self.r <= len(self.scope),
                 f"atmost: r must lie in [1, {len(self.scope)}]")

    @property
    def steps(self) -> tuple[int, ...]:
        return self.scope


@dataclass(frozen=True)
class AtLeast:
    """At least r distinct users over the scope."""

    r: int
    scope: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", _steps_tuple(self.scope, "atleast"))
        _require(len(self.scope) >= 2,
                 "atleast: scope must have at least 2 steps (|T| = 1 is vacuous)")
        _require(1 <= self.r <= len(self.scope),
                 f"atleast: r must lie in [1, {len(self.scope)}]")

    @property
    def steps(self) -> tuple[int, ...]:
        return self.scope


@dataclass(frozen=True)
class SUAL:
    """Super-user-at-least: if at most h distinct users perform the scope,
    all of them must come from the super-user set."""

    scope: tuple[int, ...]
    h: int
    supers: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", _steps_tuple(self.scope, "sual"))
        object.__setattr__(self, "supers", _user_set(self.supers, "sual"))
        _require(len(self.scope) >= 2, "sual: scope must have at least 2 steps")
        _require(1 <= self.h < len(self.scope),
                 f"sual: h must lie in [1, {len(self.scope) - 1}]")
        _require(len(self.supers) >= 1, "sual: super-user set must be non-empty")

    @property
    def steps(self) -> tuple[int, ...]:
        return self.scope


@dataclass(frozen=True)
class WL:
    """Wang-Li: all scope steps performed by members of a single team."""

    scope: tuple[int, ...]
    teams: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", _steps_tuple(self.scope, "wl"))
        object.__setattr__(
            self, "teams", tuple(_user_set(t, "wl") for t in self.teams))
        _require(len(self.scope) >= 2, "wl: scope must have at least 2 steps")
        _require(len(self.teams) >= 1, "wl: needs at least one team")
        _require(all(len(t) >= 1 for t in self.teams), "wl: teams must be non-empty")
        seen: set[int] = set()
        for t in self.teams:
            _require(seen.isdisjoint(t), "wl: teams must be pairwise disjoint")
            seen |= t

    @property
    def steps(self) -> tuple[int, ...]:
        return self.scope


@dataclass(frozen=True)
class ADA:
    """Assignment-dependent authorisation: if s1 is performed by a trigger
    user, s2 must be performed by a user from the required set."""

    s1: int
    s2: int
    trigger: frozenset[int]
    required: frozenset[int]

    def __post_init__(self) -> None:
        _require(self.s1 != self.s2, "ada: steps must differ")
        object.__setattr__(self, "trigger", _user_set(self.trigger, "ada"))
        object.__setattr__(self, "required", _user_set(self.required, "ada"))
        _require(len(self.trigger) >= 1, "ada: trigger set must be non-empty")
        _require(len(self.required) >= 1, "ada: required set must be non-empty")

    @property
    def steps(self) -> tuple[int, ...]:
        return (self.s1, self.s2)


Constraint = Union[SoD, BoD, AtMost, AtLeast, SUAL, WL, ADA]

UI_KINDS = (SoD, BoD, AtMost, AtLeast)


def is_ui(c: Constraint) -> bool:
    """True when satisfaction of c depends only on the step partition a plan
    induces (which steps share a user), not on user identities."""
    return isinstance(c, UI_KINDS)


def _users_named(c: Constraint) -> frozenset[int]:
    if isinstance(c, SUAL):
        return c.supers
    if isinstance(c, WL):
        out: frozenset[int] = frozenset()
        for t in c.teams:
            out |= t
        return out
    if isinstance(c, ADA):
        return c.trigger | c.required
    return frozenset()


# --- plan-level semantics -------------------------------------------------

Plan = tuple  # tuple[int, ...], one user per step


def _at(plan: Sequence[int], s: int) -> int:
    if not 0 <= s < len(plan):
        raise InvariantError(f"plan: step {s} outside the plan's {len(plan)} steps")
    return plan[s]


def is_eligible(plan: Sequence[int], c: Constraint) -> bool:
    """Does the plan satisfy the single constraint c?"""
    if isinstance(c, SoD):
        return _at(plan, c.s1) != _at(plan, c.s2)
    if isinstance(c, BoD):
        return _at(plan, c.s1) == _at(plan, c.s2)
    if isinstance(c, AtMost):
        return len({_at(plan, s) for s in c.scope}) <= c.r
    if isinstance(c, AtLeast):
        return len({_at(plan, s) for s in c.scope}) >= c.r
    if isinstance(c, SUAL):
        used = {_at(plan, s) for s in c.scope}
        return len(used) > c.h or used <= c.supers
    if isinstance(c, WL):
        used = {_at(plan, s) for s in c.scope}
        return any(used <= team for team in c.teams)
    if isinstance(c, ADA):
        if _at(plan, c.s1) in c.trigger:
            return _at(plan, c.s2) in c.required
        return True
    raise InvariantError(f"unknown constraint type: {type(c).__name__}")


def is_authorised(plan: Sequence[int], auth: AuthorisationFunction) -> bool:
    """Does every step's user appear in that step's authorised set?"""
    if len(plan) != auth.k:
        raise InvariantError(
            f"plan covers {len(plan)} steps, authorisation has {auth.k}")
    for s, u in enumerate(plan):
        if not 0 <= u < auth.n:
            raise InvariantError(f"plan: user {u} outside [0, {auth.n})")
        if not auth.allows(s, u):
            return False
    return True


@dataclass(frozen=True)
class Instance:
    """A workflow satisfiability instance (steps, users, authorisations,
    constraints)."""

    k: int
    n: int
    auth: AuthorisationFunction
    constraints: tuple[Constraint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "constraints", tuple(self.constraints))
        _require(self.k >= 1, "instance: k must be >= 1")
        _require(self.n >= 1, "instance: n must be >= 1")
        _require(self.auth.k == self.k,
                 f"instance: authorisation covers {self.auth.k} steps, expected {self.k}")
        _require(self.auth.n == self.n,
                 f"instance: authorisation is over {self.auth.n} users, expected {self.n}")
        for c in self.constraints:
            for s in c.steps:
                _require(0 <= s < self.k,
                         f"{type(c).__name__}: step {s} outside [0, {self.k})")
            for u in _users_named(c):
                _require(0 <= u < self.n,
                         f"{type(c).__name__}: user {u} outside [0, {self.n})")

    def ui_constraints(self) -> tuple[Constraint, ...]:
        return tuple(c for c in self.constraints if is_ui(c))

    def nonui_constraints(self) -> tuple[Constraint, ...]:
        return tuple(c for c in self.constraints if not is_ui(c))


def check_plan(plan: Sequence[int], inst: Instance) -> tuple[int, ...]:
    """Validate shape and ranges of a plan against an instance."""
    if len(plan) != inst.k:
        raise InvariantError(
            f"plan covers {len(plan)} steps, instance has {inst.k}")
    for s, u in enumerate(plan):
        if not (isinstance(u, int) and 0 <= u < inst.n):
            raise InvariantError(f"plan: step {s} assigned invalid user {u!r}")
    return tuple(plan)


def is_valid(plan: Sequence[int], inst: Instance) -> bool:
    """Authorised and eligible for every constraint."""
    p = check_plan(plan, inst)
    if not is_authorised(p, inst.auth):
        return False
    return all(is_eligible(p, c) for c in inst.constraints)


def violated_constraints(plan: Sequence[int], inst: Instance) -> list[Constraint]:
    """All constraints the plan breaks (authorisation violations excluded)."""
    p = check_plan(plan, inst)
    return [c for c in inst.constraints if not is_eligible(p, c)]
