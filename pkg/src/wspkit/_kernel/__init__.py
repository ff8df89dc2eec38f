"""Search kernel: depth-first pattern construction with incremental matching.

The kernel walks restricted-growth prefixes (each step joins an existing
block or opens a new one), prunes user-independent constraints structurally,
and keeps one incrementally-repaired block/user matching per authorisation
alternative.  Two interchangeable backends implement the same contract: the
compiled extension (_speed, built from Cython) and the pure-Python reference
(_pure).  Selection happens at import; set WSPKIT_KERNEL=pure or
WSPKIT_KERNEL=compiled to force one.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

UNSAT, SAT, BUDGET = 0, 1, 2

KERNEL_MAX_STEPS = 64  # block labels and cover sets live in single machine words


@dataclass(frozen=True)
class CountSpec:
    """An at-most/at-least bound on distinct users over scope depths."""

    at_most: bool
    r: int
    depths: tuple[int, ...]  # ascending positions in visit order


@dataclass(frozen=True)
class SualSpec:
    """Super-user restriction: once all scope depths are assigned within at
    most h blocks, those blocks' users must come from xmask."""

    depths: tuple[int, ...]
    h: int
    xmask: int


@dataclass(frozen=True)
class SearchProblem:
    """A compiled instance, fully reindexed into visit-depth space.

    combo_masks[c][d] is the user bitmask that authorisation alternative c
    allows for the step visited at depth d.
    """

    k: int
    n: int
    order: tuple[int, ...]
    combo_masks: tuple[tuple[int, ...], ...]
    sod_prev: tuple[tuple[int, ...], ...]
    bod_prev: tuple[tuple[int, ...], ...]
    counts: tuple[CountSpec, ...] = ()
    count_at: tuple[tuple[int, ...], ...] = field(default=None)  # type: ignore[assignment]
    suals: tuple[SualSpec, ...] = ()
    sual_at: tuple[tuple[int, ...], ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.count_at is None:
            object.__setattr__(self, "count_at", _memberships(self.k, [c.depths for c in self.counts]))
        if self.sual_at is None:
            object.__setattr__(self, "sual_at", _memberships(self.k, [s.depths for s in self.suals]))


def _memberships(k: int, scopes) -> tuple[tuple[int, ...], ...]:
    at: list[list[int]] = [[] for _ in range(k)]
    for i, depths in enumerate(scopes):
        for d in depths:
            at[d].append(i)
    return tuple(tuple(x) for x in at)


_requested = os.environ.get("WSPKIT_KERNEL", "auto")

if _requested == "pure":
    from . import _pure as _impl
    BACKEND = "pure"
else:
    try:
        from . import _speed as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _pure as _impl
        BACKEND = "pure"

run_search = _impl.run_search


def available_backends() -> tuple[str, ...]:
    names = ["pure"]
    try:
        from . import _speed  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return tuple(names)


def backend_run_search(name: str):
    """Fetch a specific backend's run_search (for benchmarks and tests)."""
    if name in ("auto", BACKEND):
        return run_search
    if name == "pure":
        from . import _pure
        return _pure.run_search
    if name == "compiled":
        from . import _speed  # raises ImportError when not built
        return _speed.run_search
    raise ValueError(f"unknown kernel backend {name!r}")
