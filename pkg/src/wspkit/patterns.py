"""Step partitions in canonical restricted-growth form.

A pattern records which steps share a user, as the set partition a plan
induces.  Canonical form is the restricted growth string (RGS): block labels
assigned in order of first appearance, so rgs[0] == 0 and every later entry
is at most one above the running maximum.  Two plans induce the same pattern
iff they induce the same RGS, which makes equality and hashing cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .core import AtLeast, AtMost, BoD, Constraint, InvariantError, SoD, _require


@dataclass(frozen=True)
class Pattern:
    """A set partition of steps 0..len(rgs)-1 in canonical RGS form."""

    rgs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rgs", tuple(self.rgs))
        _require(len(self.rgs) >= 1, "pattern: needs at least one step")
        top = -1
        for i, b in enumerate(self.rgs):
            if not (isinstance(b, int) and 0 <= b <= top + 1):
                raise InvariantError(
                    f"pattern: entry {i} = {b!r} breaks restricted growth "
                    f"(expected 0..{top + 1})")
            top = max(top, b)

    @property
    def k(self) -> int:
        return len(self.rgs)

    @property
    def block_count(self) -> int:
        return max(self.rgs) + 1

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        """Blocks as step tuples, indexed by block label."""
        out: list[list[int]] = [[] for _ in range(self.block_count)]
        for s, b in enumerate(self.rgs):
            out[b].append(s)
        return tuple(tuple(block) for block in out)

    def block_of(self, s: int) -> int:
        return self.rgs[s]

    def to_text(self) -> str:
        return ",".join(str(b) for b in self.rgs)

    @classmethod
    def from_text(cls, text: str) -> "Pattern":
        try:
            rgs = tuple(int(part) for part in text.split(","))
        except ValueError as e:
            raise InvariantError(f"pattern text {text!r} is not comma-separated integers") from e
        return cls(rgs)


def pattern_of(plan: Sequence[int]) -> Pattern:
    """The pattern a plan induces: steps sharing a user share a block."""
    _require(len(plan) >= 1, "pattern_of: empty plan")
    label: dict[int, int] = {}
    rgs = []
    for u in plan:
        if u not in label:
            label[u] = len(label)
        rgs.append(label[u])
    return Pattern(tuple(rgs))


def extend(prefix: Pattern, choice: int) -> Pattern:
    """Extend a pattern by one step joining block `choice` (or opening a new
    block when choice == prefix.block_count)."""
    nb = prefix.block_count
    _require(0 <= choice <= nb,
             f"extend: choice {choice} outside [0, {nb}]")
    return Pattern(prefix.rgs + (choice,))


def bell(k: int) -> int:
    """Number of set partitions of k elements, via the Bell triangle.

    Exact big-integer arithmetic; no overflow concerns.
    """
    _require(k >= 0, "bell: k must be >= 0")
    row = [1]
    for _ in range(k):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def enumerate_patterns(k: int, prefix: Sequence[int] = ()) -> Iterator[Pattern]:
    """All patterns over k steps in lexicographic RGS order.

    k == 0 gives an empty stream.  A non-empty `prefix` restricts the stream
    to patterns extending that RGS prefix, which lets pattern ranges be split
    deterministically across workers.
    """
    _require(k >= 0, "enumerate_patterns: k must be >= 0")
    if k == 0:
        return
    base = list(prefix)
    if base:
        Pattern(tuple(base))  # canonical-form check
        _require(len(base) <= k, "enumerate_patterns: prefix longer than k")
    else:
        base = [0]
    rgs = base + [0] * (k - len(base))
    top = max(base)

    def rec(i: int, top: int) -> Iterator[Pattern]:
        if i == k:
            yield Pattern(tuple(rgs))
            return
        for b in range(top + 2):
            rgs[i] = b
            yield from rec(i + 1, top if b <= top else b)

    yield from rec(len(base), top)


def pattern_satisfies(p: Pattern, c: Constraint) -> bool:
    """Pattern-level satisfaction for user-independent constraints.

    Every plan with pattern p satisfies c iff p does; that is what makes
    these constraints checkable before any users are chosen.  Raises for
    constraint kinds whose satisfaction depends on user identities.
    """
    if isinstance(c, SoD):
        return p.rgs[c.s1] != p.rgs[c.s2]
    if isinstance(c, BoD):
        return p.rgs[c.s1] == p.rgs[c.s2]
    if isinstance(c, AtMost):
        return len({p.rgs[s] for s in c.scope}) <= c.r
    if isinstance(c, AtLeast):
        return len({p.rgs[s] for s in c.scope}) >= c.r
    raise InvariantError(
        f"{type(c).__name__} is not user-independent; it has no pattern-level check")


def pattern_eligible(p: Pattern, constraints: Sequence[Constraint]) -> bool:
    """All user-independent constraints satisfied at the pattern level."""
    return all(pattern_satisfies(p, c) for c in constraints)
