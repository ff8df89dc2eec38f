"""Shared fixtures and independent oracles.

The oracles here deliberately take different routes than the package code
they check: Bell numbers come from a Stirling-number sum instead of the
triangle, maximum matchings from exhaustive recursion instead of
Hopcroft-Karp, and valid-plan sets from longhand semantics over the full
plan space where affordable.
"""

from __future__ import annotations

import itertools
import random

import pytest

from wspkit.core import (
    ADA,
    AtLeast,
    AtMost,
    AuthorisationFunction,
    BoD,
    Instance,
    SUAL,
    SoD,
    WL,
)


def purchase_order_instance() -> Instance:
    """Six-step purchase-order workflow over eight users; four
    separation-of-duty pairs and one binding-of-duty pair."""
    auth = AuthorisationFunction.from_lists(
        [[0, 1], [1, 2], [0, 2], [2, 3], [2, 3, 4, 7], [4, 5, 6]], 8)
    constraints = (SoD(0, 1), SoD(0, 3), SoD(2, 4), SoD(3, 5), BoD(0, 2))
    return Instance(6, 8, auth, constraints)


PO_PLAN = (0, 1, 0, 3, 2, 4)          # a known valid plan
PO_PATTERN_RGS = (0, 1, 0, 2, 3, 4)   # its canonical pattern
PO_VALID_COUNT = 48                   # exhaustively enumerated


@pytest.fixture
def po_instance() -> Instance:
    return purchase_order_instance()


# --- independent oracles -----------------------------------------------------


def bell_oracle(k: int) -> int:
    """Bell number via Stirling numbers of the second kind."""
    S = [[0] * (k + 1) for _ in range(k + 1)]
    S[0][0] = 1
    for i in range(1, k + 1):
        for j in range(1, i + 1):
            S[i][j] = j * S[i - 1][j] + S[i - 1][j - 1]
    return sum(S[k])


def matching_oracle(block_masks, n) -> int:
    """Maximum matching size by exhaustive recursion (small graphs only)."""
    nb = len(block_masks)

    def best(b: int, used: int) -> int:
        if b == nb:
            return 0
        top = best(b + 1, used)  # leave block b unmatched
        avail = block_masks[b] & ~used
        while avail:
            lsb = avail & -avail
            avail ^= lsb
            top = max(top, 1 + best(b + 1, used | lsb))
        return top

    return best(0, 0)


def valid_plans_longhand(inst: Instance) -> set[tuple[int, ...]]:
    """Every valid plan, by scanning the full n^k space with the plan-level
    definitions written out."""
    out = set()
    for plan in itertools.product(range(inst.n), repeat=inst.k):
        if not all(inst.auth.allows(s, plan[s]) for s in range(inst.k)):
            continue
        ok = True
        for c in inst.constraints:
            if isinstance(c, SoD):
                ok = plan[c.s1] != plan[c.s2]
            elif isinstance(c, BoD):
                ok = plan[c.s1] == plan[c.s2]
            elif isinstance(c, AtMost):
                ok = len({plan[s] for s in c.scope}) <= c.r
            elif isinstance(c, AtLeast):
                ok = len({plan[s] for s in c.scope}) >= c.r
            elif isinstance(c, SUAL):
                used = {plan[s] for s in c.scope}
                ok = len(used) > c.h or used <= c.supers
            elif isinstance(c, WL):
                used = {plan[s] for s in c.scope}
                ok = any(used <= team for team in c.teams)
            elif isinstance(c, ADA):
                ok = plan[c.s1] not in c.trigger or plan[c.s2] in c.required
            if not ok:
                break
        if ok:
            out.add(plan)
    return out


# --- random instance sampler -------------------------------------------------

CONSTRAINT_KINDS = ("sod", "bod", "atmost", "atleast", "sual", "wl", "ada")


def _random_constraint(rng: random.Random, kind: str, k: int, n: int):
    if kind == "sod":
        s1, s2 = rng.sample(range(k), 2)
        return SoD(s1, s2)
    if kind == "bod":
        s1, s2 = rng.sample(range(k), 2)
        return BoD(s1, s2)
    if kind == "atmost":
        t = rng.randint(2, k)
        return AtMost(rng.randint(1, max(1, t - 1)), tuple(rng.sample(range(k), t)))
    if kind == "atleast":
        t = rng.randint(2, k)
        return AtLeast(rng.randint(1, t), tuple(rng.sample(range(k), t)))
    if kind == "sual":
        t = rng.randint(2, k)
        h = rng.randint(1, t - 1)
        supers = rng.sample(range(n), rng.randint(1, max(1, n // 2)))
        return SUAL(tuple(rng.sample(range(k), t)), h, frozenset(supers))
    if kind == "wl":
        t = rng.randint(2, k)
        d = rng.randint(1, min(3, n))
        pool = rng.sample(range(n), rng.randint(d, n))
        teams, at = [], 0
        for i in range(d):
            size = 1 if i < d - 1 else len(pool) - at
            teams.append(frozenset(pool[at:at + size]))
            at += size
        return WL(tuple(rng.sample(range(k), t)), tuple(teams))
    if kind == "ada":
        s1, s2 = rng.sample(range(k), 2)
        trig = rng.sample(range(n), rng.randint(1, n))
        req = rng.sample(range(n), rng.randint(1, n))
        return ADA(s1, s2, frozenset(trig), frozenset(req))
    raise ValueError(kind)


def random_instance(kind: str, seed: int, k_max: int = 5, n_max: int = 8) -> Instance:
    """A small random instance for cross-checking; `kind` picks the
    constraint mix ("mixed" draws from the whole catalogue)."""
    rng = random.Random(f"{kind}-{seed}")
    k = rng.randint(2, k_max)
    n = rng.randint(2, n_max)
    lists = []
    for _ in range(k):
        density = 0.25 + rng.random() * 0.55
        users = [u for u in range(n) if rng.random() < density]
        if not users and rng.random() < 0.85:
            users = [rng.randrange(n)]
        lists.append(users)
    auth = AuthorisationFunction.from_lists(lists, n)
    count = rng.randint(1, 3)
    if kind == "mixed":
        kinds = [rng.choice(CONSTRAINT_KINDS) for _ in range(rng.randint(2, 4))]
    else:
        kinds = [kind] * count
    constraints = tuple(_random_constraint(rng, kd, k, n) for kd in kinds)
    return Instance(k, n, auth, constraints)
