"""Pure-Python search backend.

Reference implementation of the kernel contract; the compiled backend mirrors
this algorithm word for word, so the two can be cross-checked node count for
node count.  User sets are Python integers used as bitmasks.

State is kept in depth-indexed arrays: entering depth d copies the parent
slice and mutates the copy, so backtracking needs no undo log.  Per
authorisation alternative ("combo") the kernel maintains a matching of
blocks to users; a combo whose matching can no longer saturate the blocks is
dead for the entire subtree because masks only shrink along a branch.
"""

from __future__ import annotations

import time
from typing import Optional, Sequence

UNSAT, SAT, BUDGET = 0, 1, 2

_TIME_CHECK_EVERY = 2048


def run_search(
    prob,
    max_nodes: Optional[int] = None,
    max_patterns: Optional[int] = None,
    deadline: Optional[float] = None,
    prefix: Sequence[int] = (),
):
    """Run the depth-first pattern search.

    Returns (status, plan | None, patterns, nodes, matchings) where `plan`
    maps original step ids to users.  `deadline` is an absolute
    time.perf_counter() value; `prefix` fixes the block choices of the first
    len(prefix) depths, which is how parallel mode splits the tree.
    """
    k = prob.k
    m = len(prob.combo_masks)
    combo_masks = prob.combo_masks
    sod_prev = prob.sod_prev
    bod_prev = prob.bod_prev
    counts = prob.counts
    count_at = prob.count_at
    suals = prob.suals
    sual_at = prob.sual_at
    nC = len(counts)
    nS = len(suals)

    # depth-indexed state; row d+1 is rebuilt from row d on every descent
    bmask = [[[0] * k for _ in range(m)] for _ in range(k + 1)]
    match = [[[-1] * k for _ in range(m)] for _ in range(k + 1)]
    alive = [[True] * m for _ in range(k + 1)]
    ccover = [[0] * nC for _ in range(k + 1)]
    scover = [[0] * nS for _ in range(k + 1)]
    sassigned = [[0] * nS for _ in range(k + 1)]
    assign = [0] * k

    stats = {"patterns": 0, "nodes": 0, "matchings": 0}
    result: list[Optional[list[int]]] = [None]

    def augment(rows: list[int], mrow: list[int], nb: int, b: int, seen: list[int]) -> bool:
        # Kuhn augmenting path from block b, users tried in ascending order.
        avail = rows[b] & ~seen[0]
        while avail:
            lsb = avail & -avail
            u = lsb.bit_length() - 1
            avail ^= lsb
            seen[0] |= lsb
            owner = -1
            for bb in range(nb):
                if mrow[bb] == u:
                    owner = bb
                    break
            if owner < 0 or augment(rows, mrow, nb, owner, seen):
                mrow[b] = u
                return True
        return False

    def apply_choice(d: int, nb: int, b: int) -> int:
        """Assign depth d's step to block b; build depth d+1 state.

        Returns the new block count, or -1 when the choice is rejected.
        Rejections before the node counter are structural (user-independent
        constraints); rejections after it mean every authorisation
        alternative lost its saturating matching.
        """
        for e in sod_prev[d]:
            if assign[e] == b:
                return -1
        for e in bod_prev[d]:
            if assign[e] != b:
                return -1
        bbit = 1 << b
        for ci in count_at[d]:
            spec = counts[ci]
            cov = ccover[d][ci] | bbit
            distinct = cov.bit_count()
            if spec.at_most:
                if distinct > spec.r:
                    return -1
            else:
                remaining = len(spec.depths) - spec.depths.index(d) - 1
                if distinct + remaining < spec.r:
                    return -1

        stats["nodes"] += 1
        if max_nodes is not None and stats["nodes"] > max_nodes:
            return -2
        if deadline is not None and stats["nodes"] % _TIME_CHECK_EVERY == 0:
            if time.perf_counter() > deadline:
                return -2

        assign[d] = b
        nb2 = nb + 1 if b == nb else nb
        d1 = d + 1

        crow, crow1 = ccover[d], ccover[d1]
        for ci in range(nC):
            crow1[ci] = crow[ci]
        for ci in count_at[d]:
            crow1[ci] |= bbit

        srow, srow1 = scover[d], scover[d1]
        arow, arow1 = sassigned[d], sassigned[d1]
        for si in range(nS):
            srow1[si] = srow[si]
            arow1[si] = arow[si]
        restricted = []
        for si in sual_at[d]:
            cov = srow[si] | bbit
            srow1[si] = cov
            arow1[si] = arow[si] + 1
            spec = suals[si]
            if arow1[si] == len(spec.depths) and cov.bit_count() <= spec.h:
                restricted.append(si)

        par_alive, ch_alive = alive[d], alive[d1]
        any_alive = False
        for c in range(m):
            if not par_alive[c]:
                ch_alive[c] = False
                continue
            rows_p = bmask[d][c]
            rows = bmask[d1][c]
            rows[0:nb] = rows_p[0:nb]
            mrow_p = match[d][c]
            mrow = match[d1][c]
            mrow[0:nb] = mrow_p[0:nb]
            ok = True
            step_mask = combo_masks[c][d]
            if b == nb:
                rows[nb] = step_mask
                mrow[nb] = -1
                ok = augment(rows, mrow, nb2, nb, [0])
            else:
                newm = rows[b] & step_mask
                rows[b] = newm
                if newm == 0:
                    ok = False
                elif mrow[b] >= 0 and not (newm >> mrow[b]) & 1:
                    mrow[b] = -1
                    ok = augment(rows, mrow, nb2, b, [0])
            if ok:
                for si in restricted:
                    xmask = suals[si].xmask
                    cov = srow1[si]
                    while cov:
                        lsb = cov & -cov
                        bb = lsb.bit_length() - 1
                        cov ^= lsb
                        newm = rows[bb] & xmask
                        if newm != rows[bb]:
                            rows[bb] = newm
                            if newm == 0:
                                ok = False
                                break
                            if mrow[bb] >= 0 and not (newm >> mrow[bb]) & 1:
                                mrow[bb] = -1
                                if not augment(rows, mrow, nb2, bb, [0]):
                                    ok = False
                                    break
                    if not ok:
                        break
            ch_alive[c] = ok
            any_alive = any_alive or ok
        if not any_alive:
            return -1
        return nb2

    def extract_plan(d: int) -> list[int]:
        mrow = None
        for c in range(m):
            if alive[d][c]:
                mrow = match[d][c]
                break
        assert mrow is not None
        stats["matchings"] += 1
        plan = [0] * k
        for e in range(k):
            plan[prob.order[e]] = mrow[assign[e]]
        return plan

    def search(d: int, nb: int) -> int:
        for b in range(nb + 1):
            nb2 = apply_choice(d, nb, b)
            if nb2 == -2:
                return BUDGET
            if nb2 < 0:
                continue
            if d + 1 == k:
                stats["patterns"] += 1
                if max_patterns is not None and stats["patterns"] > max_patterns:
                    return BUDGET
                result[0] = extract_plan(d + 1)
                return SAT
            got = search(d + 1, nb2)
            if got != UNSAT:
                return got
        return UNSAT

    if k == 0 or m == 0:
        return (UNSAT, None, 0, 0, 0)

    # replay a fixed prefix (parallel mode); a rejected prefix is just an
    # exhausted branch
    d, nb = 0, 0
    status = None
    for b in prefix:
        if b > nb:
            status = UNSAT  # not a canonical choice; empty branch
            break
        nb2 = apply_choice(d, nb, b)
        if nb2 == -2:
            status = BUDGET
            break
        if nb2 < 0:
            status = UNSAT
            break
        d, nb = d + 1, nb2
        if d == k:
            stats["patterns"] += 1
            result[0] = extract_plan(d)
            status = SAT
            break

    if status is None:
        status = search(d, nb)
    plan = result[0] if status == SAT else None
    return (status, plan, stats["patterns"], stats["nodes"], stats["matchings"])
