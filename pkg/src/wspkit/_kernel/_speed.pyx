# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search backend.

Same algorithm as _pure.py, word for word: depth-indexed copy-on-descend
state, one incrementally repaired matching per authorisation alternative,
ascending-order augmenting paths.  User sets are arrays of 64-bit words.
The two backends must stay in lockstep on node/pattern counters; change them
together or the parity tests will say so.
"""

import time

from cpython.mem cimport PyMem_Malloc, PyMem_Free
from libc.string cimport memcpy, memset

from libc.stdint cimport uint64_t, int64_t

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil
    int __builtin_popcountll(unsigned long long) nogil

UNSAT, SAT, BUDGET = 0, 1, 2

cdef int TIME_CHECK_EVERY = 2048

cdef uint64_t* _alloc_u64(size_t count) except NULL:
    cdef uint64_t* p = <uint64_t*> PyMem_Malloc(count * sizeof(uint64_t))
    if p == NULL:
        raise MemoryError()
    memset(p, 0, count * sizeof(uint64_t))
    return p

cdef int* _alloc_int(size_t count) except NULL:
    cdef int* p = <int*> PyMem_Malloc(count * sizeof(int))
    if p == NULL:
        raise MemoryError()
    memset(p, 0, count * sizeof(int))
    return p

cdef void _pack_mask(object pymask, uint64_t* out, int W):
    cdef int w
    cdef object m = pymask
    for w in range(W):
        out[w] = <uint64_t> (m & 0xFFFFFFFFFFFFFFFF)
        m >>= 64


cdef class _Engine:
    cdef int k, n, W, m, nC, nS
    cdef int* order
    cdef uint64_t* combo          # [(c*k + d)*W + w]
    cdef int* sod_off
    cdef int* sod_dat
    cdef int* bod_off
    cdef int* bod_dat
    cdef char* cnt_atmost
    cdef int* cnt_r
    cdef int* cnt_rem             # [ci*k + d]: scope members after depth d
    cdef char* cnt_member         # [ci*k + d]
    cdef int* cat_off
    cdef int* cat_dat
    cdef int* su_h
    cdef int* su_len
    cdef uint64_t* su_x           # [si*W + w]
    cdef int* sat_off
    cdef int* sat_dat
    # search state, depth-major
    cdef uint64_t* bmask          # [((d*m + c)*k + b)*W + w]
    cdef int* match               # [(d*m + c)*k + b]
    cdef char* alive              # [d*m + c]
    cdef uint64_t* ccover         # [d*nC + ci]
    cdef uint64_t* scover         # [d*nS + si]
    cdef int* sassign             # [d*nS + si]
    cdef int* assign
    cdef uint64_t* seen           # augment scratch, W words
    cdef int* restricted          # scratch, <= nS entries
    cdef int* plan_out
    # counters and budget
    cdef int64_t nodes, patterns, matchings
    cdef int64_t max_nodes, max_patterns
    cdef double deadline
    cdef int out_of_time

    def __cinit__(self):
        self.order = NULL; self.combo = NULL
        self.sod_off = NULL; self.sod_dat = NULL
        self.bod_off = NULL; self.bod_dat = NULL
        self.cnt_atmost = NULL; self.cnt_r = NULL
        self.cnt_rem = NULL; self.cnt_member = NULL
        self.cat_off = NULL; self.cat_dat = NULL
        self.su_h = NULL; self.su_len = NULL; self.su_x = NULL
        self.sat_off = NULL; self.sat_dat = NULL
        self.bmask = NULL; self.match = NULL; self.alive = NULL
        self.ccover = NULL; self.scover = NULL; self.sassign = NULL
        self.assign = NULL; self.seen = NULL; self.restricted = NULL
        self.plan_out = NULL

    def __dealloc__(self):
        PyMem_Free(self.order); PyMem_Free(self.combo)
        PyMem_Free(self.sod_off); PyMem_Free(self.sod_dat)
        PyMem_Free(self.bod_off); PyMem_Free(self.bod_dat)
        PyMem_Free(self.cnt_atmost); PyMem_Free(self.cnt_r)
        PyMem_Free(self.cnt_rem); PyMem_Free(self.cnt_member)
        PyMem_Free(self.cat_off); PyMem_Free(self.cat_dat)
        PyMem_Free(self.su_h); PyMem_Free(self.su_len); PyMem_Free(self.su_x)
        PyMem_Free(self.sat_off); PyMem_Free(self.sat_dat)
        PyMem_Free(self.bmask); PyMem_Free(self.match); PyMem_Free(self.alive)
        PyMem_Free(self.ccover); PyMem_Free(self.scover); PyMem_Free(self.sassign)
        PyMem_Free(self.assign); PyMem_Free(self.seen); PyMem_Free(self.restricted)
        PyMem_Free(self.plan_out)

    cdef void _load(self, prob):
        cdef int k = prob.k
        cdef int n = prob.n
        cdef int W = (n + 63) // 64
        cdef int m = len(prob.combo_masks)
        cdef int nC = len(prob.counts)
        cdef int nS = len(prob.suals)
        self.k, self.n, self.W, self.m, self.nC, self.nS = k, n, W, m, nC, nS

        cdef int d, c, i, j, ci, si
        self.order = _alloc_int(k)
        for d in range(k):
            self.order[d] = prob.order[d]

        self.combo = _alloc_u64(<size_t> m * k * W)
        for c in range(m):
            for d in range(k):
                _pack_mask(prob.combo_masks[c][d], self.combo + (c * k + d) * W, W)

        self.sod_off = _alloc_int(k + 1)
        self.bod_off = _alloc_int(k + 1)
        total = sum(len(x) for x in prob.sod_prev)
        self.sod_dat = _alloc_int(max(1, total))
        i = 0
        for d in range(k):
            self.sod_off[d] = i
            for e in prob.sod_prev[d]:
                self.sod_dat[i] = e; i += 1
        self.sod_off[k] = i
        total = sum(len(x) for x in prob.bod_prev)
        self.bod_dat = _alloc_int(max(1, total))
        i = 0
        for d in range(k):
            self.bod_off[d] = i
            for e in prob.bod_prev[d]:
                self.bod_dat[i] = e; i += 1
        self.bod_off[k] = i

        self.cnt_atmost = <char*> PyMem_Malloc(max(1, nC))
        self.cnt_r = _alloc_int(max(1, nC))
        self.cnt_rem = _alloc_int(max(1, nC * k))
        self.cnt_member = <char*> PyMem_Malloc(max(1, nC * k))
        memset(self.cnt_member, 0, max(1, nC * k))
        for ci in range(nC):
            spec = prob.counts[ci]
            self.cnt_atmost[ci] = 1 if spec.at_most else 0
            self.cnt_r[ci] = spec.r
            depths = spec.depths
            for j in range(len(depths)):
                d = depths[j]
                self.cnt_member[ci * k + d] = 1
                self.cnt_rem[ci * k + d] = len(depths) - j - 1
        self.cat_off = _alloc_int(k + 1)
        total = sum(len(x) for x in prob.count_at)
        self.cat_dat = _alloc_int(max(1, total))
        i = 0
        for d in range(k):
            self.cat_off[d] = i
            for ci in prob.count_at[d]:
                self.cat_dat[i] = ci; i += 1
        self.cat_off[k] = i

        self.su_h = _alloc_int(max(1, nS))
        self.su_len = _alloc_int(max(1, nS))
        self.su_x = _alloc_u64(<size_t> max(1, nS * W))
        for si in range(nS):
            spec = prob.suals[si]
            self.su_h[si] = spec.h
            self.su_len[si] = len(spec.depths)
            _pack_mask(spec.xmask, self.su_x + si * W, W)
        self.sat_off = _alloc_int(k + 1)
        total = sum(len(x) for x in prob.sual_at)
        self.sat_dat = _alloc_int(max(1, total))
        i = 0
        for d in range(k):
            self.sat_off[d] = i
            for si in prob.sual_at[d]:
                self.sat_dat[i] = si; i += 1
        self.sat_off[k] = i

        self.bmask = _alloc_u64(<size_t> (k + 1) * m * k * W)
        self.match = _alloc_int((k + 1) * m * k)
        self.alive = <char*> PyMem_Malloc((k + 1) * m)
        memset(self.alive, 0, (k + 1) * m)
        for c in range(m):
            self.alive[c] = 1
        self.ccover = _alloc_u64(<size_t> max(1, (k + 1) * nC))
        self.scover = _alloc_u64(<size_t> max(1, (k + 1) * nS))
        self.sassign = _alloc_int(max(1, (k + 1) * nS))
        self.assign = _alloc_int(k)
        self.seen = _alloc_u64(W)
        self.restricted = _alloc_int(max(1, nS))
        self.plan_out = _alloc_int(k)

    cdef int _augment(self, uint64_t* rows, int* mrow, int nb, int b):
        # Kuhn augmenting path from block b over the shared `seen` scratch;
        # callers clear `seen` before the top-level call.
        cdef int W = self.W
        cdef int w, u, bb, owner
        cdef uint64_t word, bit
        for w in range(W):
            word = rows[b * W + w] & ~self.seen[w]
            while word != 0:
                bit = word & (~word + 1)
                u = w * 64 + __builtin_ctzll(word)
                word ^= bit
                self.seen[w] |= bit
                owner = -1
                for bb in range(nb):
                    if mrow[bb] == u:
                        owner = bb
                        break
                if owner < 0 or self._augment(rows, mrow, nb, owner):
                    mrow[b] = u
                    return 1
        return 0

    cdef int _apply_choice(self, int d, int nb, int b):
        """Returns new block count, -1 on rejection, -2 on budget stop."""
        cdef int k = self.k
        cdef int W = self.W
        cdef int m = self.m
        cdef int nC = self.nC
        cdef int nS = self.nS
        cdef int i, e, ci, si, c, w, bb, nb2, d1
        cdef int distinct, n_restricted
        cdef uint64_t bbit = (<uint64_t> 1) << b
        cdef uint64_t cov
        cdef char ok, any_alive

        for i in range(self.sod_off[d], self.sod_off[d + 1]):
            if self.assign[self.sod_dat[i]] == b:
                return -1
        for i in range(self.bod_off[d], self.bod_off[d + 1]):
            if self.assign[self.bod_dat[i]] != b:
                return -1
        for i in range(self.cat_off[d], self.cat_off[d + 1]):
            ci = self.cat_dat[i]
            cov = self.ccover[d * nC + ci] | bbit
            distinct = __builtin_popcountll(cov)
            if self.cnt_atmost[ci]:
                if distinct > self.cnt_r[ci]:
                    return -1
            else:
                if distinct + self.cnt_rem[ci * k + d] < self.cnt_r[ci]:
                    return -1

        self.nodes += 1
        if self.max_nodes >= 0 and self.nodes > self.max_nodes:
            return -2
        if self.deadline >= 0 and self.nodes % TIME_CHECK_EVERY == 0:
            if time.perf_counter() > self.deadline:
                self.out_of_time = 1
                return -2

        self.assign[d] = b
        nb2 = nb + 1 if b == nb else nb
        d1 = d + 1

        for ci in range(nC):
            self.ccover[d1 * nC + ci] = self.ccover[d * nC + ci]
        for i in range(self.cat_off[d], self.cat_off[d + 1]):
            ci = self.cat_dat[i]
            self.ccover[d1 * nC + ci] |= bbit

        n_restricted = 0
        for si in range(nS):
            self.scover[d1 * nS + si] = self.scover[d * nS + si]
            self.sassign[d1 * nS + si] = self.sassign[d * nS + si]
        for i in range(self.sat_off[d], self.sat_off[d + 1]):
            si = self.sat_dat[i]
            cov = self.scover[d * nS + si] | bbit
            self.scover[d1 * nS + si] = cov
            self.sassign[d1 * nS + si] = self.sassign[d * nS + si] + 1
            if self.sassign[d1 * nS + si] == self.su_len[si] and \
                    __builtin_popcountll(cov) <= self.su_h[si]:
                self.restricted[n_restricted] = si
                n_restricted += 1

        cdef uint64_t* rows_p
        cdef uint64_t* rows
        cdef int* mrow_p
        cdef int* mrow
        cdef uint64_t* step_mask
        cdef uint64_t* xm
        cdef uint64_t newm_nonzero, changed
        cdef int mu, ri
        any_alive = 0
        for c in range(m):
            if not self.alive[d * m + c]:
                self.alive[d1 * m + c] = 0
                continue
            rows_p = self.bmask + ((<size_t> d * m + c) * k) * W
            rows = self.bmask + ((<size_t> d1 * m + c) * k) * W
            memcpy(rows, rows_p, <size_t> nb * W * sizeof(uint64_t))
            mrow_p = self.match + (d * m + c) * k
            mrow = self.match + (d1 * m + c) * k
            memcpy(mrow, mrow_p, <size_t> nb * sizeof(int))
            ok = 1
            step_mask = self.combo + ((<size_t> c * k + d)) * W
            if b == nb:
                memcpy(rows + nb * W, step_mask, <size_t> W * sizeof(uint64_t))
                mrow[nb] = -1
                memset(self.seen, 0, <size_t> W * sizeof(uint64_t))
                ok = <char> self._augment(rows, mrow, nb2, nb)
            else:
                newm_nonzero = 0
                changed = 0
                for w in range(W):
                    cov = rows[b * W + w] & step_mask[w]
                    if cov != rows[b * W + w]:
                        changed = 1
                    rows[b * W + w] = cov
                    newm_nonzero |= cov
                if newm_nonzero == 0:
                    ok = 0
                elif changed:
                    mu = mrow[b]
                    if mu >= 0 and not (rows[b * W + (mu >> 6)] >> (mu & 63)) & 1:
                        mrow[b] = -1
                        memset(self.seen, 0, <size_t> W * sizeof(uint64_t))
                        ok = <char> self._augment(rows, mrow, nb2, b)
            if ok:
                for ri in range(n_restricted):
                    si = self.restricted[ri]
                    xm = self.su_x + si * W
                    cov = self.scover[d1 * nS + si]
                    while cov != 0:
                        bb = __builtin_ctzll(cov)
                        cov &= cov - 1
                        newm_nonzero = 0
                        changed = 0
                        for w in range(W):
                            if rows[bb * W + w] & ~xm[w]:
                                changed = 1
                            rows[bb * W + w] &= xm[w]
                            newm_nonzero |= rows[bb * W + w]
                        if not changed:
                            continue
                        if newm_nonzero == 0:
                            ok = 0
                            break
                        mu = mrow[bb]
                        if mu >= 0 and not (rows[bb * W + (mu >> 6)] >> (mu & 63)) & 1:
                            mrow[bb] = -1
                            memset(self.seen, 0, <size_t> W * sizeof(uint64_t))
                            if not self._augment(rows, mrow, nb2, bb):
                                ok = 0
                                break
                    if not ok:
                        break
            self.alive[d1 * m + c] = ok
            if ok:
                any_alive = 1
        if not any_alive:
            return -1
        return nb2

    cdef void _extract_plan(self, int d):
        cdef int c, e
        cdef int* mrow = NULL
        for c in range(self.m):
            if self.alive[d * self.m + c]:
                mrow = self.match + (d * self.m + c) * self.k
                break
        self.matchings += 1
        for e in range(self.k):
            self.plan_out[self.order[e]] = mrow[self.assign[e]]

    cdef int _search(self, int d, int nb):
        cdef int b, nb2, got
        for b in range(nb + 1):
            nb2 = self._apply_choice(d, nb, b)
            if nb2 == -2:
                return 2
            if nb2 < 0:
                continue
            if d + 1 == self.k:
                self.patterns += 1
                if self.max_patterns >= 0 and self.patterns > self.max_patterns:
                    return 2
                self._extract_plan(d + 1)
                return 1
            got = self._search(d + 1, nb2)
            if got != 0:
                return got
        return 0


def run_search(prob, max_nodes=None, max_patterns=None, deadline=None, prefix=()):
    """Compiled twin of the pure backend's run_search; same contract."""
    cdef int k = prob.k
    cdef int m = len(prob.combo_masks)
    if k == 0 or m == 0:
        return (0, None, 0, 0, 0)

    cdef _Engine eng = _Engine()
    eng._load(prob)
    eng.nodes = 0
    eng.patterns = 0
    eng.matchings = 0
    eng.max_nodes = -1 if max_nodes is None else max_nodes
    eng.max_patterns = -1 if max_patterns is None else max_patterns
    eng.deadline = -1.0 if deadline is None else deadline
    eng.out_of_time = 0

    cdef int d = 0
    cdef int nb = 0
    cdef int nb2
    cdef int status = -1
    for b in prefix:
        if b > nb:
            status = 0
            break
        nb2 = eng._apply_choice(d, nb, b)
        if nb2 == -2:
            status = 2
            break
        if nb2 < 0:
            status = 0
            break
        d += 1
        nb = nb2
        if d == k:
            eng.patterns += 1
            eng._extract_plan(d)
            status = 1
            break

    if status < 0:
        status = eng._search(d, nb)

    plan = None
    if status == 1:
        plan = [eng.plan_out[i] for i in range(k)]
    return (status, plan, eng.patterns, eng.nodes, eng.matchings)
