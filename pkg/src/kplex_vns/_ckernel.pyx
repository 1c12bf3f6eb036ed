# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled search kernel.

Makes the same moves and random draws as _pykernel. Local search additionally
keeps, per partition, the number of members one neighbor short of flipping
their correctness, which gives the change in correct_total of a probe in O(1)
and lets probes that lose correct vertices be rejected without a full
evaluation (such probes can never be strict improvements).
"""

from collections import namedtuple

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t
from libc.string cimport memcpy
from numpy.random cimport bitgen_t
from posix.time cimport CLOCK_MONOTONIC, clock_gettime, timespec

BACKEND = "cython"

MoveRecord = namedtuple(
    "MoveRecord",
    "v source target created emptied relabeled correct_total w_sol",
)

cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef int PAIRWISE_MAX = 8


cdef void* cnp_data(object arr) except NULL:
    # arrays are C-contiguous and kept alive by the owning state
    return <void*> <size_t> arr.ctypes.data


cdef bitgen_t* _bitgen(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("not a numpy BitGenerator")
    return <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline uint64_t _bounded(bitgen_t* bg, uint64_t m) noexcept nogil:
    cdef uint64_t x = bg.next_uint64(bg.state) >> 32
    cdef uint64_t prod = x * m
    cdef uint64_t low = prod & 0xFFFFFFFFULL
    cdef uint64_t threshold
    if low < m:
        threshold = (0x100000000ULL - m) % m
        while low < threshold:
            x = bg.next_uint64(bg.state) >> 32
            prod = x * m
            low = prod & 0xFFFFFFFFULL
    return prod >> 32


cdef inline double _uniform(bitgen_t* bg) noexcept nogil:
    return (bg.next_uint64(bg.state) >> 11) * INV_2_53


cdef inline double _now() noexcept nogil:
    cdef timespec ts
    clock_gettime(CLOCK_MONOTONIC, &ts)
    return ts.tv_sec + ts.tv_nsec * 1e-9


def bounded(raw, m):
    x = raw() >> 32
    prod = x * m
    low = prod & 0xFFFFFFFF
    if low < m:
        threshold = ((1 << 32) - m) % m
        while low < threshold:
            x = raw() >> 32
            prod = x * m
            low = prod & 0xFFFFFFFF
    return prod >> 32


def uniform(raw):
    return (raw() >> 11) * INV_2_53


def random_labels(bit_generator, int n, int upper):
    cdef bitgen_t* bg = _bitgen(bit_generator)
    cdef int i
    return [<int> _bounded(bg, upper) for i in range(n)]


cdef class PartitionState:
    cdef readonly int n
    cdef readonly int k
    cdef readonly int l
    cdef readonly int64_t correct_total
    cdef readonly double w_sol
    cdef readonly double w_total
    cdef readonly double tol
    cdef readonly bint integral

    cdef object _arrays
    cdef int64_t* indptr
    cdef int32_t* indices
    cdef double* weights
    cdef int32_t* x
    cdef int32_t* deg
    cdef uint8_t* corr
    cdef double* cw
    cdef int32_t* size
    cdef int32_t* head
    cdef int32_t* nxt
    cdef int32_t* prv
    cdef int64_t* mark
    cdef int64_t stamp
    cdef int32_t* fa
    cdef int32_t* fb
    cdef int32_t* order
    cdef int32_t* perm
    cdef int nfa
    cdef int nfb
    # per-partition counts: members with deg == size-1-k / deg == size-k
    cdef int32_t* zm
    cdef int32_t* z0
    # per-vertex scan scratch, indexed by partition label
    cdef int32_t* cnt
    cdef int32_t* tz
    cdef double* wc
    cdef int32_t* touched
    cdef int ntouched

    def __init__(self, indptr, indices, weights, k, labels, w_total, integral):
        cdef int n = len(indptr) - 1
        cdef int cap = n if n > 1 else 1
        self.n = n
        self.k = k
        self.w_total = w_total
        self.integral = integral
        self.tol = 0.0 if integral else 1e-9 * w_total
        a_indptr = np.array(indptr, dtype=np.int64)
        a_indices = np.array(indices, dtype=np.int32)
        a_weights = np.array(weights, dtype=np.float64)
        a_x = np.zeros(cap, dtype=np.int32)
        a_deg = np.zeros(cap, dtype=np.int32)
        a_corr = np.zeros(cap, dtype=np.uint8)
        a_cw = np.zeros(cap, dtype=np.float64)
        a_size = np.zeros(cap + 1, dtype=np.int32)
        a_head = np.full(cap + 1, -1, dtype=np.int32)
        a_nxt = np.full(cap, -1, dtype=np.int32)
        a_prv = np.full(cap, -1, dtype=np.int32)
        a_mark = np.zeros(cap, dtype=np.int64)
        a_fa = np.zeros(cap, dtype=np.int32)
        a_fb = np.zeros(cap, dtype=np.int32)
        a_order = np.zeros(cap + 1, dtype=np.int32)
        a_perm = np.zeros(cap, dtype=np.int32)
        a_zm = np.zeros(cap + 1, dtype=np.int32)
        a_z0 = np.zeros(cap + 1, dtype=np.int32)
        a_cnt = np.zeros(cap + 1, dtype=np.int32)
        a_tz = np.zeros(cap + 1, dtype=np.int32)
        a_wc = np.zeros(cap + 1, dtype=np.float64)
        a_touched = np.zeros(cap + 1, dtype=np.int32)
        self._arrays = (a_indptr, a_indices, a_weights, a_x, a_deg, a_corr, a_cw, a_size,
                        a_head, a_nxt, a_prv, a_mark, a_fa, a_fb, a_order, a_perm,
                        a_zm, a_z0, a_cnt, a_tz, a_wc, a_touched)
        self.indptr = <int64_t*> cnp_data(a_indptr)
        self.indices = <int32_t*> cnp_data(a_indices)
        self.weights = <double*> cnp_data(a_weights)
        self.x = <int32_t*> cnp_data(a_x)
        self.deg = <int32_t*> cnp_data(a_deg)
        self.corr = <uint8_t*> cnp_data(a_corr)
        self.cw = <double*> cnp_data(a_cw)
        self.size = <int32_t*> cnp_data(a_size)
        self.head = <int32_t*> cnp_data(a_head)
        self.nxt = <int32_t*> cnp_data(a_nxt)
        self.prv = <int32_t*> cnp_data(a_prv)
        self.mark = <int64_t*> cnp_data(a_mark)
        self.fa = <int32_t*> cnp_data(a_fa)
        self.fb = <int32_t*> cnp_data(a_fb)
        self.order = <int32_t*> cnp_data(a_order)
        self.perm = <int32_t*> cnp_data(a_perm)
        self.zm = <int32_t*> cnp_data(a_zm)
        self.z0 = <int32_t*> cnp_data(a_z0)
        self.cnt = <int32_t*> cnp_data(a_cnt)
        self.tz = <int32_t*> cnp_data(a_tz)
        self.wc = <double*> cnp_data(a_wc)
        self.touched = <int32_t*> cnp_data(a_touched)
        self.ntouched = 0
        self.stamp = 0
        self.set_labels(labels)

    # -- Python-visible views ---------------------------------------------

    @property
    def size_list(self):
        return [self.size[i] for i in range(self.l)]

    def labels(self):
        return [self.x[v] for v in range(self.n)]

    def degrees(self):
        return [self.deg[v] for v in range(self.n)]

    def correct_flags(self):
        return [bool(self.corr[v]) for v in range(self.n)]

    def correct_weights(self):
        return [self.cw[v] for v in range(self.n)]

    def members_of(self, int p):
        out = []
        cdef int u = self.head[p]
        while u >= 0:
            out.append(u)
            u = self.nxt[u]
        return out

    # -- bookkeeping -------------------------------------------------------

    cdef inline void _attach(self, int v, int t) noexcept:
        cdef int h = self.head[t]
        self.nxt[v] = h
        self.prv[v] = -1
        if h >= 0:
            self.prv[h] = v
        self.head[t] = v
        self.size[t] += 1
        self.x[v] = t

    cdef inline void _detach(self, int v) noexcept:
        cdef int p = self.x[v]
        cdef int pr = self.prv[v]
        cdef int nx = self.nxt[v]
        if pr >= 0:
            self.nxt[pr] = nx
        else:
            self.head[p] = nx
        if nx >= 0:
            self.prv[nx] = pr
        self.size[p] -= 1

    def set_labels(self, labels):
        cdef int n = self.n
        cdef int v, u, c, l
        cdef int64_t e
        cdef double s, total
        xs = [int(c) for c in labels]
        if len(xs) != n:
            raise ValueError("label array has wrong length")
        l = max(xs, default=-1) + 1
        for v in range(n + 1 if n > 1 else 2):
            self.size[v] = 0
            self.head[v] = -1
        for v in range(n - 1, -1, -1):
            c = xs[v]
            if c < 0 or c >= n:
                raise ValueError("labels must be dense 0..l-1")
            self._attach(v, c)
        for c in range(l):
            if self.size[c] == 0:
                raise ValueError("labels must be dense 0..l-1")
        self.l = l
        for v in range(n):
            c = 0
            for e in range(self.indptr[v], self.indptr[v + 1]):
                if self.x[self.indices[e]] == self.x[v]:
                    c += 1
            self.deg[v] = c
        self.correct_total = 0
        for v in range(n):
            self.corr[v] = self.deg[v] >= self.size[self.x[v]] - self.k
            self.correct_total += self.corr[v]
        total = 0.0
        for v in range(n):
            s = 0.0
            for e in range(self.indptr[v], self.indptr[v + 1]):
                u = self.indices[e]
                if self.x[u] == self.x[v] and self.corr[u]:
                    s += self.weights[e]
            self.cw[v] = s
            if self.corr[v]:
                total += s
        self.w_sol = total / 2.0
        for c in range(n + 1 if n > 1 else 2):
            self._refresh(c)

    def copy_from(self, PartitionState other):
        cdef int n = self.n
        if other.n != n:
            raise ValueError("state shapes differ")
        memcpy(self.x, other.x, n * sizeof(int32_t))
        memcpy(self.deg, other.deg, n * sizeof(int32_t))
        memcpy(self.corr, other.corr, n * sizeof(uint8_t))
        memcpy(self.cw, other.cw, n * sizeof(double))
        memcpy(self.size, other.size, (n + 1) * sizeof(int32_t))
        memcpy(self.head, other.head, (n + 1) * sizeof(int32_t))
        memcpy(self.nxt, other.nxt, n * sizeof(int32_t))
        memcpy(self.prv, other.prv, n * sizeof(int32_t))
        memcpy(self.zm, other.zm, (n + 1) * sizeof(int32_t))
        memcpy(self.z0, other.z0, (n + 1) * sizeof(int32_t))
        self.l = other.l
        self.correct_total = other.correct_total
        self.w_sol = other.w_sol

    cdef inline double _key(self, int64_t ct, double ws) noexcept:
        if self.w_total > 0:
            return ct * self.w_total + ws
        return <double> ct

    cdef inline int _compare(self, int64_t ct_a, double ws_a, int64_t ct_b, double ws_b) noexcept:
        cdef double diff = self._key(ct_a, ws_a) - self._key(ct_b, ws_b)
        if diff > self.tol:
            return 1
        if diff < -self.tol:
            return -1
        return 0

    cdef inline bint _improves(self, int64_t d_ct, double d_w) noexcept:
        if self.w_total > 0:
            return d_ct * self.w_total + d_w > self.tol
        return d_ct > 0

    def improves(self, d_ct, d_w):
        return self._improves(d_ct, d_w)

    def compare(self, ct_a, ws_a, ct_b, ws_b):
        return self._compare(ct_a, ws_a, ct_b, ws_b)

    cdef void _refresh(self, int p) noexcept:
        cdef int need = self.size[p] - self.k
        cdef int cm = 0
        cdef int c0 = 0
        cdef int u = self.head[p]
        while u >= 0:
            if self.deg[u] == need - 1:
                cm += 1
            elif self.deg[u] == need:
                c0 += 1
            u = self.nxt[u]
        self.zm[p] = cm
        self.z0[p] = c0

    def check_caches(self):
        """True when the partition caches agree with a recount (testing aid)."""
        cdef int p
        zm = [self.zm[p] for p in range(self.n + 1)]
        z0 = [self.z0[p] for p in range(self.n + 1)]
        for p in range(self.n + 1):
            self._refresh(p)
        return zm == [self.zm[p] for p in range(self.n + 1)] and z0 == [self.z0[p] for p in range(self.n + 1)]

    # -- move evaluation ---------------------------------------------------

    cdef inline int64_t _next_stamp(self) noexcept:
        self.stamp += 1
        return self.stamp

    cdef double _edge_weight(self, int u, int y) noexcept:
        cdef int64_t lo = self.indptr[u]
        cdef int64_t hi = self.indptr[u + 1]
        cdef int64_t mid
        while lo < hi:
            mid = (lo + hi) >> 1
            if self.indices[mid] < y:
                lo = mid + 1
            else:
                hi = mid
        if lo < self.indptr[u + 1] and self.indices[lo] == y:
            return self.weights[lo]
        return 0.0

    cdef double _internal_weight(self, int32_t* f, int nf) noexcept:
        cdef int i, j, u, y
        cdef int64_t e, stamp
        cdef double s = 0.0
        if nf < 2:
            return 0.0
        if nf <= PAIRWISE_MAX:
            for i in range(nf):
                for j in range(i + 1, nf):
                    s += self._edge_weight(f[i], f[j])
            return s
        stamp = self._next_stamp()
        for i in range(nf):
            self.mark[f[i]] = stamp
        for i in range(nf):
            u = f[i]
            for e in range(self.indptr[u], self.indptr[u + 1]):
                y = self.indices[e]
                if y > u and self.mark[y] == stamp:
                    s += self.weights[e]
        return s

    cdef void _analyse(self, int v, int t, bint* cv_new, int* d_b, double* w_b,
                       int64_t* d_ct, double* d_w) noexcept:
        cdef int a = self.x[v]
        cdef int64_t stamp = self._next_stamp()
        cdef int64_t e
        cdef int u, i, need_a, need_b
        cdef int db = 0
        cdef double wb = 0.0
        cdef double dw
        cdef bint cvn
        for e in range(self.indptr[v], self.indptr[v + 1]):
            u = self.indices[e]
            self.mark[u] = stamp
            if self.x[u] == t:
                db += 1
                if self.corr[u]:
                    wb += self.weights[e]
        need_a = self.size[a] - 1 - self.k
        self.nfa = 0
        u = self.head[a]
        while u >= 0:
            if u != v and self.mark[u] != stamp and self.deg[u] == need_a:
                self.fa[self.nfa] = u
                self.nfa += 1
            u = self.nxt[u]
        need_b = self.size[t] - self.k
        self.nfb = 0
        u = self.head[t]
        while u >= 0:
            if self.mark[u] != stamp and self.deg[u] == need_b:
                self.fb[self.nfb] = u
                self.nfb += 1
            u = self.nxt[u]
        cvn = db >= self.size[t] + 1 - self.k
        d_ct[0] = self.nfa - self.nfb + (<int> cvn - <int> self.corr[v])
        dw = wb if cvn else 0.0
        if self.corr[v]:
            dw -= self.cw[v]
        for i in range(self.nfa):
            dw += self.cw[self.fa[i]]
        for i in range(self.nfb):
            dw -= self.cw[self.fb[i]]
        dw += self._internal_weight(self.fa, self.nfa)
        dw += self._internal_weight(self.fb, self.nfb)
        cv_new[0] = cvn
        d_b[0] = db
        w_b[0] = wb
        d_w[0] = dw

    def evaluate_move(self, int v, int t):
        cdef bint cvn
        cdef int db
        cdef double wb, dw
        cdef int64_t dct
        self._analyse(v, t, &cvn, &db, &wb, &dct, &dw)
        return self.correct_total + dct, self.w_sol + dw

    cdef void _ledger_move(self, int v, int t) noexcept:
        cdef bint cvn
        cdef int db, i, y, u
        cdef double wb, dw
        cdef int64_t dct, e
        cdef int a = self.x[v]
        self._analyse(v, t, &cvn, &db, &wb, &dct, &dw)
        if self.corr[v]:
            for e in range(self.indptr[v], self.indptr[v + 1]):
                if self.x[self.indices[e]] == a:
                    self.cw[self.indices[e]] -= self.weights[e]
        for i in range(self.nfa):
            y = self.fa[i]
            for e in range(self.indptr[y], self.indptr[y + 1]):
                if self.x[self.indices[e]] == a:
                    self.cw[self.indices[e]] += self.weights[e]
            self.corr[y] = 1
        for i in range(self.nfb):
            y = self.fb[i]
            for e in range(self.indptr[y], self.indptr[y + 1]):
                if self.x[self.indices[e]] == t:
                    self.cw[self.indices[e]] -= self.weights[e]
            self.corr[y] = 0
        for e in range(self.indptr[v], self.indptr[v + 1]):
            u = self.indices[e]
            if self.x[u] == a:
                self.deg[u] -= 1
            elif self.x[u] == t:
                self.deg[u] += 1
        self._detach(v)
        self._attach(v, t)
        self.corr[v] = cvn
        self.deg[v] = db
        self.cw[v] = wb
        if cvn:
            for e in range(self.indptr[v], self.indptr[v + 1]):
                if self.x[self.indices[e]] == t:
                    self.cw[self.indices[e]] += self.weights[e]
        self.correct_total += dct
        self.w_sol += dw
        self._refresh(a)
        self._refresh(t)

    cdef void _relabel(self, int p, int q) noexcept:
        cdef int u = self.head[p]
        while u >= 0:
            self.x[u] = q
            u = self.nxt[u]
        self.head[q] = self.head[p]
        self.head[p] = -1
        self.size[q] = self.size[p]
        self.size[p] = 0
        self.zm[q] = self.zm[p]
        self.z0[q] = self.z0[p]
        self.zm[p] = 0
        self.z0[p] = 0

    cdef int _move(self, int v, int t, bint* created, bint* emptied, bint* relabeled) noexcept:
        """Returns the final label of v, or -1 for a no-op."""
        cdef int a = self.x[v]
        cdef int last
        if t == a or (t == self.l and self.size[a] == 1):
            return -1
        created[0] = t == self.l
        if created[0]:
            self.l += 1
        self._ledger_move(v, t)
        emptied[0] = self.size[a] == 0
        relabeled[0] = False
        if emptied[0]:
            last = self.l - 1
            if a != last:
                self._relabel(last, a)
                relabeled[0] = True
                if t == last:
                    t = a
            self.l -= 1
        return t

    def move(self, int v, int t):
        cdef bint created, emptied, relabeled
        cdef int64_t ct = self.correct_total
        cdef double ws = self.w_sol
        cdef int a = self.x[v]
        if t == a or (t == self.l and self.size[a] == 1):
            return None
        if t < 0 or t > self.l:
            raise ValueError(f"target label {t} outside 0..{self.l}")
        t = self._move(v, t, &created, &emptied, &relabeled)
        return MoveRecord(v, a, t, created, emptied, relabeled, ct, ws)

    def undo(self, rec):
        cdef int v = rec.v
        cdef int a = rec.source
        if not rec.emptied:
            self._ledger_move(v, a)
            if rec.created:
                self.l -= 1
        else:
            if rec.relabeled:
                self._relabel(a, self.l)
            self.l += 1
            self._ledger_move(v, a)
        self.correct_total = rec.correct_total
        self.w_sol = rec.w_sol

    # -- search ------------------------------------------------------------

    cdef void _shake(self, int kappa, bitgen_t* bg) noexcept:
        cdef int n = self.n
        cdef int kk = kappa if kappa < n else n
        cdef int i, j, tmp, q
        cdef bint created, emptied, relabeled
        for i in range(n):
            self.perm[i] = i
        for i in range(kk):
            j = i + <int> _bounded(bg, n - i)
            tmp = self.perm[i]
            self.perm[i] = self.perm[j]
            self.perm[j] = tmp
            q = <int> _bounded(bg, self.l + 1)
            self._move(self.perm[i], q, &created, &emptied, &relabeled)

    def shake(self, int kappa, bit_generator):
        self._shake(kappa, _bitgen(bit_generator))

    cdef void _scan_vertex(self, int v) noexcept:
        cdef int a = self.x[v]
        cdef int64_t e
        cdef int u, p, need
        self.ntouched = 0
        for e in range(self.indptr[v], self.indptr[v + 1]):
            u = self.indices[e]
            p = self.x[u]
            if self.cnt[p] == 0:
                self.touched[self.ntouched] = p
                self.ntouched += 1
            self.cnt[p] += 1
            if self.corr[u]:
                self.wc[p] += self.weights[e]
            need = self.size[p] - self.k
            if p == a:
                need -= 1
            if self.deg[u] == need:
                self.tz[p] += 1

    cdef void _clear_scan(self) noexcept:
        cdef int i, p
        for i in range(self.ntouched):
            p = self.touched[i]
            self.cnt[p] = 0
            self.tz[p] = 0
            self.wc[p] = 0.0
        self.ntouched = 0

    cdef int _local_search(self, bitgen_t* bg, double deadline) noexcept:
        cdef int n = self.n
        cdef int improved = 0
        cdef int v = 0
        cdef int a, m, i, j, t, tmp, nfa, nfb
        cdef int64_t dct
        cdef double wb, dw
        cdef bint found, cvn, created, emptied, relabeled
        cdef int db
        while v < n:
            a = self.x[v]
            m = self.l + 1
            for i in range(m):
                self.order[i] = i
            self._scan_vertex(v)
            nfa = self.zm[a] - self.tz[a]
            if self.deg[v] == self.size[a] - 1 - self.k:
                nfa -= 1
            found = False
            for i in range(m):
                j = i + <int> _bounded(bg, m - i)
                tmp = self.order[i]
                self.order[i] = self.order[j]
                self.order[j] = tmp
                t = self.order[i]
                if t == a or (t == self.l and self.size[a] == 1):
                    continue
                nfb = self.z0[t] - self.tz[t]
                cvn = self.cnt[t] >= self.size[t] + 1 - self.k
                dct = nfa - nfb + (<int> cvn - <int> self.corr[v])
                if dct < 0:
                    continue
                if nfa == 0 and nfb == 0:
                    dw = self.wc[t] if cvn else 0.0
                    if self.corr[v]:
                        dw -= self.cw[v]
                else:
                    self._analyse(v, t, &cvn, &db, &wb, &dct, &dw)
                if self._improves(dct, dw):
                    self._clear_scan()
                    self._move(v, t, &created, &emptied, &relabeled)
                    found = True
                    break
            if found:
                improved += 1
                v = 0
                if _now() >= deadline:
                    break
            else:
                self._clear_scan()
                v += 1
        return improved

    def local_search(self, bit_generator, double deadline=float("inf")):
        return self._local_search(_bitgen(bit_generator), deadline)


def run_vns(PartitionState state, PartitionState work, bit_generator,
            int n_min, int n_max, int64_t it_max, int64_t itrep_max,
            double t_max, double prob):
    cdef bitgen_t* bg = _bitgen(bit_generator)
    cdef double start = _now()
    cdef double deadline = start + t_max
    cdef PartitionState best = state
    cdef PartitionState tmp
    cdef int64_t it = 0
    cdef int64_t itrep = 0
    cdef int kappa = n_min
    cdef int c
    best._local_search(bg, deadline)
    trace = [(0, best.correct_total, best.w_sol)]
    while True:
        if it >= it_max:
            reason = "it_max"
            break
        if itrep >= itrep_max:
            reason = "itrep_max"
            break
        if _now() >= deadline:
            reason = "t_max"
            break
        work.copy_from(best)
        work._shake(kappa, bg)
        work._local_search(bg, deadline)
        it += 1
        c = work._compare(work.correct_total, work.w_sol, best.correct_total, best.w_sol)
        if c > 0:
            tmp = best
            best = work
            work = tmp
            kappa = n_min
            itrep = 0
            trace.append((it, best.correct_total, best.w_sol))
        else:
            itrep += 1
            if c == 0 and _uniform(bg) < prob:
                tmp = best
                best = work
                work = tmp
            kappa = kappa + 1 if kappa < n_max else n_min
    if best is not state:
        state.copy_from(best)
    return {
        "iterations": it,
        "reason": reason,
        "elapsed": _now() - start,
        "trace": trace,
    }
