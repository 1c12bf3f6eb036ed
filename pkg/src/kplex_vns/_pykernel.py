"""Pure-Python search kernel.

Reference implementation of the incremental partition state, local search,
shaking and the VNS loop. ``_ckernel.pyx`` makes the same moves and the same
random draws, so both backends produce identical searches for the same seed
on integer-weighted graphs.
"""

from __future__ import annotations

import time
from collections import namedtuple

_MASK32 = 0xFFFFFFFF
_INV_2_53 = 1.0 / 9007199254740992.0

BACKEND = "python"

MoveRecord = namedtuple(
    "MoveRecord",
    "v source target created emptied relabeled correct_total w_sol",
)


def bounded(raw, m: int) -> int:
    """Uniform integer in [0, m) from 32-bit multiply-shift with rejection."""
    x = raw() >> 32
    prod = x * m
    low = prod & _MASK32
    if low < m:
        threshold = ((1 << 32) - m) % m
        while low < threshold:
            x = raw() >> 32
            prod = x * m
            low = prod & _MASK32
    return prod >> 32


def uniform(raw) -> float:
    return (raw() >> 11) * _INV_2_53


def random_labels(bitgen, n: int, upper: int) -> list[int]:
    raw = bitgen.random_raw
    return [bounded(raw, upper) for _ in range(n)]


class PartitionState:
    """Assignment of vertices to partitions plus the objective bookkeeping.

    Labels are dense: ``0..l-1``. ``deg[v]`` counts v's neighbors in its own
    partition, ``cw[v]`` sums weights of edges from v to *correct* neighbors
    in its own partition. ``w_sol`` is half the sum of ``cw`` over correct
    vertices.
    """

    def __init__(self, indptr, indices, weights, k, labels, w_total, integral):
        n = len(indptr) - 1
        self.n = n
        self.k = int(k)
        self.w_total = float(w_total)
        self.integral = bool(integral)
        self.tol = 0.0 if integral else 1e-9 * self.w_total
        self.nbrs = [[int(u) for u in indices[indptr[v]:indptr[v + 1]]] for v in range(n)]
        self.nw = [[float(w) for w in weights[indptr[v]:indptr[v + 1]]] for v in range(n)]
        self._mark = [0] * n
        self._stamp = 0
        self.x = [0] * n
        self.deg = [0] * n
        self.corr = [False] * n
        self.cw = [0.0] * n
        self.size = [0] * max(n, 1)
        self.members = [set() for _ in range(max(n, 1))]
        self.l = 0
        self.correct_total = 0
        self.w_sol = 0.0
        self.set_labels(labels)

    # -- bookkeeping -------------------------------------------------------

    def set_labels(self, labels) -> None:
        """Load a dense 0-based labelling and rebuild the ledger from scratch."""
        n, k = self.n, self.k
        x = [int(c) for c in labels]
        if len(x) != n:
            raise ValueError("label array has wrong length")
        l = max(x, default=-1) + 1
        for i in range(max(n, 1)):
            self.size[i] = 0
            self.members[i] = set()
        for v, c in enumerate(x):
            self.size[c] += 1
            self.members[c].add(v)
        if any(self.size[c] == 0 for c in range(l)):
            raise ValueError("labels must be dense 0..l-1")
        self.x = x
        self.l = l
        for v in range(n):
            self.deg[v] = sum(1 for u in self.nbrs[v] if x[u] == x[v])
        for v in range(n):
            self.corr[v] = self.deg[v] >= self.size[x[v]] - k
        total = 0.0
        for v in range(n):
            s = 0.0
            for u, w in zip(self.nbrs[v], self.nw[v]):
                if x[u] == x[v] and self.corr[u]:
                    s += w
            self.cw[v] = s
            if self.corr[v]:
                total += s
        self.correct_total = sum(self.corr)
        self.w_sol = total / 2.0

    def labels(self) -> list[int]:
        return list(self.x)

    @property
    def size_list(self) -> list[int]:
        return self.size[: self.l]

    def degrees(self) -> list[int]:
        return list(self.deg)

    def correct_flags(self) -> list[bool]:
        return list(self.corr)

    def correct_weights(self) -> list[float]:
        return list(self.cw)

    def members_of(self, p: int) -> list[int]:
        return sorted(self.members[p])

    def copy_from(self, other: "PartitionState") -> None:
        self.x = list(other.x)
        self.deg = list(other.deg)
        self.corr = list(other.corr)
        self.cw = list(other.cw)
        self.size = list(other.size)
        self.members = [set(s) for s in other.members]
        self.l = other.l
        self.correct_total = other.correct_total
        self.w_sol = other.w_sol

    def _key(self, ct: int, ws: float) -> float:
        if self.w_total > 0:
            return ct * self.w_total + ws
        return float(ct)

    def improves(self, d_ct: int, d_w: float) -> bool:
        """Whether a move with these deltas strictly raises the objective."""
        if self.w_total > 0:
            return d_ct * self.w_total + d_w > self.tol
        return d_ct > 0

    def compare(self, ct_a: int, ws_a: float, ct_b: int, ws_b: float) -> int:
        diff = self._key(ct_a, ws_a) - self._key(ct_b, ws_b)
        if diff > self.tol:
            return 1
        if diff < -self.tol:
            return -1
        return 0

    # -- move evaluation ---------------------------------------------------

    def _next_stamp(self) -> int:
        self._stamp += 1
        return self._stamp

    def _internal_weight(self, flips) -> float:
        if len(flips) < 2:
            return 0.0
        stamp = self._next_stamp()
        mark = self._mark
        for u in flips:
            mark[u] = stamp
        s = 0.0
        for u in flips:
            for y, w in zip(self.nbrs[u], self.nw[u]):
                if y > u and mark[y] == stamp:
                    s += w
        return s

    def _analyse(self, v: int, t: int):
        """Flip sets and deltas for moving v into label t (t may be empty)."""
        x, deg, corr, k = self.x, self.deg, self.corr, self.k
        a = x[v]
        stamp = self._next_stamp()
        mark = self._mark
        d_b = 0
        w_b = 0.0
        for u, w in zip(self.nbrs[v], self.nw[v]):
            mark[u] = stamp
            if x[u] == t:
                d_b += 1
                if corr[u]:
                    w_b += w
        need_a = self.size[a] - 1 - k
        flips_a = [u for u in self.members[a] if u != v and mark[u] != stamp and deg[u] == need_a]
        need_b = self.size[t] - k
        flips_b = [u for u in self.members[t] if mark[u] != stamp and deg[u] == need_b]
        cv_new = d_b >= self.size[t] + 1 - k
        d_ct = len(flips_a) - len(flips_b) + (int(cv_new) - int(corr[v]))
        d_w = w_b if cv_new else 0.0
        if corr[v]:
            d_w -= self.cw[v]
        for u in flips_a:
            d_w += self.cw[u]
        for u in flips_b:
            d_w -= self.cw[u]
        d_w += self._internal_weight(flips_a)
        d_w += self._internal_weight(flips_b)
        return flips_a, flips_b, cv_new, d_b, w_b, d_ct, d_w

    def evaluate_move(self, v: int, t: int) -> tuple[int, float]:
        """Objective terms after moving v to label t (``t == l`` is a new partition)."""
        *_, d_ct, d_w = self._analyse(v, t)
        return self.correct_total + d_ct, self.w_sol + d_w

    def _ledger_move(self, v: int, t: int) -> None:
        flips_a, flips_b, cv_new, d_b, w_b, d_ct, d_w = self._analyse(v, t)
        x, deg, corr, cw = self.x, self.deg, self.corr, self.cw
        a = x[v]
        nb, nw = self.nbrs, self.nw
        if corr[v]:
            for u, w in zip(nb[v], nw[v]):
                if x[u] == a:
                    cw[u] -= w
        for y in flips_a:
            for u, w in zip(nb[y], nw[y]):
                if x[u] == a:
                    cw[u] += w
            corr[y] = True
        for y in flips_b:
            for u, w in zip(nb[y], nw[y]):
                if x[u] == t:
                    cw[u] -= w
            corr[y] = False
        for u in nb[v]:
            if x[u] == a:
                deg[u] -= 1
            elif x[u] == t:
                deg[u] += 1
        self.members[a].discard(v)
        self.size[a] -= 1
        self.members[t].add(v)
        self.size[t] += 1
        x[v] = t
        corr[v] = cv_new
        deg[v] = d_b
        cw[v] = w_b
        if cv_new:
            for u, w in zip(nb[v], nw[v]):
                if x[u] == t:
                    cw[u] += w
        self.correct_total += d_ct
        self.w_sol += d_w

    def _relabel(self, p: int, q: int) -> None:
        for u in self.members[p]:
            self.x[u] = q
        self.members[q], self.members[p] = self.members[p], set()
        self.size[q], self.size[p] = self.size[p], 0

    def move(self, v: int, t: int):
        """Move v to label t (``t == l`` opens a new partition).

        Returns a MoveRecord, or None when the move would not change the
        partition (same label, or a singleton moved to a new partition).
        """
        a = self.x[v]
        if t == a or (t == self.l and self.size[a] == 1):
            return None
        if not 0 <= t <= self.l:
            raise ValueError(f"target label {t} outside 0..{self.l}")
        ct, ws = self.correct_total, self.w_sol
        created = t == self.l
        if created:
            self.l += 1
        self._ledger_move(v, t)
        emptied = self.size[a] == 0
        relabeled = False
        if emptied:
            last = self.l - 1
            if a != last:
                self._relabel(last, a)
                relabeled = True
                if t == last:
                    t = a
            self.l -= 1
        return MoveRecord(v, a, t, created, emptied, relabeled, ct, ws)

    def undo(self, rec) -> None:
        v, a = rec.v, rec.source
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

    def shake(self, kappa: int, bitgen) -> None:
        raw = bitgen.random_raw
        n = self.n
        kk = min(kappa, n)
        perm = list(range(n))
        for i in range(kk):
            j = i + bounded(raw, n - i)
            perm[i], perm[j] = perm[j], perm[i]
            q = bounded(raw, self.l + 1)
            self.move(perm[i], q)

    def local_search(self, bitgen, deadline: float = float("inf")) -> int:
        """1-swap first improvement; returns the number of improving moves."""
        raw = bitgen.random_raw
        n = self.n
        improved = 0
        v = 0
        while v < n:
            a = self.x[v]
            m = self.l + 1
            order = list(range(m))
            found = False
            for i in range(m):
                j = i + bounded(raw, m - i)
                order[i], order[j] = order[j], order[i]
                t = order[i]
                if t == a or (t == self.l and self.size[a] == 1):
                    continue
                *_, d_ct, d_w = self._analyse(v, t)
                if self.improves(d_ct, d_w):
                    self.move(v, t)
                    found = True
                    break
            if found:
                improved += 1
                v = 0
                if time.perf_counter() >= deadline:
                    break
            else:
                v += 1
        return improved


def run_vns(state, work, bitgen, n_min, n_max, it_max, itrep_max, t_max, prob):
    """VNS main loop. ``state`` holds the initial solution and ends holding the best.

    ``work`` is scratch storage of the same shape.
    """
    raw = bitgen.random_raw
    start = time.perf_counter()
    deadline = start + t_max
    best = state
    best.local_search(bitgen, deadline)
    trace = [(0, best.correct_total, best.w_sol)]
    it = 0
    itrep = 0
    kappa = n_min
    while True:
        if it >= it_max:
            reason = "it_max"
            break
        if itrep >= itrep_max:
            reason = "itrep_max"
            break
        if time.perf_counter() >= deadline:
            reason = "t_max"
            break
        work.copy_from(best)
        work.shake(kappa, bitgen)
        work.local_search(bitgen, deadline)
        it += 1
        c = work.compare(work.correct_total, work.w_sol, best.correct_total, best.w_sol)
        if c > 0:
            best, work = work, best
            kappa = n_min
            itrep = 0
            trace.append((it, best.correct_total, best.w_sol))
        else:
            itrep += 1
            if c == 0 and uniform(raw) < prob:
                best, work = work, best
            kappa = kappa + 1 if kappa < n_max else n_min
    if best is not state:
        state.copy_from(best)
    return {
        "iterations": it,
        "reason": reason,
        "elapsed": time.perf_counter() - start,
        "trace": trace,
    }
