"""Partition assignments with incremental degree bookkeeping.

Labels are 0-based and dense (``0..l-1``) in memory. Partition dumps number
blocks from 1 and vertices from 1.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import _backend
from .graph import WeightedGraph

#: Target token for "open a new singleton partition".
NEW = -1


class PartitionFormatError(ValueError):
    """Malformed partition dump."""


@dataclass(frozen=True)
class DegreeLedger:
    """Snapshot of the per-vertex bookkeeping behind the objective."""

    intra_deg: np.ndarray
    correct: np.ndarray
    correct_total: int
    w_sol: float

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DegreeLedger):
            return NotImplemented
        return (
            np.array_equal(self.intra_deg, other.intra_deg)
            and np.array_equal(self.correct, other.correct)
            and self.correct_total == other.correct_total
            and self.w_sol == other.w_sol
        )


def compact_labels(labels: Iterable[int]) -> np.ndarray:
    """Map arbitrary labels to ``0..l-1``, keeping their relative order."""
    arr = np.asarray(list(labels), dtype=np.int64)
    if arr.size == 0:
        return arr
    _, dense = np.unique(arr, return_inverse=True)
    return dense.astype(np.int64)


class Solution:
    """A partition of ``graph``'s vertices, evaluated for a fixed ``k``.

    The kernel keeps intra-partition degrees, correctness flags,
    ``correct_total`` and ``w_sol`` up to date across moves.
    """

    def __init__(
        self,
        graph: WeightedGraph,
        labels: Iterable[int],
        k: int,
        backend: str | None = None,
    ):
        if int(k) < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        dense = compact_labels(labels)
        if dense.size != graph.n:
            raise ValueError(f"expected {graph.n} labels, got {dense.size}")
        self.graph = graph
        self.k = int(k)
        self._kernel = _backend.get(backend)
        self._state = self._kernel.PartitionState(
            graph.indptr,
            graph.indices,
            graph.weights,
            self.k,
            dense.tolist(),
            graph.w_total,
            graph.integral,
        )

    @classmethod
    def singletons(cls, graph: WeightedGraph, k: int, backend: str | None = None) -> "Solution":
        return cls(graph, range(graph.n), k, backend)

    @classmethod
    def whole(cls, graph: WeightedGraph, k: int, backend: str | None = None) -> "Solution":
        return cls(graph, [0] * graph.n, k, backend)

    @property
    def backend(self) -> str:
        return self._kernel.BACKEND

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self._state.labels(), dtype=np.int64)

    @property
    def l(self) -> int:  # noqa: E743
        return self._state.l

    @property
    def partition_size(self) -> dict[int, int]:
        return dict(enumerate(self._state.size_list))

    @property
    def correct_total(self) -> int:
        return self._state.correct_total

    @property
    def w_sol(self) -> float:
        return self._state.w_sol

    @property
    def ledger(self) -> DegreeLedger:
        return DegreeLedger(
            intra_deg=np.asarray(self._state.degrees(), dtype=np.int64),
            correct=np.asarray(self._state.correct_flags(), dtype=bool),
            correct_total=self._state.correct_total,
            w_sol=self._state.w_sol,
        )

    def blocks(self) -> list[list[int]]:
        """Members of each partition (0-based), indexed by label."""
        return [self._state.members_of(p) for p in range(self.l)]

    def copy(self) -> "Solution":
        return Solution(self.graph, self._state.labels(), self.k, self.backend)

    def set_labels(self, labels: Iterable[int]) -> None:
        dense = compact_labels(labels)
        if dense.size != self.n:
            raise ValueError(f"expected {self.n} labels, got {dense.size}")
        self._state.set_labels(dense.tolist())

    def __repr__(self) -> str:
        return (
            f"Solution(n={self.n}, k={self.k}, l={self.l}, "
            f"correct_total={self.correct_total}, w_sol={self.w_sol})"
        )


def random_initial(
    graph: WeightedGraph,
    k: int,
    bitgen: np.random.BitGenerator,
    backend: str | None = None,
) -> Solution:
    """Labels drawn uniformly from ``ceil(sqrt(n))`` values, then compacted."""
    if graph.n < 1:
        raise ValueError("random_initial needs at least one vertex")
    kern = _backend.get(backend)
    upper = math.isqrt(graph.n - 1) + 1
    labels = kern.random_labels(bitgen, graph.n, upper)
    return Solution(graph, labels, k, kern.BACKEND)


def _target(s: Solution, target: int) -> int:
    if target == NEW:
        return s.l
    if not 0 <= target < s.l:
        raise ValueError(f"target label {target} outside 0..{s.l - 1}")
    return int(target)


def move_vertex(s: Solution, v: int, target: int):
    """Move ``v`` to partition ``target`` (or ``NEW``).

    Returns the undo record, or None for a move that leaves the set system
    unchanged (same label, or a singleton sent to a new partition).
    """
    if not 0 <= v < s.n:
        raise ValueError(f"vertex {v} outside 0..{s.n - 1}")
    return s._state.move(int(v), _target(s, target))


def undo_move(s: Solution, record) -> None:
    if record is not None:
        s._state.undo(record)


def _labels_of(s: Solution | Sequence[int]) -> np.ndarray:
    if isinstance(s, Solution):
        return s.x
    return compact_labels(s)


def recompute_ledger(graph: WeightedGraph, s: Solution | Sequence[int], k: int) -> DegreeLedger:
    """Ledger from scratch, vectorised over the edge list."""
    x = _labels_of(s)
    n = graph.n
    if graph.m:
        e = np.asarray(graph.edges, dtype=np.float64)
        u, v, w = e[:, 0].astype(np.int64), e[:, 1].astype(np.int64), e[:, 2]
    else:
        u = v = np.zeros(0, dtype=np.int64)
        w = np.zeros(0)
    same = x[u] == x[v]
    deg = np.bincount(u[same], minlength=n) + np.bincount(v[same], minlength=n)
    sizes = np.bincount(x, minlength=1)
    correct = deg >= sizes[x] - k
    keep = same & correct[u] & correct[v]
    return DegreeLedger(
        intra_deg=deg.astype(np.int64),
        correct=correct,
        correct_total=int(correct.sum()),
        w_sol=math.fsum(w[keep].tolist()),
    )


def is_feasible(graph: WeightedGraph, s: Solution | Sequence[int], k: int) -> tuple[bool, list[int]]:
    """Whether every partition is a k-plex, plus the violating vertices."""
    led = recompute_ledger(graph, s, k)
    bad = np.flatnonzero(~led.correct).tolist()
    return not bad, bad


def partition_weight(graph: WeightedGraph, s: Solution | Sequence[int]) -> float:
    x = _labels_of(s)
    return math.fsum(w for u, v, w in graph.edges if x[u] == x[v])


# -- partition dump -------------------------------------------------------


def format_partition(
    labels: Sequence[int],
    *,
    k: int | None = None,
    feasible: bool | None = None,
    weight: float | None = None,
    objective: float | None = None,
) -> str:
    """Render a partition dump: ``#`` header lines, then ``P<j>: v ...`` lines."""
    out = io.StringIO()
    if k is not None:
        out.write(f"# k: {k}\n")
    if feasible is not None:
        out.write(f"# feasible: {str(bool(feasible)).lower()}\n")
    if weight is not None:
        out.write(f"# weight: {_num(weight)}\n")
    if objective is not None:
        out.write(f"# objective: {objective!r}\n")
    x = compact_labels(labels)
    groups: list[list[int]] = [[] for _ in range(int(x.max()) + 1 if x.size else 0)]
    for v, p in enumerate(x.tolist()):
        groups[p].append(v + 1)
    for j, members in enumerate(groups, start=1):
        out.write(f"P{j}: {' '.join(map(str, members))}\n")
    return out.getvalue()


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def parse_partition(text: str | TextIO, n: int) -> np.ndarray:
    """Read a partition dump into 0-based labels for an ``n``-vertex graph."""
    lines = text.splitlines() if isinstance(text, str) else text
    labels = np.full(n, -1, dtype=np.int64)
    block = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, rest = line.partition(":")
        if not sep or not head.startswith("P") or not head[1:].isdigit():
            raise PartitionFormatError(f"line {lineno}: expected 'P<j>: <vertices>', got {line!r}")
        for tok in rest.split():
            try:
                v = int(tok)
            except ValueError:
                raise PartitionFormatError(f"line {lineno}: bad vertex id {tok!r}") from None
            if not 1 <= v <= n:
                raise PartitionFormatError(f"line {lineno}: vertex {v} outside 1..{n}")
            if labels[v - 1] >= 0:
                raise PartitionFormatError(f"line {lineno}: vertex {v} listed twice")
            labels[v - 1] = block
        block += 1
    missing = np.flatnonzero(labels < 0)
    if missing.size:
        raise PartitionFormatError(
            f"{missing.size} vertices unassigned (first: {int(missing[0]) + 1})"
        )
    return compact_labels(labels)


def read_partition(path: str | Path, n: int) -> np.ndarray:
    with Path(path).open(encoding="utf-8") as fh:
        return parse_partition(fh, n)
