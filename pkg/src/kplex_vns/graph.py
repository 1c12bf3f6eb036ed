"""Weighted graph model and instance readers.

Vertices are stored 0-based. Files and reports use 1-based ids, as in the
DIMACS format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np


class GraphParseError(ValueError):
    """Raised for malformed instance files; carries the 1-based line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class WeightedGraph:
    """Immutable undirected graph with positive edge weights.

    ``edges`` holds ``(u, v, w)`` triples with ``u < v`` (0-based), sorted.
    The CSR arrays (``indptr``, ``indices``, ``weights``) give each vertex's
    neighbors in increasing order.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    indptr: np.ndarray = field(repr=False, compare=False)
    indices: np.ndarray = field(repr=False, compare=False)
    weights: np.ndarray = field(repr=False, compare=False)
    w_total: float = 0.0
    integral: bool = True
    name: str = ""

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int, float]],
        name: str = "",
    ) -> "WeightedGraph":
        """Build a graph from 0-based ``(u, v, w)`` triples.

        Raises ValueError on self-loops, duplicate pairs, out-of-range ids or
        non-positive weights.
        """
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        canon: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (u, v) if u < v else (v, u)
            if key in canon:
                raise ValueError(f"duplicate edge {key}")
            canon[key] = w
        items = sorted(canon.items())
        m = len(items)

        src = np.empty(2 * m, dtype=np.int32)
        dst = np.empty(2 * m, dtype=np.int32)
        wts = np.empty(2 * m, dtype=np.float64)
        for i, ((u, v), w) in enumerate(items):
            src[2 * i], dst[2 * i], wts[2 * i] = u, v, w
            src[2 * i + 1], dst[2 * i + 1], wts[2 * i + 1] = v, u, w
        order = np.lexsort((dst, src))
        src, dst, wts = src[order], dst[order], wts[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)

        w_total = math.fsum(w for _, w in items)
        integral = all(float(w).is_integer() for _, w in items)
        for arr in (indptr, dst, wts):
            arr.flags.writeable = False
        return cls(
            n=n,
            edges=tuple((u, v, w) for (u, v), w in items),
            indptr=indptr,
            indices=dst,
            weights=wts,
            w_total=w_total,
            integral=integral,
            name=name,
        )

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return [(int(u), float(w)) for u, w in zip(self.indices[lo:hi], self.weights[lo:hi])]

    def with_weights(self, weights: Iterable[float]) -> "WeightedGraph":
        """Same structure, new per-edge weights (in ``edges`` order)."""
        new = [(u, v, w) for (u, v, _), w in zip(self.edges, weights, strict=True)]
        return WeightedGraph.from_edges(self.n, new, name=self.name)

    def to_edge_list(self) -> str:
        """Serialize in the weighted edge-list format (header + 1-based lines)."""
        lines = [f"{self.n} {self.m}"]
        for u, v, w in self.edges:
            lines.append(f"{u + 1} {v + 1} {_fmt_weight(w)}")
        return "\n".join(lines) + "\n"

    def to_dimacs(self, comments: Iterable[str] = ()) -> str:
        lines = [f"c {c}" for c in comments]
        lines.append(f"p edge {self.n} {self.m}")
        lines.extend(f"e {u + 1} {v + 1}" for u, v, _ in self.edges)
        return "\n".join(lines) + "\n"


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def _lines(text: str | TextIO) -> Iterable[str]:
    return text.splitlines() if isinstance(text, str) else text


def parse_dimacs(text: str | TextIO, name: str = "") -> WeightedGraph:
    """Parse a DIMACS ASCII clique file; all weights are set to 1.

    Duplicate ``e`` lines (in either orientation) are collapsed.
    """
    n: int | None = None
    pairs: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise GraphParseError("second problem line", lineno)
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise GraphParseError(f"malformed problem line {line!r}", lineno)
            try:
                n = int(parts[2])
                int(parts[3])
            except ValueError:
                raise GraphParseError(f"malformed problem line {line!r}", lineno) from None
            if n < 0:
                raise GraphParseError("negative vertex count", lineno)
        elif tag == "e":
            if n is None:
                raise GraphParseError("edge line before problem line", lineno)
            if len(parts) < 3:
                raise GraphParseError(f"malformed edge line {line!r}", lineno)
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphParseError(f"malformed edge line {line!r}", lineno) from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphParseError(f"vertex id out of range 1..{n} in {line!r}", lineno)
            if u == v:
                raise GraphParseError(f"self-loop on vertex {u}", lineno)
            pairs.add((u - 1, v - 1) if u < v else (v - 1, u - 1))
        else:
            raise GraphParseError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise GraphParseError("missing 'p edge <n> <m>' line")
    return WeightedGraph.from_edges(n, ((u, v, 1.0) for u, v in pairs), name=name)


def dimacs_weight(i: int, j: int) -> int:
    """Synthetic weight for edge {i, j} of a DIMACS instance (1-based ids)."""
    return ((i + j) % 200) + 1


def apply_dimacs_weights(g: WeightedGraph) -> WeightedGraph:
    return g.with_weights(float(dimacs_weight(u + 1, v + 1)) for u, v, _ in g.edges)


def parse_weighted_edge_list(text: str | TextIO, name: str = "") -> WeightedGraph:
    """Parse ``u v w`` lines (1-based ids, ``#`` comments).

    An optional leading ``n m`` header fixes the vertex count; otherwise it is
    the largest id seen.
    """
    n_header: int | None = None
    m_header: int | None = None
    seen: dict[tuple[int, int], int] = {}
    edges: list[tuple[int, int, float]] = []
    first = True
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if first and len(parts) == 2:
            first = False
            try:
                n_header, m_header = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphParseError(f"malformed header {line!r}", lineno) from None
            if n_header < 0 or m_header < 0:
                raise GraphParseError(f"malformed header {line!r}", lineno)
            continue
        first = False
        if len(parts) != 3:
            raise GraphParseError(f"expected '<u> <v> <w>', got {line!r}", lineno)
        try:
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphParseError(f"expected '<u> <v> <w>', got {line!r}", lineno) from None
        if u < 1 or v < 1:
            raise GraphParseError("vertex ids are 1-based", lineno)
        if n_header is not None and (u > n_header or v > n_header):
            raise GraphParseError(f"vertex id exceeds header n={n_header}", lineno)
        if u == v:
            raise GraphParseError(f"self-loop on vertex {u}", lineno)
        if not (w > 0 and math.isfinite(w)):
            raise GraphParseError(f"non-positive weight {parts[2]}", lineno)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise GraphParseError(f"duplicate edge {key[0]}-{key[1]} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        edges.append((u - 1, v - 1, w))
    n = n_header if n_header is not None else max((max(u, v) + 1 for u, v, _ in edges), default=0)
    if m_header is not None and m_header != len(edges):
        raise GraphParseError(f"header declares {m_header} edges, found {len(edges)}")
    return WeightedGraph.from_edges(n, edges, name=name)


def load_graph(path: str | Path, fmt: str | None = None, dimacs_weights: bool = False) -> WeightedGraph:
    """Read an instance file. ``fmt`` is ``"dimacs"`` or ``"edgelist"``;
    when omitted, ``.clq``/``.col`` files are read as DIMACS."""
    path = Path(path)
    if fmt is None:
        fmt = "dimacs" if path.suffix in (".clq", ".col") else "edgelist"
    with path.open(encoding="utf-8") as fh:
        if fmt == "dimacs":
            g = parse_dimacs(fh, name=path.stem)
        elif fmt == "edgelist":
            g = parse_weighted_edge_list(fh, name=path.stem)
        else:
            raise ValueError(f"unknown format {fmt!r}")
    if dimacs_weights:
        g = apply_dimacs_weights(g)
    return g


def density(g: WeightedGraph) -> float:
    if g.n < 2:
        raise ValueError("density needs at least two vertices")
    return 2.0 * g.m / (g.n * (g.n - 1))
