"""Generators for the DIMACS clique benchmark graphs used in the benchmarks.

The public DIMACS files are not bundled with the package. These functions
rebuild the small ones from their published constructions with the same
1-based vertex numbering, so the ((i + j) mod 200) + 1 weighting applies
unchanged. ``benchmarks/instances/`` holds the generated ``.clq`` files.
"""

from __future__ import annotations

from itertools import combinations

from .graph import WeightedGraph


def hamming(bits: int, distance: int) -> WeightedGraph:
    """Binary words of length ``bits``; edges join words at Hamming distance
    at least ``distance``. Vertex ``i + 1`` is the word with integer value ``i``."""
    n = 1 << bits
    edges = [
        (u, v, 1.0)
        for u in range(n)
        for v in range(u + 1, n)
        if (u ^ v).bit_count() >= distance
    ]
    return WeightedGraph.from_edges(n, edges, name=f"hamming{bits}-{distance}")


def johnson(length: int, weight: int, distance: int) -> WeightedGraph:
    """Binary words of length ``length`` and weight ``weight``, numbered in
    increasing integer order; edges join words at distance >= ``distance``."""
    words = [
        frozenset(i for i in range(length) if x >> i & 1)
        for x in range(1 << length)
        if x.bit_count() == weight
    ]
    edges = [
        (i, j, 1.0)
        for i, j in combinations(range(len(words)), 2)
        if len(words[i] ^ words[j]) >= distance
    ]
    return WeightedGraph.from_edges(
        len(words), edges, name=f"johnson{length}-{weight}-{distance}"
    )


# Steiner triple system on 9 points (the affine plane of order 3), triples
# in lexicographic order.
STS9 = (
    (1, 2, 3), (1, 4, 7), (1, 5, 9), (1, 6, 8),
    (2, 4, 9), (2, 5, 8), (2, 6, 7), (3, 4, 8),
    (3, 5, 7), (3, 6, 9), (4, 5, 6), (7, 8, 9),
)


def steiner_clique(triples=STS9) -> WeightedGraph:
    """Clique formulation of Steiner triple covering.

    One vertex per point, followed by one vertex per (triple, point-of-triple)
    pair listed triple by triple. Two triple vertices conflict when they
    belong to the same triple; a point vertex conflicts with every triple
    vertex naming that point. All other pairs are edges.
    """
    points = sorted({p for t in triples for p in t})
    nodes: list[tuple[str, int, int]] = [("p", -1, p) for p in points]
    for ti, t in enumerate(triples):
        for p in t:
            nodes.append(("t", ti, p))

    def conflict(a, b) -> bool:
        if a[0] == "t" and b[0] == "t":
            return a[1] == b[1]
        if a[0] == "p" and b[0] == "p":
            return False
        return a[2] == b[2]

    edges = [
        (i, j, 1.0)
        for i, j in combinations(range(len(nodes)), 2)
        if not conflict(nodes[i], nodes[j])
    ]
    return WeightedGraph.from_edges(len(nodes), edges, name=f"MANN_a{len(points)}")


def benchmark_set() -> dict[str, WeightedGraph]:
    return {
        "johnson8-2-4": johnson(8, 2, 4),
        "hamming6-2": hamming(6, 2),
        "hamming6-4": hamming(6, 4),
        "MANN_a9": steiner_clique(),
    }
