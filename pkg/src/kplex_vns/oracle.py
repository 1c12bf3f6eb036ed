"""Exact solver by exhaustive enumeration, and an independent checker.

Neither routine touches the search kernels, so they serve as ground truth.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from .graph import WeightedGraph

DEFAULT_LIMIT = 12


class InstanceTooLarge(ValueError):
    """Raised when exact enumeration is asked for more vertices than allowed."""


@dataclass(frozen=True)
class Certificate:
    feasible: bool
    weight: float
    violators: tuple[int, ...]


@dataclass(frozen=True)
class ExactResult:
    optimum_weight: float
    optimum_objective: float
    labels: tuple[int, ...]
    partitions_enumerated: int

    @property
    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(max(self.labels, default=-1) + 1)]
        for v, p in enumerate(self.labels):
            out[p].append(v)
        return out


def verify_partition(graph: WeightedGraph, labels: Sequence[int], k: int) -> Certificate:
    """Check every block is a k-plex and sum the intra-block weight.

    ``labels`` may use any integer values. Violators are 0-based vertex ids.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    labels = [int(p) for p in labels]
    if len(labels) != graph.n:
        raise ValueError(f"expected {graph.n} labels, got {len(labels)}")
    size: dict[int, int] = {}
    for p in labels:
        size[p] = size.get(p, 0) + 1
    deg = [0] * graph.n
    inside = []
    for u, v, w in graph.edges:
        if labels[u] == labels[v]:
            deg[u] += 1
            deg[v] += 1
            inside.append(w)
    violators = tuple(v for v in range(graph.n) if deg[v] < size[labels[v]] - k)
    return Certificate(not violators, math.fsum(inside), violators)


def exact_solve(graph: WeightedGraph, k: int, limit: int = DEFAULT_LIMIT) -> ExactResult:
    """Maximum-weight partition into k-plexes by enumerating set partitions.

    Partitions are generated as restricted-growth strings, so each is seen
    once. Ties go to fewer blocks, then to the smallest label string.
    ``partitions_enumerated`` counts the feasible partitions visited.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = graph.n
    if n > limit:
        raise InstanceTooLarge(f"exact enumeration limited to n <= {limit}, instance has n = {n}")
    if limit > DEFAULT_LIMIT and n > DEFAULT_LIMIT:
        warnings.warn(
            f"exact enumeration on n = {n} vertices may take a very long time",
            RuntimeWarning,
            stacklevel=2,
        )

    adj = [dict() for _ in range(n)]
    for u, v, w in graph.edges:
        adj[u][v] = w
        adj[v][u] = w

    labels = [0] * n
    blocks: list[list[int]] = []
    deg = [0] * n
    best_w = -1.0
    best_l = 0
    best_labels: tuple[int, ...] = ()
    count = 0

    def fits(y: int, block: list[int]) -> tuple[bool, float, list[int]]:
        new_size = len(block) + 1
        need = new_size - k
        nb = adj[y]
        hits = [u for u in block if u in nb]
        if len(hits) < need:
            return False, 0.0, hits
        hit_set = set(hits)
        for u in block:
            if u not in hit_set and deg[u] < need:
                return False, 0.0, hits
        return True, math.fsum(nb[u] for u in hits), hits

    def visit(y: int, weight: float) -> None:
        nonlocal best_w, best_l, best_labels, count
        if y == n:
            count += 1
            nb = len(blocks)
            if weight > best_w or (weight == best_w and nb < best_l):
                best_w, best_l, best_labels = weight, nb, tuple(labels)
            return
        for p, block in enumerate(blocks):
            ok, gain, hits = fits(y, block)
            if not ok:
                continue
            for u in hits:
                deg[u] += 1
            deg[y] = len(hits)
            block.append(y)
            labels[y] = p
            visit(y + 1, weight + gain)
            block.pop()
            for u in hits:
                deg[u] -= 1
        deg[y] = 0
        labels[y] = len(blocks)
        blocks.append([y])
        visit(y + 1, weight)
        blocks.pop()

    visit(0, 0.0)
    if n == 0:
        best_w = 0.0
    objective = n + (best_w / graph.w_total if graph.w_total > 0 else 0.0)
    return ExactResult(best_w, objective, best_labels, count)
