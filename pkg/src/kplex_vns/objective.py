"""Objective values and their comparison.

A solution scores ``correct_total + w_sol / w_total``. Comparisons use the
scaled form ``correct_total * w_total + w_sol`` so no division is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from .graph import WeightedGraph
from .solution import NEW, Solution, recompute_ledger

REL_TOL = 1e-9


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class ObjectiveValue:
    correct_total: int
    w_sol: float
    w_total: float
    integral: bool = True

    @property
    def value(self) -> float:
        if self.w_total > 0:
            return self.correct_total + self.w_sol / self.w_total
        return float(self.correct_total)

    @property
    def scaled(self) -> float:
        if self.w_total > 0:
            return self.correct_total * self.w_total + self.w_sol
        return float(self.correct_total)

    def __float__(self) -> float:
        return self.value


def compare(a: ObjectiveValue, b: ObjectiveValue) -> Ordering:
    """Order two values of the same instance.

    Exact when both come from integer weights; otherwise differences within
    ``1e-9 * w_total`` count as equal.
    """
    if a.w_total != b.w_total:
        raise ValueError(f"values belong to different instances (w_total {a.w_total} vs {b.w_total})")
    tol = 0.0 if (a.integral and b.integral) else REL_TOL * a.w_total
    diff = a.scaled - b.scaled
    if diff > tol:
        return Ordering.GREATER
    if diff < -tol:
        return Ordering.LESS
    return Ordering.EQUAL


def _value(graph: WeightedGraph, correct_total: int, w_sol: float) -> ObjectiveValue:
    return ObjectiveValue(int(correct_total), float(w_sol), graph.w_total, graph.integral)


def evaluate(graph: WeightedGraph, s: Solution, k: int | None = None) -> ObjectiveValue:
    """Full evaluation from scratch (ignores the incremental ledger)."""
    led = recompute_ledger(graph, s, s.k if k is None else k)
    return _value(graph, led.correct_total, led.w_sol)


def current(s: Solution) -> ObjectiveValue:
    """Value held by the incremental ledger."""
    return _value(s.graph, s.correct_total, s.w_sol)


def evaluate_move(s: Solution, v: int, target: int) -> ObjectiveValue:
    """Value after moving ``v`` to ``target`` (a label or ``NEW``), without moving.

    Only the source and target partitions are inspected.
    """
    x = s._state.labels()
    t = s.l if target == NEW else int(target)
    if not 0 <= v < s.n:
        raise ValueError(f"vertex {v} outside 0..{s.n - 1}")
    if t == x[v]:
        raise ValueError("target equals the vertex's current partition")
    if not 0 <= t <= s.l:
        raise ValueError(f"target label {t} outside 0..{s.l - 1}")
    if t == s.l and s._state.size_list[x[v]] == 1:
        return current(s)  # a singleton sent to a new block changes nothing
    ct, ws = s._state.evaluate_move(int(v), t)
    return _value(s.graph, ct, ws)
