"""Property-based checks of the bookkeeping and the exact solver."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from kplex_vns import (
    NEW,
    Solution,
    exact_solve,
    is_feasible,
    move_vertex,
    partition_weight,
    recompute_ledger,
    undo_move,
    verify_partition,
)
from kplex_vns._backend import available
from kplex_vns.graph import WeightedGraph
from kplex_vns.objective import evaluate, evaluate_move
from kplex_vns.solution import compact_labels


@st.composite
def graphs(draw, min_n=1, max_n=12, real=False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    if real:
        w = st.floats(0.01, 100.0, allow_nan=False)
    else:
        w = st.integers(1, 10)
    return WeightedGraph.from_edges(n, [(u, v, draw(w)) for u, v in chosen])


@st.composite
def states(draw, real=False):
    g = draw(graphs(real=real))
    labels = draw(st.lists(st.integers(0, 4), min_size=g.n, max_size=g.n))
    k = draw(st.integers(1, 4))
    moves = draw(st.lists(st.tuples(st.integers(0, g.n - 1), st.integers(0, 20)), max_size=30))
    backend = draw(st.sampled_from(available()))
    return g, labels, k, moves, backend


def apply(s, v, t):
    t %= s.l + 1
    return move_vertex(s, v, NEW if t == s.l else t)


@settings(max_examples=150, deadline=None)
@given(states())
def test_ledger_equals_recompute_after_moves(case):
    g, labels, k, moves, backend = case
    s = Solution(g, labels, k, backend)
    for v, t in moves:
        apply(s, v, t)
        assert s.ledger == recompute_ledger(g, s, k)
        assert sum(s.partition_size.values()) == g.n
        assert sorted(set(s.x.tolist())) == list(range(s.l))


@settings(max_examples=150, deadline=None)
@given(states())
def test_move_then_undo_is_identity(case):
    g, labels, k, moves, backend = case
    s = Solution(g, labels, k, backend)
    records = []
    history = []
    for v, t in moves:
        history.append((s.x.tolist(), s.ledger))
        records.append(apply(s, v, t))
    for rec, (x, led) in zip(reversed(records), reversed(history)):
        undo_move(s, rec)
        assert s.x.tolist() == x
        assert s.ledger == led


@settings(max_examples=100, deadline=None)
@given(states(real=True))
def test_delta_matches_full_for_real_weights(case):
    g, labels, k, moves, backend = case
    s = Solution(g, labels, k, backend)
    for v, t in moves:
        t %= s.l + 1
        if t == s.x[v]:
            continue
        target = NEW if t == s.l else t
        probe = evaluate_move(s, v, target)
        move_vertex(s, v, target)
        full = evaluate(g, s)
        assert probe.correct_total == full.correct_total
        assert abs(probe.w_sol - full.w_sol) <= 1e-9 * max(g.w_total, 1.0)


@settings(max_examples=100, deadline=None)
@given(graphs(), st.lists(st.integers(0, 6), min_size=12, max_size=12))
def test_relabeling_preserves_blocks(g, raw):
    labels = raw[: g.n]
    dense = compact_labels(labels)
    blocks = lambda xs: sorted(sorted(np.flatnonzero(np.asarray(xs) == p).tolist()) for p in set(xs))
    assert blocks(labels) == blocks(dense.tolist())


@settings(max_examples=100, deadline=None)
@given(graphs(), st.integers(1, 3), st.lists(st.integers(0, 4), min_size=12, max_size=12))
def test_feasible_means_w_sol_is_partition_weight(g, k, raw):
    labels = raw[: g.n]
    ok, bad = is_feasible(g, labels, k)
    cert = verify_partition(g, labels, k)
    assert ok == cert.feasible and bad == list(cert.violators)
    if ok:
        assert recompute_ledger(g, labels, k).w_sol == partition_weight(g, labels)


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=7))
def test_exact_monotone_in_k(g):
    weights = [exact_solve(g, k).optimum_weight for k in (1, 2, 3)]
    assert weights == sorted(weights)
