import numpy as np
import pytest

from kplex_vns import (
    NEW,
    PartitionFormatError,
    Solution,
    format_partition,
    is_feasible,
    move_vertex,
    parse_partition,
    partition_weight,
    random_initial,
    recompute_ledger,
    undo_move,
)
from kplex_vns.vns import make_bitgen

from .conftest import graph, random_graph


def snapshot(s):
    led = s.ledger
    return (s.x.tolist(), s.l, led.intra_deg.tolist(), led.correct.tolist(), led.correct_total, led.w_sol)


def test_random_initial_single_vertex(backend):
    g = graph(1, [])
    s = random_initial(g, 1, make_bitgen(0), backend)
    assert s.x.tolist() == [0] and s.l == 1


def test_random_initial_bounds_and_reproducible(backend):
    g = graph(4, [(0, 1)])
    for seed in range(20):
        s = random_initial(g, 1, make_bitgen(seed), backend)
        assert set(s.x.tolist()) <= {0, 1} and s.l in (1, 2)
    g100 = graph(100, [])
    a = random_initial(g100, 2, make_bitgen(7), backend)
    b = random_initial(g100, 2, make_bitgen(7), backend)
    assert a.x.tolist() == b.x.tolist()
    assert a.x.max() <= 9
    # labels are dense
    assert sorted(set(a.x.tolist())) == list(range(a.l))


def test_random_initial_same_across_backends():
    from kplex_vns._backend import available

    g = graph(50, [])
    xs = {b: random_initial(g, 1, make_bitgen(5), b).x.tolist() for b in available()}
    assert len({tuple(x) for x in xs.values()}) == 1


def test_move_to_new_on_triangle(k3, backend):
    s = Solution.whole(k3, 1, backend)
    rec = move_vertex(s, 0, NEW)
    assert rec is not None
    assert sorted(map(sorted, s.blocks())) == [[0], [1, 2]]
    assert s.ledger.intra_deg.tolist() == [0, 1, 1]
    assert s.l == 2


def test_noop_moves_are_signalled(k3, backend):
    s = Solution.singletons(k3, 1, backend)
    before = snapshot(s)
    assert move_vertex(s, 0, int(s.x[0])) is None
    assert move_vertex(s, 0, NEW) is None  # singleton to a new block
    undo_move(s, None)
    assert snapshot(s) == before


def test_move_rejects_bad_target(k3, backend):
    s = Solution.whole(k3, 1, backend)
    with pytest.raises(ValueError):
        move_vertex(s, 0, 5)
    with pytest.raises(ValueError):
        move_vertex(s, 7, 0)


def test_emptying_block_compacts_labels(backend):
    g = graph(4, [(0, 1), (2, 3)])
    s = Solution(g, [0, 1, 2, 2], 1, backend)
    move_vertex(s, 0, 1)  # label 0 empties; last label moves into its slot
    assert s.l == 2
    assert sorted(set(s.x.tolist())) == [0, 1]
    assert sorted(map(sorted, s.blocks())) == [[0, 1], [2, 3]]
    assert sum(s.partition_size.values()) == 4


def test_undo_restores_everything(rng, backend):
    g = random_graph(rng, 12, 0.5)
    s = Solution(g, rng.integers(0, 4, 12), 2, backend)
    for _ in range(200):
        before = snapshot(s)
        v = int(rng.integers(12))
        t = int(rng.integers(s.l + 1))
        rec = move_vertex(s, v, NEW if t == s.l else t)
        undo_move(s, rec)
        assert snapshot(s) == before


def test_ledger_tracks_recompute(rng, backend):
    for trial in range(5):
        g = random_graph(rng, 8, 0.5)
        s = Solution(g, rng.integers(0, 3, 8), 1 + trial % 3, backend)
        for _ in range(50):
            v = int(rng.integers(8))
            t = int(rng.integers(s.l + 1))
            move_vertex(s, v, NEW if t == s.l else t)
            assert s.ledger == recompute_ledger(g, s, s.k)


def test_recompute_singletons(c5):
    led = recompute_ledger(c5, list(range(5)), 1)
    assert led.correct.all() and led.correct_total == 5 and led.w_sol == 0


def test_recompute_clique(k3):
    led = recompute_ledger(k3, [0, 0, 0], 1)
    assert led.correct_total == 3 and led.w_sol == k3.w_total


def test_recompute_star(star):
    led = recompute_ledger(star, [0, 0, 0, 0], 1)
    assert led.correct.tolist() == [True, False, False, False]
    assert led.correct_total == 1 and led.w_sol == 0


def test_w_sol_ignores_cross_edges():
    g = graph(2, [(0, 1)])
    led = recompute_ledger(g, [0, 1], 1)
    assert led.correct_total == 2 and led.w_sol == 0


def test_is_feasible(p3, k3, c5):
    assert is_feasible(c5, list(range(5)), 1) == (True, [])
    assert is_feasible(k3, [0, 0, 0], 1) == (True, [])
    assert is_feasible(p3, [0, 0, 0], 1) == (False, [0, 2])
    assert is_feasible(p3, [0, 0, 0], 2) == (True, [])


def test_partition_weight():
    g = graph(3, [(0, 1), (0, 2), (1, 2)], [3, 4, 5])
    assert partition_weight(g, [0, 1, 2]) == 0
    assert partition_weight(g, [0, 0, 0]) == 12
    assert partition_weight(g, [0, 0, 1]) == 3


def test_solution_rejects_bad_args(k3):
    with pytest.raises(ValueError):
        Solution(k3, [0, 0], 1)
    with pytest.raises(ValueError):
        Solution(k3, [0, 0, 0], 0)


def test_labels_compacted_on_construction(k3):
    s = Solution(k3, [5, 9, 5], 1)
    assert s.x.tolist() == [0, 1, 0]


def test_dump_roundtrip():
    text = format_partition([2, 0, 2, 1], k=2, feasible=True, weight=3.0, objective=4.5)
    assert text.splitlines() == [
        "# k: 2",
        "# feasible: true",
        "# weight: 3",
        "# objective: 4.5",
        "P1: 2",
        "P2: 4",
        "P3: 1 3",
    ]
    assert parse_partition(text, 4).tolist() == [2, 0, 2, 1]


@pytest.mark.parametrize(
    "text",
    ["P1: 1 2\n", "P1: 1 2 3\nP2: 3\n", "P1: 1 2 4\n", "Q1: 1 2 3\n", "P1: 1 x 3\n", "1 2 3\n"],
)
def test_dump_parse_errors(text):
    with pytest.raises(PartitionFormatError):
        parse_partition(text, 3)


def test_copy_is_independent(k3, backend):
    s = Solution.whole(k3, 1, backend)
    c = s.copy()
    move_vertex(c, 0, NEW)
    assert s.l == 1 and c.l == 2
    assert np.array_equal(s.x, [0, 0, 0])
