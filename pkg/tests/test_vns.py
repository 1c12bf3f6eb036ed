import math

import numpy as np
import pytest

from kplex_vns import (
    NEW,
    Ordering,
    Solution,
    SolverConfig,
    compare,
    evaluate,
    exact_solve,
    gap,
    move_vertex,
    recompute_ledger,
    solve,
    solve_repeated,
)
from kplex_vns.objective import ObjectiveValue
from kplex_vns.vns import accept, default_jobs, local_search, make_bitgen, shake

from .conftest import graph, random_graph

QUICK = dict(it_max=300, itrep_max=100, runs=3)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(k=0),
        dict(n_min=0),
        dict(n_min=5, n_max=4),
        dict(it_max=0),
        dict(itrep_max=0),
        dict(runs=0),
        dict(t_max=0),
        dict(prob=1.5),
        dict(seed=-1),
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_config_defaults():
    c = SolverConfig()
    assert (c.n_min, c.n_max, c.prob, c.it_max, c.itrep_max, c.t_max, c.runs) == (
        1, 80, 0.1, 20000, 10000, 3600.0, 10,
    )


def test_shake_on_two_singletons(backend):
    g = graph(2, [(0, 1)])
    outcomes = set()
    for seed in range(40):
        s = Solution.singletons(g, 1, backend)
        shake(s, 1, make_bitgen(seed))
        outcomes.add(s.l)
    assert outcomes == {1, 2}


def test_shake_large_kappa_keeps_state_valid(rng, backend):
    g = random_graph(rng, 15, 0.4)
    s = Solution(g, rng.integers(0, 4, 15), 2, backend)
    shake(s, 1000, make_bitgen(1))
    assert s.ledger == recompute_ledger(g, s, 2)
    assert sorted(set(s.x.tolist())) == list(range(s.l))
    with pytest.raises(ValueError):
        shake(s, 0, make_bitgen(1))


def test_local_search_on_path(p3, backend):
    s = Solution.whole(p3, 1, backend)
    local_search(s, make_bitgen(0))
    val = evaluate(p3, s)
    assert val.correct_total == 3 and val.w_sol == 1 and val.value == 3.5


def test_local_search_merges_edge(backend):
    g = graph(2, [(0, 1)])
    s = Solution.singletons(g, 1, backend)
    assert evaluate(g, s).value == 2
    assert local_search(s, make_bitgen(0)) == 1
    assert evaluate(g, s).value == 3


def test_local_search_is_idempotent(rng, backend):
    for _ in range(5):
        g = random_graph(rng, 14, 0.5)
        s = Solution(g, rng.integers(0, 4, 14), 2, backend)
        local_search(s, make_bitgen(2))
        before = s.x.tolist()
        assert local_search(s, make_bitgen(3)) == 0
        assert s.x.tolist() == before


def test_accept_rules():
    lo, hi = ObjectiveValue(3, 1.0, 4.0), ObjectiveValue(3, 2.0, 4.0)
    bg = make_bitgen(0)
    assert all(accept(lo, hi, 0.0, bg) for _ in range(50))
    assert not any(accept(hi, lo, 1.0, bg) for _ in range(50))
    taken = sum(accept(lo, lo, 0.1, bg) for _ in range(10000))
    assert 850 <= taken <= 1150


def test_solve_triangle(k3, backend):
    r = solve(k3, SolverConfig(k=1, **QUICK), backend=backend)
    assert r.weight == 3 and r.objective.value == 4.0 and r.feasible


def test_solve_edgeless():
    g = graph(5, [])
    r = solve(g, SolverConfig(k=2, **QUICK))
    assert r.weight == 0 and r.objective.value == 5 and r.feasible


def test_solve_empty_graph():
    r = solve(graph(0, []), SolverConfig(**QUICK))
    assert r.feasible and r.weight == 0


def test_solve_is_deterministic(rng, backend):
    g = random_graph(rng, 20, 0.4)
    cfg = SolverConfig(k=2, seed=9, **QUICK)
    a, b = solve(g, cfg, backend=backend), solve(g, cfg, backend=backend)
    assert a.labels.tolist() == b.labels.tolist()
    assert a.iterations == b.iterations and a.trace == b.trace


def test_trace_is_non_decreasing(rng):
    g = random_graph(rng, 25, 0.5)
    r = solve(g, SolverConfig(k=2, it_max=500, itrep_max=500))
    vals = [ObjectiveValue(ct, ws, g.w_total) for _, ct, ws in r.trace]
    for a, b in zip(vals, vals[1:]):
        assert compare(b, a) is Ordering.GREATER
    assert r.iterations == 500 and r.termination == "it_max"


def test_termination_reasons(rng):
    g = random_graph(rng, 10, 0.5)
    assert solve(g, SolverConfig(it_max=10, itrep_max=10000)).termination == "it_max"
    assert solve(g, SolverConfig(it_max=10000, itrep_max=5)).termination == "itrep_max"
    big = random_graph(rng, 120, 0.5)
    r = solve(big, SolverConfig(t_max=0.05, it_max=10**9, itrep_max=10**9))
    assert r.termination == "t_max" and r.feasible


def test_single_run_aggregate(k3):
    cfg = SolverConfig(**{**QUICK, "runs": 1})
    rep = solve_repeated(k3, cfg)
    one = solve(k3, cfg)
    assert len(rep.runs) == 1
    assert rep.best_weight == one.weight == rep.avg_weight
    assert rep.gap_percent == 0


def test_repeated_is_deterministic_and_jobs_independent(rng):
    g = random_graph(rng, 18, 0.5)
    cfg = SolverConfig(k=2, seed=4, **QUICK)
    a = solve_repeated(g, cfg, jobs=1)
    b = solve_repeated(g, cfg, jobs=2)
    assert [r.labels.tolist() for r in a.runs] == [r.labels.tolist() for r in b.runs]
    assert a.best.run == b.best.run


def test_runs_use_distinct_streams(rng):
    g = random_graph(rng, 30, 0.5)
    rep = solve_repeated(g, SolverConfig(k=2, it_max=5, itrep_max=5, runs=4))
    assert len({tuple(r.labels.tolist()) for r in rep.runs}) > 1


def test_gap():
    assert gap(100, 100) == 0
    assert gap(0, 0) == 0
    assert math.isclose(gap(1365, 1363.5), 0.10989, rel_tol=1e-4)


def test_report_statistics(rng):
    g = random_graph(rng, 20, 0.5)
    rep = solve_repeated(g, SolverConfig(k=1, it_max=20, itrep_max=20, runs=5))
    ws = [r.weight for r in rep.runs]
    assert rep.best_weight == max(ws)
    assert math.isclose(rep.avg_weight, sum(ws) / 5)
    assert sum(rep.terminations().values()) == 5
    assert math.isclose(rep.total_time, sum(r.elapsed for r in rep.runs))


def test_jobs_env(monkeypatch):
    monkeypatch.setenv("KPLEX_VNS_JOBS", "3")
    assert default_jobs() == 3
    monkeypatch.setenv("KPLEX_VNS_JOBS", "lots")
    with pytest.raises(ValueError):
        default_jobs()


def test_matches_oracle_on_small_graphs():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = random_graph(rng, int(rng.integers(4, 9)), 0.5)
        for k in (1, 2):
            rep = solve_repeated(g, SolverConfig(k=k, it_max=2000, itrep_max=500, runs=3))
            assert rep.best_weight == exact_solve(g, k).optimum_weight
