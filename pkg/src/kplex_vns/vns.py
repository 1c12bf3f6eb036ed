"""Variable neighborhood search driver.

Each run starts from a random partition, applies local search, then loops
shake -> local search -> accept until an iteration, stall or time limit is
reached. The inner loop lives in the selected kernel.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _backend
from .graph import WeightedGraph
from .objective import ObjectiveValue, Ordering, compare, current
from .oracle import verify_partition
from .solution import Solution, random_initial

JOBS_ENV = "KPLEX_VNS_JOBS"
TERMINATIONS = ("it_max", "itrep_max", "t_max")


@dataclass(frozen=True)
class SolverConfig:
    k: int = 1
    n_min: int = 1
    n_max: int = 80
    it_max: int = 20000
    itrep_max: int = 10000
    t_max: float = 3600.0
    prob: float = 0.1
    seed: int = 0
    runs: int = 10

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError(f"need 1 <= n_min <= n_max, got {self.n_min}, {self.n_max}")
        for name in ("it_max", "itrep_max", "runs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"prob must lie in [0, 1], got {self.prob}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def make_bitgen(seed: int, run: int = 0) -> np.random.PCG64:
    """Independent stream for run ``run`` of a job seeded with ``seed``."""
    return np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(run,)))


@dataclass
class RunResult:
    run: int
    labels: np.ndarray = field(repr=False)
    objective: ObjectiveValue
    weight: float
    feasible: bool
    violators: list[int]
    iterations: int
    elapsed: float
    termination: str
    trace: list[tuple[int, int, float]] = field(default_factory=list, repr=False)


@dataclass
class RunReport:
    """Aggregate over independent runs on one instance and one k."""

    config: SolverConfig
    runs: list[RunResult]
    backend: str
    wall_time: float = 0.0

    @property
    def best(self) -> RunResult:
        best = self.runs[0]
        for r in self.runs[1:]:
            if compare(r.objective, best.objective) is Ordering.GREATER:
                best = r
        return best

    @property
    def best_weight(self) -> float:
        return self.best.weight

    @property
    def avg_weight(self) -> float:
        return math.fsum(r.weight for r in self.runs) / len(self.runs)

    @property
    def gap_percent(self) -> float:
        return gap(self.best_weight, self.avg_weight)

    @property
    def total_time(self) -> float:
        """Sum of per-run times."""
        return math.fsum(r.elapsed for r in self.runs)

    @property
    def feasible(self) -> bool:
        return self.best.feasible

    def terminations(self) -> dict[str, int]:
        counts = {t: 0 for t in TERMINATIONS}
        for r in self.runs:
            counts[r.termination] += 1
        return {t: c for t, c in counts.items() if c}


def gap(best: float, avg: float) -> float:
    """Percentage spread between best and average weight; 0 when best is 0."""
    if best == 0:
        return 0.0
    return 100.0 * (best - avg) / best


# -- single steps (thin wrappers over the kernel, for testing and reuse) ---


def shake(s: Solution, kappa: int, bitgen: np.random.BitGenerator) -> None:
    """Move ``min(kappa, n)`` distinct random vertices to random partitions."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    s._state.shake(int(kappa), bitgen)


def local_search(s: Solution, bitgen: np.random.BitGenerator, deadline: float = math.inf) -> int:
    """1-swap first improvement until no single move helps; returns the move count."""
    return s._state.local_search(bitgen, deadline)


def accept(
    best: ObjectiveValue,
    candidate: ObjectiveValue,
    prob: float,
    bitgen: np.random.BitGenerator,
) -> bool:
    """Whether the candidate replaces the incumbent."""
    order = compare(candidate, best)
    if order is Ordering.GREATER:
        return True
    if order is Ordering.LESS:
        return False
    return _backend.kernel.uniform(bitgen.random_raw) < prob


# -- drivers ---------------------------------------------------------------


def solve(
    graph: WeightedGraph,
    config: SolverConfig = SolverConfig(),
    run: int = 0,
    backend: str | None = None,
) -> RunResult:
    """One VNS run with the stream derived from ``(config.seed, run)``."""
    bitgen = make_bitgen(config.seed, run)
    if graph.n == 0:
        return RunResult(run, np.zeros(0, dtype=np.int64), ObjectiveValue(0, 0.0, 0.0),
                         0.0, True, [], 0, 0.0, "it_max")
    s = random_initial(graph, config.k, bitgen, backend)
    work = s.copy()
    kern = s._kernel
    info = kern.run_vns(
        s._state, work._state, bitgen,
        config.n_min, config.n_max, config.it_max, config.itrep_max,
        float(config.t_max), float(config.prob),
    )
    labels = s.x
    cert = verify_partition(graph, labels, config.k)
    return RunResult(
        run=run,
        labels=labels,
        objective=current(s),
        weight=cert.weight,
        feasible=cert.feasible,
        violators=list(cert.violators),
        iterations=info["iterations"],
        elapsed=info["elapsed"],
        termination=info["reason"],
        trace=info["trace"],
    )


def _solve_star(args):
    return solve(*args)


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None
    return 1


def solve_repeated(
    graph: WeightedGraph,
    config: SolverConfig = SolverConfig(),
    jobs: int | None = None,
    backend: str | None = None,
) -> RunReport:
    """``config.runs`` independent runs; results are independent of ``jobs``."""
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    name = _backend.get(backend).BACKEND
    start = time.perf_counter()
    tasks = [(graph, config, r, name) for r in range(config.runs)]
    if jobs == 1 or config.runs == 1:
        results = [_solve_star(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, config.runs)) as pool:
            results = list(pool.map(_solve_star, tasks))
    return RunReport(config, results, name, time.perf_counter() - start)


def config_dict(config: SolverConfig) -> dict:
    return asdict(config)
