from __future__ import annotations

import numpy as np
import pytest

from kplex_vns import WeightedGraph
from kplex_vns._backend import available

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def graph(n, pairs, weights=None):
    weights = weights or [1] * len(pairs)
    return WeightedGraph.from_edges(n, [(u, v, w) for (u, v), w in zip(pairs, weights)])


def random_graph(rng, n, density, wmax=10, real=False):
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                w = rng.uniform(0.1, wmax) if real else int(rng.integers(1, wmax + 1))
                edges.append((i, j, w))
    return WeightedGraph.from_edges(n, edges)


@pytest.fixture(params=available())
def backend(request):
    return request.param


@pytest.fixture
def k3():
    return graph(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def p3():
    return graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def c5():
    return graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])


@pytest.fixture
def star():
    return graph(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
