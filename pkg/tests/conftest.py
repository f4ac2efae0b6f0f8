import numpy as np
import pytest

from randfeas.instances import WeightedGraph

ACCEPTANCE_LINES: list[str] = []


def random_connected_graph(rng: np.random.Generator, n: int, extra_p: float = 0.5,
                           low: float = 0.0, high: float = 1.0) -> WeightedGraph:
    """Random spanning tree plus each remaining pair with probability ``extra_p``."""
    perm = rng.permutation(n)
    pairs = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        a, b = int(perm[i]), int(perm[j])
        pairs.add((min(a, b), max(a, b)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in pairs and rng.random() < extra_p:
                pairs.add((u, v))
    return WeightedGraph.from_edges(n, [(u, v, rng.uniform(low, high)) for u, v in pairs])


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
