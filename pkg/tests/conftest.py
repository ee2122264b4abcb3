import numpy as np
import pytest

from heatlab.mms import AnalyticSpace1D, FiniteWeightedSpace


@pytest.fixture
def two_state():
    return FiniteWeightedSpace.two_state()


@pytest.fixture
def interval():
    return AnalyticSpace1D("reflecting_interval", 1.0)


def random_space(rng, n, p_edge=0.6):
    """Connected random graph: a random spanning path plus extra random edges."""
    m = rng.dirichlet(np.ones(n)) * 0.8 + 0.2 / n
    m /= m.sum()
    order = rng.permutation(n)
    edges = [(order[i], order[i + 1], rng.uniform(0.2, 2.0)) for i in range(n - 1)]
    for x in range(n):
        for y in range(x + 1, n):
            if rng.random() < p_edge * 0.5:
                edges.append((x, y, rng.uniform(0.2, 2.0)))
    return FiniteWeightedSpace.from_edges(m, edges, name=f"random{n}")
