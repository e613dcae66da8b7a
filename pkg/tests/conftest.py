import numpy as np
import pytest

from mbqc.graphs import Graph
from mbqc.statevector import StateVector


def random_graph(n, rng, p=0.5):
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    return Graph(n, edges)


def random_state(n, rng):
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector(n, v / np.linalg.norm(v))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
