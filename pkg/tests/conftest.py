import numpy as np
import pytest

from abcnet.netgen import PopulationGraph


def make_graph(n, edges, positions=None, infected=None):
    if positions is None:
        positions = np.random.default_rng(0).random((n, 2))
    if infected is None:
        infected = np.zeros(n, dtype=bool)
    g = PopulationGraph(np.asarray(positions, float), np.asarray(infected, bool))
    for a, b in edges:
        g.add_edge(a, b)
    return g


class ScriptedRng:
    """Generator stand-in with scripted scalar draws, real draws otherwise."""

    def __init__(self, integers=(), randoms=(), seed=0):
        self._ints = list(integers)
        self._floats = list(randoms)
        self._real = np.random.default_rng(seed)

    def integers(self, lo, hi=None, size=None):
        if size is None and self._ints:
            return self._ints.pop(0)
        return self._real.integers(lo, hi, size=size)

    def random(self, size=None):
        if size is None and self._floats:
            return self._floats.pop(0)
        return self._real.random(size)

    def geometric(self, p, size=None):
        return self._real.geometric(p, size=size)

    def uniform(self, *a, **k):
        return self._real.uniform(*a, **k)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
