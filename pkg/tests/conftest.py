"""
Shared fixtures: small grids, the 1x3 two-seed instance and random growth instances
"""
import numpy as np
import pytest

from msfseg.engine.grid import GridGraph, Image, SeedSet, Segmentation
from msfseg.models.params import init_params


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line3():
    """1x3 grid: e01 = 0, e12 = 1"""
    return GridGraph(1, 3)


@pytest.fixture
def line3_gt(line3):
    return Segmentation(line3, [1, 1, 2])


@pytest.fixture
def line3_seeds():
    return SeedSet(((0, 1), (2, 2)))


def random_instance(rng: np.random.Generator, max_side: int = 6, n_seeds: int = None):
    """Random grid, distinct altitudes, distinct seed nodes and a seed-consistent GT"""
    graph = GridGraph(int(rng.integers(2, max_side + 1)), int(rng.integers(2, max_side + 1)))
    altitudes = rng.permutation(graph.n_edges).astype(np.float64) / graph.n_edges
    count = n_seeds or int(rng.integers(1, 4))
    nodes = rng.choice(graph.n_nodes, size=min(count, graph.n_nodes), replace=False)
    return graph, altitudes, SeedSet.from_nodes(int(n) for n in nodes)


def ramp_image(height: int, width: int, channels: int = 1) -> Image:
    values = np.arange(height * width * channels, dtype=np.float64).reshape(height, width, channels)
    return Image.from_array(values / values.size)


def small_params(kind: str, channels: int = 1, radius: int = 1, hidden: int = 6, r: int = 5, seed: int = 0):
    return init_params(kind, channels, radius, hidden, r, rng=np.random.default_rng(seed))


def zeroed(params):
    return params.with_theta(np.zeros(params.size))
