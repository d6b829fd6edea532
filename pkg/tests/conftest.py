import numpy as np
import pytest

from clockrc.clock import build_weight_table
from clockrc.lattice import Graph
from clockrc.oracle import load_corpus


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240611))


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture
def q4():
    return build_weight_table(4, 1.0)


def single_edge():
    """Free vertex 0 joined to boundary vertex 1."""
    return Graph(2, (1,), ((0, 1),))


def path3():
    """Boundary 0 - free 1 - boundary 2."""
    return Graph(3, (0, 2), ((0, 1), (1, 2)))


def triangle():
    """Free 0, 1 and boundary 2, all joined."""
    return Graph(3, (2,), ((0, 1), (0, 2), (1, 2)))
