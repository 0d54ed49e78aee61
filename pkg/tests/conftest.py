import numpy as np
import pytest

from alphaleak import make_channel, make_pmf
from alphaleak.optimize import OptimizerConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def cfg():
    return OptimizerConfig(seed=99)


def random_pair(rng, nx, ny):
    """Full-support prior/channel pair (mixed 10% toward uniform)."""
    p = 0.9 * rng.dirichlet(np.ones(nx)) + 0.1 / nx
    W = 0.9 * rng.dirichlet(np.ones(ny), size=nx) + 0.1 / ny
    return make_pmf(p, renormalize=True), make_channel(W, renormalize=True)


@pytest.fixture
def bsc():
    return make_pmf([0.5, 0.5]), make_channel([[0.9, 0.1], [0.1, 0.9]])


@pytest.fixture
def constant_channel():
    # both rows identical: output independent of input
    return make_channel([[0.3, 0.5, 0.2], [0.3, 0.5, 0.2]])


@pytest.fixture
def identity_channel():
    return make_channel([[1.0, 0.0], [0.0, 1.0]])
