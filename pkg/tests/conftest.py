import numpy as np
import pytest

from bml.quadrature import build_grid_p1, build_grid_p2


@pytest.fixture(scope="session")
def grid_p1():
    """Light P^1 grid: enough for solver and identity tests."""
    return build_grid_p1(n_radial=6, n_angular=16, depth=12)


@pytest.fixture(scope="session")
def grid_p1_fine():
    """Default-resolution P^1 grid for closed-form comparisons."""
    return build_grid_p1()


@pytest.fixture(scope="session")
def grid_p2():
    return build_grid_p2(n_simplex=4, n_angular=8, depth=5)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
