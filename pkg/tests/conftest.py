import numpy as np
import pytest

from mixedflow.harmonics import build_grid


@pytest.fixture(scope="session")
def grid1():
    return build_grid(1, 16, oversample=2.0)


@pytest.fixture(scope="session")
def grid2():
    return build_grid(2, 16, oversample=2.0)


@pytest.fixture(scope="session")
def grid2_small():
    return build_grid(2, 8, oversample=2.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def band_coeffs(grid, rng, l_lo=0, l_hi=None, scale=1.0):
    """Random coefficient vector supported on degrees l_lo..l_hi."""
    l_hi = grid.L_max if l_hi is None else l_hi
    c = rng.standard_normal(grid.size) * scale
    c[(grid.degrees < l_lo) | (grid.degrees > l_hi)] = 0.0
    return c
