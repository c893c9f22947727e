import numpy as np
import pytest

from chdlab import Field, GridSpec


@pytest.fixture(scope="session")
def grid32():
    return GridSpec(32, 32, 1.0, 1.0)


@pytest.fixture(scope="session")
def grid_rect():
    return GridSpec(32, 24, 1.3, 0.7)


def random_field(grid, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return Field(grid, scale * rng.standard_normal((grid.nx, grid.ny)))


def smooth_field(grid, seed=0, scale=1.0, max_mode=5):
    """Band-limited random field: products stay resolved and alias-free."""
    rng = np.random.default_rng(seed)
    amps = np.zeros((grid.nx, grid.ny))
    amps[: max_mode + 1, : max_mode + 1] = rng.standard_normal((max_mode + 1, max_mode + 1))
    return Field(grid, scale * grid.to_vals(amps))
