import numpy as np
import pytest

import heatlab as hl


@pytest.fixture(scope="session")
def ou_model():
    return hl.make_ou(8.0)


@pytest.fixture(scope="session")
def ou_setup(ou_model):
    grid = hl.make_grid(ou_model, 800)
    op = hl.discretize(ou_model, grid)
    dec = hl.eigendecompose(op)
    return grid, op, dec


@pytest.fixture(scope="session")
def ou_fine_setup(ou_model):
    # finer grid for small-time kernel comparisons
    grid = hl.make_grid(ou_model, 1600)
    op = hl.discretize(ou_model, grid)
    dec = hl.eigendecompose(op)
    return grid, op, dec


@pytest.fixture(scope="session")
def mua_model():
    return hl.make_mu_a(1.5, 10.0)


@pytest.fixture(scope="session")
def mua_setup(mua_model):
    grid = hl.make_grid(mua_model, 800)
    op = hl.discretize(mua_model, grid)
    dec = hl.eigendecompose(op)
    return grid, op, dec


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
