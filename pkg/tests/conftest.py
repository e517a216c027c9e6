import pytest

from stardeform import moyal_algebra
from stardeform.fixtures import bott_projection
from stardeform.modules import DeformedModule

THETA = ((0, 1), (-1, 0))
THETA_ZERO = ((0, 0), (0, 0))
VARS = ("x", "p")


@pytest.fixture(scope="session")
def alg_poly4():
    return moyal_algebra(THETA, 4, VARS)


@pytest.fixture(scope="session")
def alg_poly3():
    return moyal_algebra(THETA, 3, VARS)


@pytest.fixture(scope="session")
def alg_rat3():
    return moyal_algebra(THETA, 3, VARS, coeff_kind="ratfunc")


@pytest.fixture(scope="session")
def alg_rat2():
    return moyal_algebra(THETA, 2, VARS, coeff_kind="ratfunc")


@pytest.fixture(scope="session")
def alg_zero3():
    return moyal_algebra(THETA_ZERO, 3, VARS, coeff_kind="ratfunc")


@pytest.fixture(scope="session")
def bott_grid():
    return bott_projection(VARS)


@pytest.fixture(scope="session")
def bott_module(alg_rat3, bott_grid):
    return DeformedModule.build(alg_rat3, bott_grid)


@pytest.fixture(scope="session")
def bott_module_recursive(alg_rat3, bott_grid):
    return DeformedModule.build(alg_rat3, bott_grid, method="recursive")


@pytest.fixture(scope="session")
def bott_module2(alg_rat2, bott_grid):
    return DeformedModule.build(alg_rat2, bott_grid)
