import pytest

from seplab import PrecisionContext
from seplab.acceptance import alpha_table, derived_series, formal_solution


@pytest.fixture(scope="session")
def sol80():
    return formal_solution(80)


@pytest.fixture(scope="session")
def ds81():
    return derived_series(81)


@pytest.fixture(scope="session")
def table81():
    return alpha_table(81)


@pytest.fixture
def ctx256():
    return PrecisionContext(256)
