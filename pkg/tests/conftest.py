import numpy as np
import pytest

from sawladder.ladder import DesignTargets
from sawladder.netcore import (OnePortResponse, abcd_of_series_admittance,
                               abcd_of_shunt_admittance, cascade, make_grid)


def random_passive_stage(grid, rng, lossless=False):
    """Series or shunt embedding of a random admittance with Re(Y) >= 0."""
    n = len(grid)
    g = np.zeros(n) if lossless else rng.uniform(0, 0.05, n)
    b = rng.uniform(-0.05, 0.05, n)
    y = OnePortResponse(grid, g + 1j * b)
    return abcd_of_series_admittance(y) if rng.random() < 0.5 else abcd_of_shunt_admittance(y)


def random_passive_network(grid, rng, n_stages=3, lossless=False):
    return cascade(*[random_passive_stage(grid, rng, lossless) for _ in range(n_stages)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_grid():
    return make_grid(1e9, 2e9, 11)


@pytest.fixture
def demo_targets():
    return DesignTargets(4.3e9, 0.0324, 50.0, ((3.9e9, 4.1e9), (4.5e9, 4.7e9)), 14.0)


@pytest.fixture
def demo_grid():
    return make_grid(3.8e9, 4.8e9, 2001)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
