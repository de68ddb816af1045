import numpy as np
import pytest

from photonic_qelm import CoinParams, PrepParams, input_state, two_step_walk

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def generic_walk():
    # eta = 0.3 + 1.3 - 1.4 != 0: off-diagonal coin, all five outcomes populated
    return two_step_walk(CoinParams(0.3, 0.7, 1.3), input_state(PrepParams(0.2, 0.5)))


@pytest.fixture
def good_walk():
    """Well-conditioned walk (the CLI default)."""
    return two_step_walk(CoinParams(2.86, 3.69, 5.28), input_state(PrepParams(0.0, 0.0)))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
