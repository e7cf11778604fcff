import numpy as np
import pytest

from gpboot import rng as crng


@pytest.fixture
def stream():
    return crng.CounterStream(20240917, stream=1)


def random_psd(rs, d, rank=None):
    A = rs.standard_normal((d, rank or d))
    return A @ A.T


@pytest.fixture
def rs():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
