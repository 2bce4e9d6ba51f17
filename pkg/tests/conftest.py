import numpy as np
import pytest

from irs_precoding.signals import make_constellation, symbol_table

_ACCEPTANCE = []


@pytest.fixture
def qpsk():
    return make_constellation(4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def random_channels(rng, K, N):
    return (rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))) / np.sqrt(2)


def random_symbols(rng, const, K):
    return const.points[rng.integers(const.M, size=K)]


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
