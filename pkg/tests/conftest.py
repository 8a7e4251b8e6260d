import numpy as np
import pytest

from mfvolterra import hurst


@pytest.fixture
def const75():
    return hurst.constant(0.75)


@pytest.fixture
def sinus():
    """h(t) = 0.75 + 0.15 sin(2 pi t), range [0.6, 0.9]."""
    return hurst.sinusoidal(0.75, 0.15)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """record(k, passed, detail): log one acceptance line (shown in the terminal summary)."""
    def _record(k, passed, detail):
        line = f"ACCEPTANCE {k:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append((k, line))
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
