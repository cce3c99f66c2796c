import numpy as np
import pytest

from dgeo import fixtures

_ACCEPTANCE: list[str] = []


def richardson(f, x, h=1e-4):
    """First derivative by central differences, Richardson-combined (error O(h^4))."""
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + 2 * h) - f(x - 2 * h)) / (4 * h)
    return (4 * d1 - d2) / 3


@pytest.fixture
def curve():
    return fixtures.curve


@pytest.fixture
def surface():
    return fixtures.surface


@pytest.fixture
def record():
    """Log an acceptance verdict line; the terminal summary replays them in order."""

    def _record(criterion, ok, detail):
        line = f"criterion {criterion:>3}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


def max_abs(x):
    return float(np.max(np.abs(x)))
