import numpy as np
import pytest

from hopx.functions import QuadraticFunction

_ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def psd_quadratic(rng, n, rank=None):
    M = rng.standard_normal((n, n if rank is None else rank))
    return QuadraticFunction(M @ M.T / n, rng.standard_normal(n))


def stationary_quadratic(rng, n):
    """Quadratic with grad f(c) = 0 exactly, returned with its center."""
    A = psd_quadratic(rng, n).A
    c = rng.standard_normal(n)
    return QuadraticFunction(A, -(A @ c)), c


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def report(number, title, passed, detail=""):
        _ACCEPTANCE[number] = (title, passed, detail)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}  {detail}")
