import warnings

import pytest
from hypothesis import HealthCheck, settings

from logrs.errors import FiberEnumerationIncomplete
from logrs.numerics import CPoly, PQForm, pqform_from_polynomial

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_window_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FiberEnumerationIncomplete)
        yield


@pytest.fixture
def square():
    return pqform_from_polynomial(CPoly([0, 0, 1]))


@pytest.fixture
def cube():
    return pqform_from_polynomial(CPoly([0, 0, 0, 1]))


@pytest.fixture
def expo():
    """F = e^z: P = t, Q = 1, F(0) = 1."""
    return PQForm(CPoly([0, 1]), CPoly([1]), 0, 1)


@pytest.fixture
def gauss():
    """F = int_0^z e^{-t^2} dt."""
    return PQForm(CPoly([0, 0, -1]), CPoly([1]), 0, 0)
