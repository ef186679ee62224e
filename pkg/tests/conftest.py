import pytest

from intercw.field import FieldModulus, MERSENNE_61
from intercw.rng import SeededRng

ACCEPTANCE_LINES = []


@pytest.fixture
def q13():
    return FieldModulus(13)


@pytest.fixture
def m61():
    return FieldModulus(MERSENNE_61)


@pytest.fixture
def rng():
    return SeededRng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
