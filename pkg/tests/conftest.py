import numpy as np
import pytest

from bec_backaction.params import reduced_params

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def reduced():
    return reduced_params()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
