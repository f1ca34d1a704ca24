import pytest

from competition_lab.model import Params
from competition_lab.rng import replica_stream

ACCEPTANCE_LINES = []


@pytest.fixture
def stream():
    return replica_stream(42, 3)


PARAM_GRID = [Params(0.3, 0.7), Params(0.5, 0.5), Params(0.8, 0.2), Params(1.0, 0.0), Params(0.2, 0.6)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
