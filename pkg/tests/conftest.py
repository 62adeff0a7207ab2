import numpy as np
import pytest

from pdcch_mwis.graph import build_graph

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def star():
    return build_graph([10, 4, 4, 4], [(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def triangle():
    return build_graph([5, 4, 3], [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path3():
    def make(weights):
        return build_graph(list(weights), [(0, 1), (1, 2)])

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
