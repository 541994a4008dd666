import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from netresist import generators as gen  # noqa: E402
from netresist.graph import Graph  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def k4():
    return gen.complete_graph(4)


@pytest.fixture
def c6():
    return gen.cycle(6)


@pytest.fixture
def two_triangles():
    return Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
