import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import lipfree as L  # noqa: E402


@pytest.fixture(scope="session")
def spaces():
    return L.gallery()


@pytest.fixture(scope="session")
def ti(spaces):
    return spaces["two_intervals"]


@pytest.fixture(scope="session")
def gap_pair(ti):
    return ti.index_of("1"), ti.index_of("2")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
