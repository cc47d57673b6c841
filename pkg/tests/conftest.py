import numpy as np
import pytest

from mqsfeti import BoxGeometry, Materials, discretize

OMEGA_50HZ = 2 * np.pi * 50

# acceptance results are collected here and echoed once at the end of the run
ACCEPTANCE_LINES = []


def half_box(n):
    return BoxGeometry((0, 0, 0), (1, 1, 1), (0, 0, 0), (0.5, 1, 1), n)


def smallest_box():
    return BoxGeometry((0, 0, 0), (2, 1, 1), (0, 0, 0), (1, 1, 1), 1)


@pytest.fixture(scope="session")
def disc2():
    return discretize(half_box(2))


@pytest.fixture(scope="session")
def disc4():
    return discretize(half_box(4))


@pytest.fixture(scope="session")
def disc_small():
    return discretize(smallest_box())


@pytest.fixture
def materials():
    return Materials()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
