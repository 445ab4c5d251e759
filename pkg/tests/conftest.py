import numpy as np
import pytest

from navier_vi.grid import full_mask, interval_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def unit31():
    return full_mask(interval_grid(31))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
            terminalreporter.write_line(line[1])
