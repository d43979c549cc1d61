"""Shared fixtures plus a summary hook that surfaces acceptance check lines."""
import numpy as np
import pytest

import potionslab as pl

from acceptance_log import ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # one line per acceptance check, shown even when stdout capture is on
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance checks")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_table():
    return pl.default_recipe_table()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def k6():
    edges = [(i, j) for i in range(6) for j in range(i + 1, 6)]
    return pl.Graph(6, edges)


@pytest.fixture(scope="session")
def path4():
    return pl.Graph(4, [(0, 1), (1, 2), (2, 3)])
