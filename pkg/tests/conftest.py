import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# the 2-D quadratic with lopsided curvature used throughout
EQ3_H = np.array([[1.0, 0.1], [0.1, 9.0]])
EQ3_H_LIN = np.array([-4.0, -5.0])
EQ3_Q = np.array([[1.0, 1 / 30], [1 / 30, 1.0]])
EQ3_Q_LIN = np.array([-4.0, -5.0 / 3.0])


# acceptance tests append their one-line verdicts here; shown after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
