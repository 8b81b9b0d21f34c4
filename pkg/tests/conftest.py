import numpy as np
import pytest

from bindenoise import BinaryMatrix


def m1_array():
    """10 x 11 fixture: a 5 x 3 block plus scattered singletons (1-based in comments)."""
    X = np.zeros((10, 11), dtype=bool)
    X[0:5, 0:3] = True
    for r, cols in {6: (4, 9), 7: (5, 10), 8: (6, 11), 9: (7,), 10: (8,)}.items():
        for c in cols:
            X[r - 1, c - 1] = True
    return X


def m1_block():
    B = np.zeros((10, 11), dtype=bool)
    B[0:5, 0:3] = True
    return B


@pytest.fixture
def M1():
    return BinaryMatrix.from_array(m1_array())


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
