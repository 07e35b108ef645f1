import numpy as np
import pytest

from gave.linalg import Matrix

# Two 2x2 instances used throughout: in the first ||A^-1 B|| > 1, in the
# second ||A^-1 B|| < 1 while rho(|A^-1 B|) = 1.
EX1_A = [[1.0, 0.5], [3.0, 0.25]]
EX1_B = [[1.0, 0.0], [2.1, 1.0]]
EX2_A = [[3.0, 0.0], [0.0, 3.0]]
EX2_B = [[-2.0, 1.0], [1.0, 2.0]]

# criterion number -> (passed, message); filled in by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def ex1():
    return Matrix.dense(EX1_A), Matrix.dense(EX1_B)


@pytest.fixture
def ex2():
    return Matrix.dense(EX2_A), Matrix.dense(EX2_B)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, message = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'}  {message}")
