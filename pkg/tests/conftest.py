"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest
import scipy.linalg as sla

from daepsa import decompose
from daepsa.fixtures import all_fixtures, jordan_example, premultipliers, spiral_example


def jordan_oracle():
    """Generator of the Jordan example built by hand.

    The constraint ``x1 + x2 + x3 = 0`` lets ``(x1, x2)`` parametrise the
    state, ``x = P y`` with ``y' = B y``.  With ``P = Q R`` the generator in
    the orthonormal basis ``Q`` is ``R B R^{-1}``.
    """
    B = np.array([[-1.0, -10.0], [0.0, -1.0]])
    P = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    Q, R = np.linalg.qr(P)
    return R @ B @ np.linalg.inv(R), Q, B, P


def exp_norm_oracle(M, t):
    """``||e^{tM}||_2`` via scipy's expm (independent of the package's Padé code)."""
    return float(np.linalg.norm(sla.expm(t * M), 2))


def sigmin_oracle(M, z):
    return float(np.linalg.svd(z * np.eye(M.shape[0]) - M, compute_uv=False)[-1])


@pytest.fixture(scope="session")
def p1():
    return jordan_example()


@pytest.fixture(scope="session")
def p2():
    return spiral_example()


@pytest.fixture(scope="session")
def fd1(p1):
    return decompose(p1, 0.0)


@pytest.fixture(scope="session")
def fd2(p2):
    return decompose(p2, 0.0)


@pytest.fixture(scope="session")
def tmats():
    return premultipliers()


@pytest.fixture(scope="session")
def fixtures_dense():
    return all_fixtures()


@pytest.fixture(scope="session")
def decomps(fixtures_dense):
    return {name: decompose(p) for name, p in fixtures_dense.items()}


# ----------------------------------------------------------------------------
# acceptance report: one line per criterion, repeated in the terminal summary
# ----------------------------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
