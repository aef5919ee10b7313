"""Finite/infinite splitting, shift handling and DAE solutions."""

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from conftest import jordan_oracle
from daepsa import (
    InconsistentInitialConditionError, InputError, NumericalError, Pencil, SingularMatrixError,
    SingularPencilError, check_mu_independence, consistency_residual, decompose, finite_eigenvalues,
    select_shift, shifted_operator, solution_at,
)
from daepsa.fixtures import random_regular_pencil
from daepsa.pencil import match_distance


class TestPencil:
    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            Pencil(np.eye(2), np.eye(3))

    def test_non_square(self):
        with pytest.raises(InputError):
            Pencil(np.ones((2, 3)), np.ones((2, 3)))

    def test_premultiply(self, p1, tmats):
        q = p1.premultiply(tmats[0])
        assert np.allclose(q.A, tmats[0] @ p1.A)


class TestDecompose:
    def test_jordan_example(self, fd1):
        assert (fd1.d, fd1.index, fd1.m) == (1, 1, 2)
        assert match_distance(finite_eigenvalues(fd1), [-1, -1]) < 1e-10

    def test_spiral_example(self, fd2):
        assert (fd2.d, fd2.index) == (1, 1)
        assert match_distance(finite_eigenvalues(fd2), [-1 + 5j, -1 - 5j]) < 1e-10

    def test_residuals(self, fd1):
        assert fd1.reconstruction_residual() < 1e-14
        assert fd1.unitarity_residual() < 1e-14
        assert np.allclose(np.tril(fd1.G, -1), 0)

    def test_generator_matches_hand_oracle(self, fd1):
        M, Q, _, _ = jordan_oracle()
        # same operator in a possibly different orthonormal basis of the same subspace
        W = Q.T @ fd1.Q
        assert np.allclose(W.conj().T @ W, np.eye(2))
        assert np.allclose(W @ fd1.generator @ W.conj().T, M, atol=1e-13)

    def test_generator_is_read_only(self, fd1):
        with pytest.raises(ValueError):
            fd1.generator[0, 0] = 0

    @pytest.mark.parametrize("mu", [0.25, 1.0, 1j])
    def test_mu_independence(self, p1, mu):
        probes = [0.3 + 0.1j, -2.0, 1 + 2j]
        assert check_mu_independence(p1, 0.0, mu, probes) < 1e-10

    def test_singular_shift(self, p1):
        # A - mu E singular exactly at the eigenvalue -1
        with pytest.raises(SingularMatrixError):
            shifted_operator(p1, -1.0)

    def test_select_shift_skips_eigenvalue(self, p1):
        assert select_shift(p1, [-1.0, 0.5]) == 0.5

    def test_singular_pencil(self):
        p = Pencil(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
        with pytest.raises(SingularPencilError) as exc:
            decompose(p)
        assert len(exc.value.conditions) > 0

    def test_all_infinite(self):
        p = Pencil(np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(NumericalError):
            decompose(p, 0.0)

    def test_d_hint_below_detected_rejected(self, p1):
        with pytest.raises(InputError):
            decompose(p1, 0.0, d_hint=0)

    def test_d_hint_above_detected(self, p2):
        fd = decompose(p2, 0.0, d_hint=2)
        assert fd.d == 2 and fd.m == 1
        assert fd.warnings
        assert np.abs(finite_eigenvalues(fd) - (-1 + 5j)).min() < 1e-10 or \
            np.abs(finite_eigenvalues(fd) - (-1 - 5j)).min() < 1e-10

    def test_saddle_structure(self, decomps):
        for name, fd in decomps.items():
            if name.startswith("saddle"):
                nv, npr = map(int, name.split("-")[1:3])
                assert fd.d == 2 * npr and fd.index == 2
                assert fd.m == nv - npr


class TestPlantedPencils:
    @given(st.integers(3, 12), st.data(), st.integers(0, 10_000))
    @settings(max_examples=100, deadline=None)
    def test_planted_structure_recovered(self, n, data, seed):
        d = data.draw(st.integers(0, min(4, n - 1)))
        p, lam = random_regular_pencil(n, d, seed)
        fd = decompose(p)
        assert fd.d == d
        assert fd.index == min(d, 2)
        assert fd.reconstruction_residual() < 1e-10
        assert match_distance(finite_eigenvalues(fd), lam) < 1e-8 * max(1, np.abs(lam).max())

    def test_longer_jordan_chain(self):
        p, lam = random_regular_pencil(8, 4, seed=3, jordan=4)
        fd = decompose(p)
        assert (fd.d, fd.index) == (4, 4)


class TestSolutions:
    def test_matches_hand_oracle(self, fd1):
        _, _, B, P = jordan_oracle()
        y0 = np.array([0.3, -1.2])
        x0 = P @ y0
        for t in (0.0, 0.5, 2.0):
            assert np.allclose(solution_at(fd1, x0, t), P @ sla.expm(t * B) @ y0, atol=1e-13)

    def test_solution_satisfies_dae(self, p1, fd1):
        x0 = np.array([1.0, 2.0, -3.0])
        h, t = 1e-6, 0.4
        dx = (solution_at(fd1, x0, t + h) - solution_at(fd1, x0, t - h)) / (2 * h)
        assert np.allclose(p1.E @ dx, p1.A @ solution_at(fd1, x0, t), atol=1e-7)

    def test_inconsistent_initial_state(self, fd1):
        with pytest.raises(InconsistentInitialConditionError) as exc:
            solution_at(fd1, np.array([1.0, 0.0, 0.0]), 1.0)
        proj = exc.value.projected
        assert consistency_residual(fd1, proj) < 1e-14

    def test_negative_time(self, fd1):
        with pytest.raises(InputError):
            solution_at(fd1, np.array([1.0, -1.0, 0.0]), -1.0)
