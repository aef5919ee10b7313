"""Pseudospectra in norms induced by a Gram matrix."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from daepsa import (
    GridSpec, InnerProductNorm, InputError, NotPositiveDefiniteError, decompose, field_discrepancy,
    h_matrix_norm, h_pseudospectra_schur, h_pseudospectra_transform, h_vector_norm, matrix_field,
    pseudospectra_grid,
)
from daepsa.pencil import match_distance


def gram_matrices(n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n))
    return {
        "identity": np.eye(n),
        "ramp": np.diag(np.linspace(1.0, 10.0, n)),
        "random": X @ X.T + n * np.eye(n),
    }


def window(fd, ipn):
    lam = np.linalg.eigvals(h_pseudospectra_schur(fd, ipn).matrix)
    return GridSpec.around(lam, 1.5, 31)


class TestNorms:
    def test_vector_norm(self):
        H = np.diag([4.0, 9.0])
        ipn = InnerProductNorm.from_gram(H)
        assert h_vector_norm(np.array([1.0, 1.0]), ipn) == pytest.approx(np.sqrt(13))

    @given(st.integers(1, 6), st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_matrix_norm_is_operator_norm(self, n, seed):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, n))
        ipn = InnerProductNorm.from_gram(X @ X.T + np.eye(n))
        M = rng.standard_normal((n, n))
        nrm = h_matrix_norm(M, ipn)
        # ratio ||Mx||_H / ||x||_H never exceeds the norm
        for _ in range(10):
            x = rng.standard_normal(n)
            assert h_vector_norm(M @ x, ipn) <= nrm * h_vector_norm(x, ipn) * (1 + 1e-10)

    def test_factor_residual(self):
        ipn = InnerProductNorm.from_gram(gram_matrices(5)["random"])
        assert ipn.factor_residual() < 1e-14

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefiniteError):
            InnerProductNorm.from_gram(np.diag([1.0, -1.0]))

    def test_dimension_mismatch(self, p1):
        with pytest.raises(InputError):
            h_pseudospectra_transform(p1, InnerProductNorm.identity(2))


class TestEquivalence:
    @pytest.mark.parametrize("kind", ["identity", "ramp", "random"])
    def test_two_routes_agree(self, decomps, kind):
        for name, fd in decomps.items():
            ipn = InnerProductNorm.from_gram(gram_matrices(fd.n)[kind])
            g = window(fd, ipn)
            f2 = matrix_field(h_pseudospectra_schur(fd, ipn).matrix, g)
            fd1 = decompose(h_pseudospectra_transform(fd.pencil, ipn), fd.mu)
            f1 = pseudospectra_grid(fd1, g)
            assert field_discrepancy(f1, f2) < 1e-8, name

    def test_identity_reproduces_2_norm(self, fd1):
        ipn = InnerProductNorm.identity(3)
        g = GridSpec(-3, 1, -2, 2, 31, 31)
        f = matrix_field(h_pseudospectra_schur(fd1, ipn).matrix, g)
        assert field_discrepancy(f, pseudospectra_grid(fd1, g)) < 1e-12

    def test_weighting_changes_the_field(self, fd1):
        ipn = InnerProductNorm.from_gram(np.diag([1.0, 100.0, 1.0]))
        g = GridSpec(-3, 1, -2, 2, 31, 31)
        f = matrix_field(h_pseudospectra_schur(fd1, ipn).matrix, g)
        assert field_discrepancy(f, pseudospectra_grid(fd1, g)) > 1e-2

    def test_same_eigenvalues(self, fd2):
        ipn = InnerProductNorm.from_gram(gram_matrices(3, 4)["random"])
        lam = np.linalg.eigvals(h_pseudospectra_schur(fd2, ipn).matrix)
        assert match_distance(lam, [-1 - 5j, -1 + 5j]) < 1e-10
