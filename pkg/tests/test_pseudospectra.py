"""Resolvent fields, legacy definitions and the numerical range."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import jordan_oracle, sigmin_oracle
from daepsa import (
    GridSpec, InputError, Pencil, check_inclusion, decompose, field_discrepancy, legacy_grid,
    matrix_field, numerical_range, pseudospectra_grid, resolvent_norm,
)
from daepsa.pseudospectra import sentinel_threshold

GRID = GridSpec(-3, 1, -2, 2, 41, 41)


class TestGridSpec:
    def test_parse_round_trip(self):
        g = GridSpec.parse("-3,1,-2,2,41,31")
        assert GridSpec.parse(g.as_text()) == g
        assert g.points.shape == (41, 31)
        assert g.points[2, 3] == g.xs[2] + 1j * g.ys[3]

    @pytest.mark.parametrize("text", ["1,0,0,1,3,3", "0,1,0,1,1,3", "0,1,0,1", "a,1,0,1,3,3"])
    def test_invalid(self, text):
        with pytest.raises(InputError):
            GridSpec.parse(text)

    def test_nested_lattices(self):
        coarse, fine = GridSpec(-1, 1, -1, 1, 11, 11), GridSpec(-1, 1, -1, 1, 21, 21)
        assert np.array_equal(fine.points[::2, ::2], coarse.points)


class TestFields:
    def test_matches_brute_force(self, fd1):
        M, _, _, _ = jordan_oracle()
        f = pseudospectra_grid(fd1, GRID)
        for i, j in [(0, 0), (7, 33), (40, 20), (25, 5)]:
            z = GRID.points[i, j]
            assert f.sigmin[i, j] == pytest.approx(sigmin_oracle(M, z), rel=1e-12)

    def test_eigenvalue_sentinel(self, fd1):
        f = pseudospectra_grid(fd1, GRID)
        i = np.argmin(np.abs(GRID.xs + 1))
        j = np.argmin(np.abs(GRID.ys))
        assert f.sigmin[i, j] == 0.0
        assert resolvent_norm(fd1, -1.0) == np.inf

    def test_resolvent_norm_agrees(self, fd2):
        z = 0.3 + 1.1j
        M = np.asarray(fd2.generator)
        assert resolvent_norm(fd2, z) == pytest.approx(1 / sigmin_oracle(M, z), rel=1e-12)

    def test_sentinel_threshold_scales(self):
        assert sentinel_threshold(4, 2.0) == pytest.approx(80 * np.finfo(float).eps)

    @pytest.mark.parametrize("mu", [0.25, 1.0, 1j])
    def test_mu_invariance(self, p1, fd1, mu):
        ref = pseudospectra_grid(fd1, GRID)
        assert field_discrepancy(ref, pseudospectra_grid(decompose(p1, mu), GRID)) < 1e-10

    def test_premultiplication_invariance(self, p1, fd1, tmats):
        ref = pseudospectra_grid(fd1, GRID)
        for T in tmats:
            assert field_discrepancy(ref, pseudospectra_grid(decompose(p1.premultiply(T), 0.0), GRID)) < 1e-10

    def test_gen1_depends_on_premultiplier(self, p1, tmats):
        a = legacy_grid(p1, GRID, "gen1")
        b = legacy_grid(p1.premultiply(tmats[1]), GRID, "gen1")
        assert field_discrepancy(a, b) > 0.5

    def test_threads_do_not_change_result(self, fd2, monkeypatch):
        serial = pseudospectra_grid(fd2, GRID)
        monkeypatch.setenv("PSPEC_THREADS", "4")
        parallel = pseudospectra_grid(fd2, GRID)
        assert np.array_equal(serial.sigmin, parallel.sigmin)

    def test_large_generator_path(self):
        rng = np.random.default_rng(0)
        n = 70
        M = np.triu(rng.standard_normal((n, n))) / n - np.diag(rng.uniform(1, 2, n))
        g = GridSpec(-0.5, 0.5, -0.5, 0.5, 3, 3)
        f = matrix_field(M, g)
        ref = [sigmin_oracle(M, z) for z in g.points.ravel()]
        assert np.allclose(f.sigmin.ravel(), ref, rtol=1e-8)


class TestRuhe:
    @pytest.mark.parametrize("seed", range(3))
    def test_equals_dae_for_invertible_E(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((5, 5))
        E = rng.standard_normal((5, 5)) + 3 * np.eye(5)
        p = Pencil(A, E)
        g = GridSpec.around(np.linalg.eigvals(np.linalg.solve(E, A)), 1.0, 21)
        assert field_discrepancy(pseudospectra_grid(decompose(p), g), legacy_grid(p, g, "ruhe")) < 1e-8

    def test_singular_E(self, p1):
        with pytest.raises(InputError):
            legacy_grid(p1, GRID, "ruhe")

    def test_unknown_kind(self, p1):
        with pytest.raises(InputError):
            legacy_grid(p1, GRID, "other")


class TestNumericalRange:
    def test_omega_and_boundary(self, fd1):
        M, _, _, _ = jordan_oracle()
        nr = numerical_range(fd1)
        omega = np.linalg.eigvalsh((M + M.T) / 2)[-1]
        assert nr.omega == pytest.approx(omega, abs=1e-12)
        assert nr.points.real.max() == pytest.approx(omega, abs=1e-8)
        assert nr.is_convex()

    @given(st.integers(2, 6), st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_boundary_points_are_rayleigh_quotients(self, n, seed):
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        nr = numerical_range(M, 64)
        # every random Rayleigh quotient lies inside the supporting half-planes
        X = rng.standard_normal((n, 50)) + 1j * rng.standard_normal((n, 50))
        X /= np.linalg.norm(X, axis=0)
        q = np.einsum("ij,ik,kj->j", X.conj(), M, X)
        assert (nr.excess(q) <= 1e-10 * max(1, np.abs(M).max())).all()
        # the eigenvalues lie in the range too
        assert (nr.excess(np.linalg.eigvals(M)) <= 1e-9 * max(1, np.abs(M).max())).all()

    def test_normal_matrix_range_is_hull(self):
        nr = numerical_range(np.diag([1.0, -1.0, 2j]), 512)
        assert nr.omega == pytest.approx(1.0)
        assert nr.excess(np.array([0.0])) < 0
        assert nr.excess(np.array([1.5])) == pytest.approx(0.5, abs=1e-3)

    def test_too_few_angles(self):
        with pytest.raises(InputError):
            numerical_range(np.eye(2), 4)

    @pytest.mark.parametrize("eps", [1.0, 0.1, 0.01])
    def test_inclusion(self, fd1, fd2, eps):
        for fd in (fd1, fd2):
            g = GridSpec.around(numerical_range(fd).points, 1.2, 61)
            assert check_inclusion(fd, pseudospectra_grid(fd, g), eps) == 0
