"""Pseudospectral abscissa and radius: criss-cross versus grid search."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import sigmin_oracle
from daepsa.criss_cross import (
    abscissa_grid, pseudospectral_abscissa, pseudospectral_radius, radius_grid,
)
from daepsa.errors import InputError


def random_matrix(n, seed, shift=-1.0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + shift * np.eye(n)


class TestAbscissa:
    @pytest.mark.parametrize("eps", [1.0, 0.1, 0.01])
    def test_matches_grid_oracle(self, fd1, fd2, eps):
        for fd in (fd1, fd2):
            M = np.asarray(fd.generator)
            cc = pseudospectral_abscissa(M, eps)
            ref = abscissa_grid(M, eps, 201)
            assert cc.value >= ref.value - 1e-10
            assert cc.value == pytest.approx(ref.value, abs=2e-3)

    @pytest.mark.parametrize("eps", [1.0, 0.1])
    def test_point_is_on_the_boundary(self, fd1, eps):
        M = np.asarray(fd1.generator)
        r = pseudospectral_abscissa(M, eps)
        assert sigmin_oracle(M, r.z) == pytest.approx(eps, rel=1e-6)
        assert r.z.real == pytest.approx(r.value)
        assert not r.flagged

    @given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                    min_size=1, max_size=6), st.floats(1e-3, 2.0))
    @settings(max_examples=40, deadline=None)
    def test_normal_matrix(self, lam, eps):
        lam = np.array(lam)
        M = np.diag(lam)
        assert pseudospectral_abscissa(M, eps).value == pytest.approx(lam.real.max() + eps, abs=1e-8)

    @given(st.integers(2, 8), st.integers(0, 10_000))
    @settings(max_examples=10, deadline=None)
    def test_random_against_grid(self, n, seed):
        M = random_matrix(n, seed)
        eps = 0.3
        cc = pseudospectral_abscissa(M, eps).value
        ref = abscissa_grid(M, eps, 101).value
        # the grid misses the extremum by at most one cell
        assert cc >= ref - 1e-9
        assert sigmin_oracle(M, pseudospectral_abscissa(M, eps).z) == pytest.approx(eps, rel=1e-5)

    def test_monotone_in_eps(self, fd1):
        M = np.asarray(fd1.generator)
        vals = [pseudospectral_abscissa(M, e).value for e in np.logspace(-4, 1, 11)]
        assert np.all(np.diff(vals) > 0)

    def test_invalid_eps(self):
        with pytest.raises(InputError):
            pseudospectral_abscissa(np.eye(2), 0.0)


class TestRadius:
    def test_normal_examples(self):
        assert pseudospectral_radius(np.diag([0.5, -0.2]), 0.1).value == pytest.approx(0.6, abs=1e-10)
        assert pseudospectral_radius(np.zeros((1, 1)), 0.1).value == pytest.approx(0.1, abs=1e-10)

    @given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                    min_size=1, max_size=5), st.floats(1e-3, 1.0))
    @settings(max_examples=40, deadline=None)
    def test_normal_matrix(self, lam, eps):
        lam = np.array(lam)
        rho = np.abs(lam).max()
        assert pseudospectral_radius(np.diag(lam), eps).value == pytest.approx(rho + eps, abs=1e-8)

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_grid_oracle(self, seed):
        M = random_matrix(4, seed, shift=0.0) / 3
        eps = 0.2
        cc = pseudospectral_radius(M, eps)
        ref = radius_grid(M, eps, 301)
        assert cc.value >= ref.value - 1e-9
        assert cc.value == pytest.approx(ref.value, rel=1e-2)
        assert sigmin_oracle(M, cc.z) == pytest.approx(eps, rel=1e-5)
