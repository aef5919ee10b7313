"""Growth bounds, the Kreiss constant and discrete-time dynamics."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import exp_norm_oracle, jordan_oracle
from daepsa import (
    GridSpec, InconsistentInitialConditionError, InputError, decompose, discrete_report,
    exp_norm_curve, extract_contours, kreiss_constant, numerical_abscissa, power_norm_curve,
    pseudospectra_grid, spectral_abscissa, transient_report, upper_bounds,
)
from daepsa.criss_cross import abscissa_grid
from daepsa.transient import (
    discrete_residuals, discrete_solution, discrete_trajectory, eigenvector_condition,
    growth_lower_bound_timed,
)

T_GRID = np.linspace(0, 20, 401)

# frozen from the independent oracles below (scipy expm, grid-search abscissa)
JORDAN_PEAK = 4.2800065479728415
JORDAN_T_PEAK = 0.9848857652116525
JORDAN_KREISS = 2.973353886326572


class TestAbscissae:
    def test_jordan(self, fd1):
        M, _, _, _ = jordan_oracle()
        assert spectral_abscissa(fd1) == pytest.approx(-1.0, abs=1e-12)
        assert numerical_abscissa(fd1) == pytest.approx(np.linalg.eigvalsh((M + M.T) / 2)[-1], abs=1e-12)

    def test_omega_is_initial_slope(self, fd2):
        h = 1e-6
        M = np.asarray(fd2.generator)
        slope = (exp_norm_oracle(M, h) - 1) / h
        assert numerical_abscissa(fd2) == pytest.approx(slope, abs=1e-3)


class TestExpCurve:
    def test_matches_scipy_oracle(self, fd1):
        M, _, _, _ = jordan_oracle()
        c = exp_norm_curve(fd1, T_GRID[:81])
        ref = [exp_norm_oracle(M, t) for t in c.times]
        assert np.allclose(c.norms, ref, rtol=1e-12)

    def test_frozen_peak(self, fd1):
        c = exp_norm_curve(fd1, T_GRID)
        assert c.peak == pytest.approx(JORDAN_PEAK, rel=1e-9)
        assert c.t_peak == pytest.approx(JORDAN_T_PEAK, abs=1e-6)
        M, _, _, _ = jordan_oracle()
        assert exp_norm_oracle(M, c.t_peak) == pytest.approx(c.peak, rel=1e-12)

    def test_worst_initial_state_replays(self, fd1):
        from daepsa import solution_at

        c = exp_norm_curve(fd1, T_GRID)
        x0 = c.x0_worst
        growth = np.linalg.norm(solution_at(fd1, x0, c.t_peak)) / np.linalg.norm(x0)
        assert growth == pytest.approx(c.peak, rel=1e-12)

    def test_bad_time_grid(self, fd1):
        with pytest.raises(InputError):
            exp_norm_curve(fd1, [0.0, 1.0, 0.5])


class TestKreiss:
    def test_jordan(self, fd1):
        K = kreiss_constant(fd1)
        assert K.K == pytest.approx(JORDAN_KREISS, rel=1e-6)
        assert 0.3 < K.eps_star < 0.4

    def test_against_grid_sweep(self, fd1):
        M = np.asarray(fd1.generator)
        sweep = np.linspace(0.33, 0.39, 4)
        ref = max(abscissa_grid(M, e, 201).value / e for e in sweep)
        assert kreiss_constant(fd1).K >= ref - 1e-9
        assert kreiss_constant(fd1).K == pytest.approx(ref, rel=1e-3)

    def test_normal_stable_is_one(self):
        K = kreiss_constant(np.diag([-1.0, -2.0 + 1j]))
        assert K.K == 1.0
        assert K.eps_star == math.inf

    def test_unstable_is_infinite(self):
        K = kreiss_constant(np.diag([0.5, -1.0]))
        assert K.K == math.inf and K.eps_star == pytest.approx(1e-12)

    def test_lower_bound_of_peak(self, fd1, fd2):
        for fd in (fd1, fd2):
            assert exp_norm_curve(fd, T_GRID).peak >= kreiss_constant(fd).K - 1e-6


class TestTimedBound:
    @given(st.floats(0.01, 3), st.floats(1e-3, 1), st.floats(0, 10))
    @settings(max_examples=50, deadline=None)
    def test_limits(self, a, eps, tau):
        v = growth_lower_bound_timed(a, eps, tau)
        assert 0 < v <= math.exp(tau * a) * (1 + 1e-12)
        # tends to a / eps as tau grows
        assert growth_lower_bound_timed(a, eps, 200.0 / a) == pytest.approx(a / eps, rel=1e-6)

    def test_requires_positive_abscissa(self):
        with pytest.raises(InputError):
            growth_lower_bound_timed(-0.1, 0.1, 1.0)


class TestUpperBounds:
    def test_eigenvector_refused_for_jordan(self, fd1):
        assert eigenvector_condition(fd1) == math.inf
        with pytest.warns(RuntimeWarning):
            ub = upper_bounds(fd1, T_GRID)
        assert "eigenvector" in ub.refused

    def test_eigenvector_bound_for_spiral(self, fd2):
        kappa = eigenvector_condition(fd2)
        assert 1 <= kappa < 1e3
        ub = upper_bounds(fd2, T_GRID)
        c = exp_norm_curve(fd2, T_GRID)
        assert (c.norms <= ub.eigenvector * (1 + 1e-10)).all()

    def test_coarse_contours_refused(self, fd1):
        g = GridSpec(-6, 4, -5, 5, 41, 41)
        f = pseudospectra_grid(fd1, g)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            ub = upper_bounds(fd1, T_GRID, [1e-3], extract_contours(f, [1e-3]), f)
        assert 1e-3 in ub.refused

    def test_contour_leaving_window_refused(self, fd1):
        g = GridSpec(-6, -1, -5, 5, 101, 101)
        f = pseudospectra_grid(fd1, g)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            ub = upper_bounds(fd1, T_GRID, [1.0], extract_contours(f, [1.0]), f)
        assert "window" in ub.refused[1.0]

    def test_sandwich(self, fd1):
        eps = np.logspace(-6, 0, 13)
        g = GridSpec(-8, 6, -7, 7, 201, 201)
        f = pseudospectra_grid(fd1, g)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rep = transient_report(fd1, eps, T_GRID, f, extract_contours(f, eps))
        assert rep.sandwich_violations() == []
        assert rep.upper.contour, "at least one contour bound should be accepted"


class TestDiscrete:
    def test_states_satisfy_recurrence(self, p1, fd1):
        X = discrete_trajectory(fd1, np.array([1.0, 2.0, -3.0]), 50)
        assert discrete_residuals(p1, X).max() < 1e-12

    def test_single_step_solution(self, fd1):
        x0 = np.array([1.0, 2.0, -3.0])
        assert np.allclose(discrete_solution(fd1, x0, 7), discrete_trajectory(fd1, x0, 7)[-1])

    def test_inconsistent(self, fd1):
        with pytest.raises(InconsistentInitialConditionError):
            discrete_solution(fd1, np.array([1.0, 0.0, 0.0]), 2)

    def test_power_curve_matches_matrix_power(self, fd2):
        M = np.asarray(fd2.generator)
        curve = power_norm_curve(fd2, 6)
        assert curve[6] == pytest.approx(np.linalg.norm(np.linalg.matrix_power(M, 6), 2), rel=1e-12)

    def test_report(self):
        M = np.diag([0.5, -0.2])
        rep = discrete_report(M, [0.1, 0.01], 10)
        assert rep.spectral_radius == pytest.approx(0.5)
        assert dict(rep.rho_eps)[0.1] == pytest.approx(0.6, abs=1e-10)
        # sup of (0.5 + eps - 1) / eps over the sweep, attained at its right end eps = 100
        assert rep.kreiss_extension == pytest.approx(1 - 0.5 / 100, rel=1e-10)

    def test_recast_fixtures(self, decomps):
        for name, fd in decomps.items():
            rng = np.random.default_rng(0)
            x0 = fd.Q @ rng.standard_normal(fd.m)
            X = discrete_trajectory(fd, x0, 50)
            assert discrete_residuals(fd.pencil, X).max() < 1e-10, name


class TestPencilInvariance:
    def test_report_quantities_independent_of_premultiplier(self, p1, tmats):
        ref = decompose(p1, 0.0)
        for T in tmats:
            fd = decompose(p1.premultiply(T), 0.0)
            assert kreiss_constant(fd).K == pytest.approx(kreiss_constant(ref).K, rel=1e-8)
            assert numerical_abscissa(fd) == pytest.approx(numerical_abscissa(ref), rel=1e-10)
