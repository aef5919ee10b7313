"""Transient growth of DAE solutions: abscissae, Kreiss constant and bounds.

All quantities refer to the generator ``M = G^{-1} + mu I`` of a
:class:`~daepsa.pencil.FiniteDecomposition`.  Because ``Q`` has orthonormal
columns, ``||x(t)|| / ||x(0)|| <= ||e^{tM}||`` with equality for the worst
consistent initial state.  Every public function also accepts a plain
square matrix in place of the decomposition.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from . import linalg as la
from .contours import ContourSet
from .criss_cross import ExtremalPoint, pseudospectral_abscissa as _abscissa
from .criss_cross import pseudospectral_radius as _radius
from .errors import InputError, NumericalError
from .pencil import FiniteDecomposition, Pencil, finite_eigenvalues, require_consistent

logger = logging.getLogger(__name__)

KREISS_EPS = np.logspace(-12, 2, 57)
KAPPA_MAX = 1e12

#: closed contours with fewer vertices are too coarse to trust their length
MIN_CONTOUR_VERTICES = 32


def _parts(obj):
    """``(M, Q, eigenvalues, m)`` for a decomposition or a square matrix."""
    if isinstance(obj, FiniteDecomposition):
        return np.asarray(obj.generator), np.asarray(obj.Q), finite_eigenvalues(obj), obj.m
    M = la.as_matrix(obj, "M", square=True)
    return M, np.eye(M.shape[0]), np.linalg.eigvals(M), M.shape[0]


def generator_of(obj) -> np.ndarray:
    return _parts(obj)[0]


# ----------------------------------------------------------------------------
# abscissae
# ----------------------------------------------------------------------------

def spectral_abscissa(obj) -> float:
    return float(_parts(obj)[2].real.max())


def numerical_abscissa(obj) -> float:
    """``omega = lambda_max((M + M*) / 2)``: initial growth rate of ``||e^{tM}||``."""
    M = generator_of(obj)
    return float(np.linalg.eigvalsh((M + M.conj().T) / 2)[-1])


def pseudospectral_abscissa(obj, epsilon: float) -> ExtremalPoint:
    """Rightmost real part of the ``epsilon``-pseudospectrum."""
    return _abscissa(generator_of(obj), epsilon)


def pseudospectral_radius(obj, epsilon: float) -> ExtremalPoint:
    """Largest modulus in the ``epsilon``-pseudospectrum."""
    return _radius(generator_of(obj), epsilon)


# ----------------------------------------------------------------------------
# Kreiss constant
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class KreissResult:
    """``K = sup_eps alpha_eps / eps`` and where it is attained.

    ``eps_star`` is ``inf`` when the supremum is the large-``eps`` limit 1,
    and the smallest sampled ``eps`` when the pencil is not stable (``K``
    is then ``inf``).  ``samples`` holds the ``(eps, ratio)`` sweep.
    """

    K: float
    eps_star: float
    samples: tuple = ()


def _golden(f, a, b, tol=1e-6, maxit=200):
    """Maximise a unimodal ``f`` on ``[a, b]``."""
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxit):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def kreiss_constant(obj, eps_grid=None) -> KreissResult:
    """Kreiss constant with respect to the left half-plane.

    ``alpha_eps / eps`` is sampled on a logarithmic sweep (extended to the
    right while it keeps increasing) and the best bracket is refined by
    golden-section search in ``log eps``.  As ``eps -> inf`` the ratio
    tends to 1, so ``K >= 1`` always.
    """
    M = generator_of(obj)
    if spectral_abscissa(obj) >= 0:
        e0 = float(KREISS_EPS[0] if eps_grid is None else np.min(eps_grid))
        return KreissResult(math.inf, e0, ())
    eps = list(KREISS_EPS if eps_grid is None else np.sort(np.asarray(eps_grid, dtype=float)))
    ratio = lambda e: _abscissa(M, e).value / e
    vals = [ratio(e) for e in eps]
    while np.argmax(vals) == len(vals) - 1 and eps[-1] < 1e8:
        eps.append(eps[-1] * 10)
        vals.append(ratio(eps[-1]))
    k = int(np.argmax(vals))
    best_e, best_v = eps[k], vals[k]
    if 0 < k < len(eps) - 1:
        le, lv = _golden(lambda s: ratio(math.exp(s)), math.log(eps[k - 1]), math.log(eps[k + 1]))
        if lv > best_v:
            best_e, best_v = math.exp(le), lv
    samples = tuple(zip(map(float, eps), map(float, vals)))
    if best_v <= 1.0:
        return KreissResult(1.0, math.inf, samples)
    return KreissResult(float(best_v), float(best_e), samples)


def growth_lower_bound(alpha_eps: float, epsilon: float) -> float:
    """``alpha_eps / eps``: ``sup_t ||e^{tM}||`` is at least this."""
    return alpha_eps / epsilon


def growth_lower_bound_timed(alpha_eps: float, epsilon: float, tau) -> np.ndarray | float:
    """Growth guaranteed within ``[0, tau]`` for ``alpha_eps > 0``.

    ``e^{tau a} / (1 + eps (e^{tau a} - 1) / a)`` with ``a = alpha_eps``.
    """
    a, eps = float(alpha_eps), float(epsilon)
    if not a > 0:
        raise InputError(f"the timed bound needs a positive pseudospectral abscissa, got {a}")
    tau = np.asarray(tau, dtype=float)
    if (tau < 0).any():
        raise InputError("tau must be nonnegative")
    ex = np.exp(tau * a)
    out = ex / (1 + eps * np.expm1(tau * a) / a)
    return float(out) if out.ndim == 0 else out


# ----------------------------------------------------------------------------
# exponential curve
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExpCurve:
    """``||e^{tM}||`` on a time grid plus the refined peak.

    ``x0_worst`` is a unit consistent initial state attaining the peak.
    """

    times: np.ndarray
    norms: np.ndarray
    t_peak: float
    peak: float
    x0_worst: np.ndarray

    def window_max(self, tau: float) -> float:
        sel = self.times <= tau
        return float(self.norms[sel].max()) if sel.any() else 1.0


def _norm_exp(M, t):
    return float(np.linalg.norm(la.expm(t * M), 2))


def exp_norm_curve(obj, t_grid, refine: bool = True) -> ExpCurve:
    """Norms of ``e^{tM}`` and the worst-case initial condition at the peak."""
    M, Q, _, _ = _parts(obj)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or (t < 0).any() or (np.diff(t) <= 0).any():
        raise InputError("t_grid must be nonnegative and strictly increasing")
    norms = np.array([_norm_exp(M, s) for s in t])
    k = int(np.argmax(norms))
    t_peak, peak = float(t[k]), float(norms[k])
    if refine and t.size > 2:
        lo, hi = t[max(k - 1, 0)], t[min(k + 1, t.size - 1)]
        if hi > lo:
            r = minimize_scalar(lambda s: -_norm_exp(M, s), bounds=(lo, hi), method="bounded",
                                options={"xatol": 1e-10})
            if -r.fun > peak:
                t_peak, peak = float(r.x), float(-r.fun)
    _, _, Vh = np.linalg.svd(la.expm(t_peak * M))
    x0 = Q @ Vh[0].conj()
    return ExpCurve(t, norms, t_peak, peak, x0)


# ----------------------------------------------------------------------------
# upper bounds
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UpperBounds:
    """Upper bounds on ``||e^{tM}||`` evaluated on ``times``.

    ``contour`` maps each accepted ``eps`` to its curve; ``refused`` maps
    rejected ``eps`` values (and ``"eigenvector"``) to the reason.
    """

    times: np.ndarray
    coppell: np.ndarray
    eigenvector: np.ndarray
    kappa: float
    contour: dict
    contour_lengths: dict
    kreiss: float
    refused: dict = field(default_factory=dict)

    def minimum(self) -> np.ndarray:
        """Pointwise smallest of all finite bounds."""
        curves = [self.coppell, self.eigenvector, np.full(self.times.shape, self.kreiss)]
        curves += list(self.contour.values())
        return np.min(np.vstack(curves), axis=0)


def eigenvector_condition(obj) -> float:
    """``kappa(V)`` for the unit-column eigenvector matrix; ``inf`` if defective."""
    M, _, lam, _ = _parts(obj)
    raw = np.diag(M) if la.is_upper_triangular(M) else np.linalg.eigvals(M)
    # cluster averaging in finite_eigenvalues merges numerically defective
    # eigenvalues; such a matrix has no usable eigenvector basis
    if np.unique(np.round(lam, 15)).size < np.unique(np.round(raw, 15)).size:
        return math.inf
    _, V = np.linalg.eig(M)
    V = V / np.linalg.norm(V, axis=0)
    s = np.linalg.svd(V, compute_uv=False)
    return math.inf if s[-1] == 0 else float(s[0] / s[-1])


def contour_check(level, field, eigenvalues) -> str | None:
    """Reason the contours of ``level`` cannot be used, or None if they can.

    The contours must be closed, lie inside the window, be resolved by at
    least ``MIN_CONTOUR_VERTICES`` vertices each, and enclose every grid
    point of the sublevel set and every eigenvalue.
    """
    if not level.polylines:
        return "no contour at this level on the grid"
    if not level.all_closed:
        return "contour leaves the grid window"
    if min(len(p) for p in level.polylines) - 1 < MIN_CONTOUR_VERTICES:
        return "contour not resolved by the grid"
    g = field.grid
    inside = field.sublevel(level.epsilon)
    if not level.contains(g.points[inside]).all():
        return "sublevel grid points outside the contours"
    if not level.contains(np.asarray(eigenvalues)).all():
        return "an eigenvalue is not enclosed (level not resolved by the grid)"
    return None


def upper_bounds(obj, t_grid, epsilons=(), contours: ContourSet | None = None,
                 field=None, kreiss: KreissResult | None = None) -> UpperBounds:
    """Coppell, eigenvector, contour-integral and Kreiss upper bounds."""
    M, _, lam, m = _parts(obj)
    t = np.asarray(t_grid, dtype=float)
    omega = numerical_abscissa(M)
    alpha = float(lam.real.max())
    refused = {}
    coppell = np.exp(t * omega)
    kappa = eigenvector_condition(obj)
    if kappa > KAPPA_MAX:
        refused["eigenvector"] = f"eigenvector matrix ill conditioned or defective (kappa={kappa:.3e})"
        warnings.warn(refused["eigenvector"], RuntimeWarning, stacklevel=2)
        eig = np.full(t.shape, np.inf)
    else:
        eig = kappa * np.exp(t * alpha)
    curves, lengths = {}, {}
    for e in epsilons:
        e = float(e)
        if contours is None or field is None:
            refused[e] = "no contours supplied"
            continue
        try:
            level = contours.level(e)
        except KeyError:
            refused[e] = "level not extracted"
            continue
        why = contour_check(level, field, lam)
        if why is not None:
            refused[e] = why
            continue
        a = _abscissa(M, e).value
        lengths[e] = level.length
        curves[e] = level.length * np.exp(t * a) / (2 * np.pi * e)
    K = kreiss_constant(M) if kreiss is None else kreiss
    return UpperBounds(t, coppell, eig, kappa, curves, lengths, math.e * m * K.K, refused)


# ----------------------------------------------------------------------------
# report
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TransientReport:
    omega: float
    alpha: float
    alpha_eps: tuple
    kreiss: KreissResult
    curve: ExpCurve
    lower_bounds: dict
    timed_bounds: dict
    upper: UpperBounds

    def sandwich_violations(self, tol: float = 1e-6) -> list:
        """Human-readable list of failed ``lower <= peak <= upper`` checks."""
        bad = []
        peak = self.curve.peak
        for e, lb in self.lower_bounds.items():
            if lb - tol > peak:
                bad.append(f"alpha_eps/eps = {lb} exceeds peak {peak} at eps={e}")
        i = int(np.argmin(np.abs(self.upper.times - self.curve.t_peak)))
        ub = self.upper.minimum()
        if (self.curve.norms > ub + tol * np.maximum(1, ub)).any():
            bad.append("expm curve exceeds an upper bound on the grid")
        if peak > math.exp(self.curve.t_peak * self.omega) * (1 + tol):
            bad.append("peak exceeds the Coppell bound at the peak time")
        if peak > self.upper.kreiss * (1 + tol):
            bad.append("peak exceeds the Kreiss upper bound")
        for e, c in self.upper.contour.items():
            if self.curve.norms[i] > c[i] * (1 + tol):
                bad.append(f"contour bound violated at eps={e}")
        for e, (taus, vals) in self.timed_bounds.items():
            for tau, v in zip(taus, vals):
                if v > self.curve.window_max(tau) + tol:
                    bad.append(f"timed bound exceeds windowed max at eps={e}, tau={tau}")
        return bad


def transient_report(obj, epsilons, t_grid, field=None, contours=None) -> TransientReport:
    """Assemble every continuous-time diagnostic for one generator."""
    M = generator_of(obj)
    eps = [float(e) for e in epsilons]
    curve = exp_norm_curve(obj, t_grid)
    K = kreiss_constant(M)
    ae = tuple((e, _abscissa(M, e).value) for e in eps)
    lower = {e: a / e for e, a in ae}
    taus = np.asarray(t_grid, dtype=float)
    timed = {e: (taus, growth_lower_bound_timed(a, e, taus)) for e, a in ae if a > 0}
    upper = upper_bounds(obj, t_grid, eps, contours, field, K)
    return TransientReport(numerical_abscissa(M), spectral_abscissa(obj), ae, K, curve,
                           lower, timed, upper)


# ----------------------------------------------------------------------------
# discrete time
# ----------------------------------------------------------------------------

def discrete_solution(fd: FiniteDecomposition, x0, k: int) -> np.ndarray:
    """``x_k = Q M^k Q* x_0`` for ``E x_{k+1} = A x_k``."""
    if int(k) < 0:
        raise InputError("k must be nonnegative")
    x0 = require_consistent(fd, x0)
    y = fd.Q.conj().T @ x0
    M = np.asarray(fd.generator)
    for _ in range(int(k)):
        y = M @ y
    return fd.Q @ y


def discrete_trajectory(fd: FiniteDecomposition, x0, k_max: int) -> np.ndarray:
    """States ``x_0, ..., x_{k_max}`` as the rows of an array."""
    x0 = require_consistent(fd, x0)
    M = np.asarray(fd.generator)
    y = fd.Q.conj().T @ x0
    out = [fd.Q @ y]
    for _ in range(int(k_max)):
        y = M @ y
        out.append(fd.Q @ y)
    return np.array(out)


def discrete_residuals(p: Pencil, states) -> np.ndarray:
    """``||E x_{k+1} - A x_k|| / ((||A|| + ||E||) ||x_k||)`` per step."""
    X = np.asarray(states)
    scale = np.linalg.norm(p.A, 2) + np.linalg.norm(p.E, 2)
    res = np.linalg.norm(X[1:] @ p.E.T - X[:-1] @ p.A.T, axis=1)
    den = scale * np.maximum(np.linalg.norm(X[:-1], axis=1), np.finfo(float).tiny)
    return res / den


@dataclass(frozen=True, eq=False)
class DiscreteReport:
    """Power norms ``||M^k||``, pseudospectral radii, and the disk analogue
    of the Kreiss constant ``sup (rho_eps - 1) / eps`` (an extension, not a
    proven bound in the DAE setting)."""

    power_curve: np.ndarray
    rho_eps: tuple
    spectral_radius: float
    kreiss_extension: float


def power_norm_curve(obj, k_max: int) -> np.ndarray:
    M = generator_of(obj)
    out = np.empty(int(k_max) + 1)
    P = np.eye(M.shape[0], dtype=complex)
    for k in range(int(k_max) + 1):
        out[k] = np.linalg.norm(P, 2)
        P = P @ M
    return out


def discrete_report(obj, epsilons, k_max: int = 50) -> DiscreteReport:
    M, _, lam, _ = _parts(obj)
    rho = tuple((float(e), _radius(M, e).value) for e in epsilons)
    sweep = np.logspace(-8, 2, 41)
    ext = max([(_radius(M, e).value - 1) / e for e in sweep])
    return DiscreteReport(power_norm_curve(M, k_max), rho, float(np.abs(lam).max()), float(ext))
