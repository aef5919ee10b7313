"""Pseudospectral abscissa and radius of a square matrix.

The abscissa uses the criss-cross iteration:
vertical lines are cut against the pseudospectrum boundary through the
imaginary eigenvalues of a Hamiltonian-structured matrix, and horizontal
searches at the midpoints of the cut intervals push the estimate right.  The
radius uses the analogous circular/radial iteration.
Either falls back to a grid scan with bisection if the iteration misbehaves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import linalg as la
from .errors import InputError

logger = logging.getLogger(__name__)

TOL_CC = 1e-8
MAX_ITER = 100


@dataclass(frozen=True)
class ExtremalPoint:
    """Result of an abscissa/radius search.

    ``value`` is the abscissa (or radius), attained near ``z``.  ``method``
    is ``"criss-cross"`` or ``"grid"``; ``flagged`` marks a fallback run.
    """

    value: float
    z: complex
    epsilon: float
    method: str
    iterations: int
    flagged: bool = False


def _sigmin(M: np.ndarray, z: complex) -> float:
    return float(np.linalg.svd(z * np.eye(M.shape[0]) - M, compute_uv=False)[-1])


def _check(M, epsilon):
    M = la.as_matrix(M, "M", square=True)
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    return M, epsilon


# ----------------------------------------------------------------------------
# abscissa
# ----------------------------------------------------------------------------

def _vertical_cuts(M: np.ndarray, x: float, eps: float, scale: float) -> np.ndarray:
    """Ordinates ``y`` where ``eps`` is a singular value of ``(x + iy)I - M``."""
    m = M.shape[0]
    I = np.eye(m)
    Ax = x * I - M
    H = np.block([[Ax, -eps * I], [eps * I, -Ax.conj().T]])
    lam = np.linalg.eigvals(H)
    tol = 1e-8 * scale
    ys = -lam[np.abs(lam.real) <= tol].imag
    return np.sort(ys)


def _horizontal_max(M: np.ndarray, y: float, eps: float, scale: float):
    """Largest ``x`` with ``sigma_min((x + iy)I - M) == eps``, or None."""
    m = M.shape[0]
    I = np.eye(m)
    B = M - 1j * y * I
    H = np.block([[B, eps * I], [eps * I, B.conj().T]])
    lam = np.linalg.eigvals(H)
    xs = lam[np.abs(lam.imag) <= 1e-8 * scale].real
    for x in np.sort(xs)[::-1]:
        if abs(_sigmin(M, x + 1j * y) - eps) <= 1e-6 * max(eps, 1e-3 * scale):
            return float(x)
    return None


def _intervals(M, x, ys, eps):
    """Midpoints of cut intervals lying inside the pseudospectrum."""
    mids = []
    for a, b in zip(ys[:-1], ys[1:]):
        if b - a <= 0:
            continue
        c = 0.5 * (a + b)
        if _sigmin(M, x + 1j * c) < eps:
            mids.append(c)
    return mids


def _abscissa_cc(M: np.ndarray, eps: float):
    lam = np.linalg.eigvals(M)
    scale = max(1.0, float(np.linalg.norm(M)), eps)
    alpha = lam.real.max()
    starts = lam[lam.real >= alpha - 1e-8 * scale]
    best_x, best_y = -np.inf, 0.0
    for s in starts:
        x = _horizontal_max(M, s.imag, eps, scale)
        if x is not None and x > best_x:
            best_x, best_y = x, s.imag
    if not np.isfinite(best_x) or best_x < alpha - 1e-10 * scale:
        return None
    for it in range(1, MAX_ITER + 1):
        ys = _vertical_cuts(M, best_x, eps, scale)
        mids = _intervals(M, best_x, ys, eps)
        new_x, new_y = best_x, best_y
        for c in mids:
            x = _horizontal_max(M, c, eps, scale)
            if x is not None and x > new_x:
                new_x, new_y = x, c
        if new_x - best_x <= TOL_CC * max(1.0, abs(best_x)):
            best_x, best_y = max(new_x, best_x), new_y if new_x > best_x else best_y
            return best_x, best_y, it
        best_x, best_y = new_x, new_y
    return None


def _bisect(f, lo, hi, tol):
    """Root of a function with ``f(lo) < 0 <= f(hi)``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def abscissa_grid(M, epsilon: float, n: int = 201) -> ExtremalPoint:
    """Grid scan plus bisection; slow but independent of the iteration.

    Each of ``n`` horizontal lines through the bounding box of the
    numerical range (grown by ``epsilon``) is scanned on ``n`` points from
    the right, and the first inside point is bisected against its right
    neighbour.  The result is accurate to roughly one grid row in ``y``.
    """
    M, eps = _check(M, epsilon)
    Mh = (M + M.conj().T) / 2
    Ms = (M - M.conj().T) / 2j
    hx = np.linalg.eigvalsh(Mh)
    hy = np.linalg.eigvalsh(Ms)
    lam = np.linalg.eigvals(M)
    x_hi = hx[-1] + eps * 1.001 + 1e-12
    x_lo = lam.real.min() - eps
    ys = np.linspace(hy[0] - eps, hy[-1] + eps, n)
    # include the ordinates of the eigenvalues so the set is never missed
    ys = np.unique(np.concatenate([ys, lam.imag]))
    xs = np.linspace(x_lo, x_hi, n)
    tol = 1e-12 * max(1.0, abs(x_hi))
    best = (-np.inf, 0.0)
    for y in ys:
        f = lambda x, y=y: _sigmin(M, x + 1j * y) - eps
        for k in range(n - 1, -1, -1):
            if f(xs[k]) < 0:
                x = xs[k] if k == n - 1 else _bisect(f, xs[k], xs[k + 1], tol)
                if x > best[0]:
                    best = (x, y)
                break
    return ExtremalPoint(float(best[0]), complex(best[0], best[1]), eps, "grid", len(ys), True)


def pseudospectral_abscissa(M, epsilon: float) -> ExtremalPoint:
    """``alpha_eps(M) = max{Re z : sigma_min(zI - M) <= eps}``."""
    M, eps = _check(M, epsilon)
    res = _abscissa_cc(M, eps)
    if res is None:
        logger.warning("criss-cross failed for eps=%g; falling back to grid search", eps)
        return abscissa_grid(M, eps)
    x, y, it = res
    return ExtremalPoint(float(x), complex(x, y), eps, "criss-cross", it)


# ----------------------------------------------------------------------------
# radius
# ----------------------------------------------------------------------------

def _circle_cuts(M: np.ndarray, r: float, eps: float) -> np.ndarray:
    """Angles where ``eps`` is a singular value of ``r e^{i theta} I - M``."""
    m = M.shape[0]
    I = np.eye(m)
    Z = np.zeros((m, m))
    L = np.block([[M, eps * I], [Z, r * I]])
    R = np.block([[r * I, Z], [eps * I, M.conj().T]])
    lam = sla.eigvals(L, R)
    lam = lam[np.isfinite(lam)]
    keep = np.abs(np.abs(lam) - 1) <= 1e-8
    return np.sort(np.mod(np.angle(lam[keep]), 2 * np.pi))


def _radial_max(M: np.ndarray, theta: float, eps: float, scale: float):
    """Largest ``r >= 0`` with ``sigma_min(r e^{i theta} I - M) == eps``."""
    m = M.shape[0]
    I = np.eye(m)
    e = np.exp(1j * theta)
    H = np.block([[M / e, eps / e * I], [eps * e * I, e * M.conj().T]])
    lam = np.linalg.eigvals(H)
    rs = lam[(np.abs(lam.imag) <= 1e-8 * scale) & (lam.real >= -1e-12 * scale)].real
    for r in np.sort(rs)[::-1]:
        r = max(r, 0.0)
        if abs(_sigmin(M, r * e) - eps) <= 1e-6 * max(eps, 1e-3 * scale):
            return float(r)
    return None


def _radius_cc(M: np.ndarray, eps: float):
    lam = np.linalg.eigvals(M)
    scale = max(1.0, float(np.linalg.norm(M)), eps)
    rho = np.abs(lam).max()
    starts = lam[np.abs(lam) >= rho - 1e-8 * scale]
    best_r, best_t = -np.inf, 0.0
    for s in starts:
        t = float(np.angle(s)) if abs(s) > 0 else 0.0
        r = _radial_max(M, t, eps, scale)
        if r is not None and r > best_r:
            best_r, best_t = r, t
    if not np.isfinite(best_r) or best_r < rho - 1e-10 * scale:
        return None
    for it in range(1, MAX_ITER + 1):
        th = _circle_cuts(M, best_r, eps)
        mids = []
        if th.size:
            ext = np.append(th, th[0] + 2 * np.pi)
            for a, b in zip(ext[:-1], ext[1:]):
                if b - a <= 1e-14:
                    continue
                c = 0.5 * (a + b)
                if _sigmin(M, best_r * np.exp(1j * c)) < eps * (1 - 1e-10):
                    mids.append(c)
        new_r, new_t = best_r, best_t
        for c in mids:
            r = _radial_max(M, c, eps, scale)
            if r is not None and r > new_r:
                new_r, new_t = r, c
        if new_r - best_r <= TOL_CC * max(1.0, best_r):
            if new_r > best_r:
                best_r, best_t = new_r, new_t
            return best_r, best_t, it
        best_r, best_t = new_r, new_t
    return None


def radius_grid(M, epsilon: float, n: int = 201) -> ExtremalPoint:
    """Polar grid scan plus radial bisection (independent check)."""
    M, eps = _check(M, epsilon)
    lam = np.linalg.eigvals(M)
    r_hi = float(np.linalg.norm(M, 2)) + eps * 1.001 + 1e-12
    thetas = np.concatenate([2 * np.pi * np.arange(n) / n, np.angle(lam) % (2 * np.pi)])
    rs = np.linspace(0.0, r_hi, n)
    tol = 1e-12 * max(1.0, r_hi)
    best = (-np.inf, 0.0)
    for t in np.unique(thetas):
        e = np.exp(1j * t)
        f = lambda r, e=e: _sigmin(M, r * e) - eps
        for k in range(n - 1, -1, -1):
            if f(rs[k]) < 0:
                r = rs[k] if k == n - 1 else _bisect(f, rs[k], rs[k + 1], tol)
                if r > best[0]:
                    best = (r, t)
                break
    return ExtremalPoint(float(best[0]), best[0] * np.exp(1j * best[1]), eps, "grid", len(thetas), True)


def pseudospectral_radius(M, epsilon: float) -> ExtremalPoint:
    """``rho_eps(M) = max{|z| : sigma_min(zI - M) <= eps}``."""
    M, eps = _check(M, epsilon)
    res = _radius_cc(M, eps)
    if res is None:
        logger.warning("radial criss-cross failed for eps=%g; falling back to grid search", eps)
        return radius_grid(M, eps)
    r, t, it = res
    return ExtremalPoint(float(r), r * np.exp(1j * t), eps, "criss-cross", it)
