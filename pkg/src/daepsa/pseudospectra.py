"""Pseudospectra of DAE pencils on rectangular grids.

For a decomposition with generator ``M = G^{-1} + mu I`` the DAE
pseudospectrum is the set of ``z`` with ``sigma_min(zI - M) < eps``.  The
legacy definitions ``sigma_min(zE - A)`` ("gen1") and
``sigma_min(zI - E^{-1} A)`` ("ruhe") are provided for comparison.

Every field is evaluated on a triangular pencil ``zB - C`` (``B = I`` except
for gen1, which goes through the complex QZ form), so that large problems can
use inverse Lanczos with two triangular solves per step.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import linalg as la
from .errors import InputError
from .pencil import FiniteDecomposition, Pencil, finite_eigenvalues

logger = logging.getLogger(__name__)

KINDS = ("dae", "gen1", "ruhe")

#: grid points per batched SVD call
_CHUNK = 4096


@dataclass(frozen=True)
class GridSpec:
    """Rectangular lattice ``[re_min, re_max] x [im_min, im_max]``.

    Coordinates come from :func:`numpy.linspace`, so a lattice with
    ``2k - 1`` points per side contains the ``k``-point lattice exactly.
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int = 101
    ny: int = 101

    def __post_init__(self):
        vals = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(np.isfinite(v) for v in vals):
            raise InputError("grid bounds must be finite")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise InputError(f"empty grid window {vals}")
        if int(self.nx) < 2 or int(self.ny) < 2:
            raise InputError(f"grid needs at least 2x2 points, got {self.nx}x{self.ny}")
        for name in ("re_min", "re_max", "im_min", "im_max"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """From ``"re0,re1,im0,im1,nx,ny"``."""
        parts = [s.strip() for s in str(text).split(",")]
        if len(parts) != 6:
            raise InputError(f"grid must be re0,re1,im0,im1,nx,ny, got {text!r}")
        try:
            return cls(*map(float, parts[:4]), int(parts[4]), int(parts[5]))
        except ValueError as exc:
            raise InputError(f"bad grid specification {text!r}: {exc}") from None

    @classmethod
    def around(cls, points, margin: float, n: int = 101) -> "GridSpec":
        """Square-ish window covering ``points`` plus ``margin`` on every side."""
        pts = np.asarray(points, dtype=complex).ravel()
        lo_x, hi_x = pts.real.min() - margin, pts.real.max() + margin
        lo_y, hi_y = pts.imag.min() - margin, pts.imag.max() + margin
        return cls(lo_x, hi_x, lo_y, hi_y, n, n)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.ny)

    @property
    def points(self) -> np.ndarray:
        """``points[i, j] = xs[i] + 1j * ys[j]``."""
        return self.xs[:, None] + 1j * self.ys[None, :]

    @property
    def cell(self) -> tuple:
        return ((self.re_max - self.re_min) / (self.nx - 1), (self.im_max - self.im_min) / (self.ny - 1))

    def as_text(self) -> str:
        return ",".join([repr(self.re_min), repr(self.re_max), repr(self.im_min),
                         repr(self.im_max), str(self.nx), str(self.ny)])


@dataclass(frozen=True, eq=False)
class ResolventField:
    """``sigmin[i, j] = sigma_min`` at ``grid.points[i, j]``; 0 marks eigenvalues."""

    grid: GridSpec
    kind: str
    sigmin: np.ndarray
    mu: complex | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.sigmin, dtype=float)
        if s.shape != (self.grid.nx, self.grid.ny):
            raise InputError(f"field shape {s.shape} does not match grid")
        if not (np.isfinite(s).all() and (s >= 0).all()):
            raise InputError("sigmin values must be finite and nonnegative")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "sigmin", s)

    @property
    def resolvent_norm(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / self.sigmin

    def sublevel(self, epsilon: float) -> np.ndarray:
        """Grid points of the ``epsilon``-pseudospectrum (``sigmin < eps``)."""
        return self.sigmin < epsilon


# ----------------------------------------------------------------------------
# evaluation kernels
# ----------------------------------------------------------------------------

def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PSPEC_THREADS", "1")))
    except ValueError:
        return 1


def sentinel_threshold(m: int, scale: float) -> float:
    """``sigma_min`` at or below this is an eigenvalue to working precision."""
    return 10.0 * max(m, 1) * la.EPS * max(scale, np.finfo(float).tiny)


def _sigmin_batch(B: np.ndarray | None, C: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """``sigma_min(z B - C)`` for each ``z`` (``B = I`` when None)."""
    m = C.shape[0]
    out = np.empty(zs.size)
    Bm = np.eye(m, dtype=complex) if B is None else B
    if m <= la.SVD_CUTOFF:
        for s in range(0, zs.size, _CHUNK):
            z = zs[s:s + _CHUNK]
            stack = z[:, None, None] * Bm[None] - C[None]
            sv = np.linalg.svd(stack, compute_uv=False)
            out[s:s + _CHUNK] = sv[:, -1]
            scale = np.linalg.norm(stack, axis=(1, 2))
            out[s:s + _CHUNK][sv[:, -1] <= sentinel_threshold(m, 1.0) * scale] = 0.0
    else:
        for k, z in enumerate(zs):
            T = z * Bm - C
            v = la.smallest_singular_value(T)
            out[k] = 0.0 if v <= sentinel_threshold(m, np.linalg.norm(T)) else v
    return out


def _evaluate(B, C, grid: GridSpec) -> np.ndarray:
    Z = grid.points
    nthreads = _threads()
    if nthreads == 1 or grid.nx < 2 * nthreads:
        return _sigmin_batch(B, C, Z.ravel()).reshape(Z.shape)
    rows = np.array_split(np.arange(grid.nx), nthreads)
    with ThreadPoolExecutor(nthreads) as pool:
        parts = list(pool.map(lambda r: _sigmin_batch(B, C, Z[r].ravel()).reshape(len(r), grid.ny), rows))
    return np.vstack(parts)


def _triangular_generator(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if la.is_upper_triangular(M):
        return M
    return la.schur(M).T


def matrix_field(M, grid: GridSpec, kind: str = "dae", mu=None) -> ResolventField:
    """``sigma_min(zI - M)`` on ``grid`` for an arbitrary square matrix."""
    C = _triangular_generator(la.as_matrix(M, "M", square=True))
    return ResolventField(grid, kind, _evaluate(None, C, grid), mu)


def resolvent_norm(fd: FiniteDecomposition, z: complex) -> float:
    """``1 / sigma_min(zI - M)``; ``inf`` when ``z`` is an eigenvalue."""
    s = _sigmin_batch(None, np.asarray(fd.generator), np.array([complex(z)]))[0]
    return np.inf if s == 0 else 1.0 / s


def pseudospectra_grid(fd: FiniteDecomposition, grid: GridSpec) -> ResolventField:
    """DAE pseudospectra field of a decomposition on ``grid``."""
    if fd.m == 0:
        raise InputError("pencil has no finite eigenvalues; the pseudospectrum is empty")
    sig = _evaluate(None, np.asarray(fd.generator), grid)
    return ResolventField(grid, "dae", sig, fd.mu, {"n": fd.n, "d": fd.d})


def legacy_grid(p: Pencil, grid: GridSpec, kind: str) -> ResolventField:
    """Fields of the matrix-pencil definitions ``gen1`` and ``ruhe``.

    Raises
    ------
    InputError
        For ``ruhe`` when ``E`` is singular (use the ``dae`` kind instead), or
        for an unknown kind.
    """
    if kind == "gen1":
        AA, BB, _, _ = sla.qz(p.A, p.E, output="complex")
        sig = _evaluate(np.triu(BB), np.triu(AA), grid)
    elif kind == "ruhe":
        lu = la.LUFactor(p.E) if _nonsingular(p.E) else None
        if lu is None or lu.rcond < 1e3 * la.EPS:
            raise InputError("E is singular, so the ruhe definition does not apply; use kind 'dae'")
        sig = _evaluate(None, la.schur(lu.solve(p.A)).T, grid)
    else:
        raise InputError(f"unknown legacy kind {kind!r}; expected 'gen1' or 'ruhe'")
    return ResolventField(grid, kind, sig, None, {"n": p.n})


def _nonsingular(E) -> bool:
    try:
        la.LUFactor(E)
    except la.SingularMatrixError:
        return False
    return True


def field_discrepancy(f1: ResolventField, f2: ResolventField) -> float:
    """Largest pointwise relative difference; two sentinels count as equal."""
    a, b = f1.sigmin, f2.sigmin
    if a.shape != b.shape:
        raise InputError("fields live on different grids")
    den = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(den > 0, np.abs(a - b) / den, 0.0)
    return float(rel.max())


# ----------------------------------------------------------------------------
# numerical range
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NumericalRangeBoundary:
    """Boundary of the numerical range of the generator.

    ``support[k]`` is the largest eigenvalue of
    ``H_k = (e^{i theta_k} M + e^{-i theta_k} M*) / 2``, i.e. the support
    function of the range in direction ``e^{-i theta_k}``; ``points[k]`` is
    the Rayleigh quotient ``x* M x`` of the matching unit eigenvector.
    """

    theta: np.ndarray
    points: np.ndarray
    support: np.ndarray
    omega: float

    def polygon(self) -> np.ndarray:
        """Closed polyline through the boundary points."""
        return np.append(self.points, self.points[:1])

    def excess(self, z) -> np.ndarray:
        """``max_k Re(e^{i theta_k} z) - support[k]``: distance-like excess.

        Positive values certify ``z`` outside the range; for a dense
        sampling this tends to the distance from ``z`` to the range.
        """
        z = np.asarray(z, dtype=complex)
        rot = np.exp(1j * self.theta)
        ex = np.full(z.shape, -np.inf)
        for r, h in zip(rot, self.support):
            ex = np.maximum(ex, (r * z).real - h)
        return ex

    def is_convex(self, tol: float = 1e-10) -> bool:
        """Cross products of consecutive edges never change orientation."""
        p = self.points
        e = np.roll(p, -1) - p
        keep = np.abs(e) > tol * max(1.0, float(np.abs(p).max()))
        e = e[keep]
        if e.size < 3:
            return True
        cross = (e.conj() * np.roll(e, -1)).imag
        scale = np.abs(e) * np.abs(np.roll(e, -1))
        return bool((cross <= tol * scale).all() or (cross >= -tol * scale).all())


def numerical_range(fd_or_M, n_theta: int = 256) -> NumericalRangeBoundary:
    """Johnson's supporting-line sweep for ``W(M)``, ``M = G^{-1} + mu I``."""
    if int(n_theta) < 8:
        raise InputError(f"n_theta must be at least 8, got {n_theta}")
    M = np.asarray(fd_or_M.generator if isinstance(fd_or_M, FiniteDecomposition) else fd_or_M,
                   dtype=complex)
    theta = 2 * np.pi * np.arange(int(n_theta)) / int(n_theta)
    pts = np.empty(theta.size, dtype=complex)
    sup = np.empty(theta.size)
    for k, th in enumerate(theta):
        H = (np.exp(1j * th) * M + np.exp(-1j * th) * M.conj().T) / 2
        w, V = np.linalg.eigh(H)
        x = V[:, -1]
        pts[k] = x.conj() @ M @ x
        sup[k] = w[-1]
    Mh = (M + M.conj().T) / 2
    omega = float(np.linalg.eigvalsh(Mh)[-1])
    return NumericalRangeBoundary(theta, pts, sup, omega)


def check_inclusion(fd: FiniteDecomposition, field: ResolventField, epsilon: float,
                    nr: NumericalRangeBoundary | None = None, rtol: float = 1e-10) -> int:
    """Count grid points of the ``epsilon``-pseudospectrum outside ``W + eps``-disk.

    The range is represented by its supporting half-planes, an outer
    approximation, so a reported violation is a genuine one.
    """
    nr = numerical_range(fd) if nr is None else nr
    inside = field.sublevel(epsilon)
    Z = field.grid.points[inside]
    scale = max(1.0, float(np.abs(Z).max(initial=0.0)), float(np.abs(nr.points).max()))
    ex = nr.excess(Z)
    return int((ex > epsilon + rtol * scale).sum())


def eigenvalues_of(fd: FiniteDecomposition) -> np.ndarray:
    return finite_eigenvalues(fd)
