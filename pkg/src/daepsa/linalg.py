"""Dense complex linear-algebra kernels.

Everything works in complex double precision.  The Schur QR iteration, SVD,
triangular solves and LU are delegated to LAPACK through numpy/scipy; the
Schur reordering, the inverse-Lanczos smallest singular value and the
Padé matrix exponential are implemented here.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence, Union

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import (
    ConvergenceError,
    InputError,
    NotPositiveDefiniteError,
    OverflowMatrixError,
    RankDeficiencyError,
    SingularMatrixError,
)

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps

#: below this order smallest singular values come from a full SVD
SVD_CUTOFF = 64


@dataclass(frozen=True)
class Tolerances:
    """Tolerances shared by the factorization routines.

    ``rank`` is relative: a triangular diagonal entry (or QR pivot) counts as
    zero when it is below ``rank * ||M||``.  ``None`` means ``n * eps`` with
    ``n`` the matrix order.
    """

    unitary: float = 1e-12
    recon: float = 1e-12
    rank: float | None = None
    solve: float = 1e-12
    herm: float = 1e-12
    swap: float = 1e-10

    def rank_tol(self, n: int) -> float:
        return self.rank if self.rank is not None else n * EPS

    def with_(self, **kw) -> "Tolerances":
        return replace(self, **kw)


DEFAULT_TOL = Tolerances()


def as_matrix(M, name: str = "matrix", square: bool = False) -> np.ndarray:
    """Return ``M`` as a finite, 2-D complex128 array (a copy)."""
    try:
        a = np.array(M, dtype=complex, copy=True)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: not convertible to a complex matrix ({exc})") from exc
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InputError(f"{name}: expected a non-empty 2-D array, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise InputError(f"{name}: expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name}: entries must be finite")
    return a


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def is_upper_triangular(M: np.ndarray) -> bool:
    return M.shape[0] == M.shape[1] and not np.any(np.tril(M, -1))


# --------------------------------------------------------------------------
# Schur factorization and reordering


@dataclass(frozen=True)
class SchurForm:
    """Complex Schur form ``M = Q T Q*`` with ``T`` upper triangular."""

    Q: np.ndarray
    T: np.ndarray
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        _frozen(self.Q)
        _frozen(self.T)

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.diag(self.T).copy()

    def reconstruct(self) -> np.ndarray:
        return self.Q @ self.T @ self.Q.conj().T


def schur(M) -> SchurForm:
    """Complex Schur factorization of a square matrix.

    Raises
    ------
    ConvergenceError
        If the QR iteration fails; ``index`` is the first unconverged
        eigenvalue position.
    """
    a = as_matrix(M, "M", square=True)
    n = a.shape[0]
    if n == 1:
        return SchurForm(np.eye(1, dtype=complex), a)
    t, _sdim, _w, vs, _work, info = lapack.zgees(lambda x: None, a, compute_v=1, sort_t=0)
    if info > 0:
        raise ConvergenceError(
            f"Schur QR iteration failed to converge; eigenvalue {info - 1} stalled",
            index=info - 1,
        )
    if info < 0:  # pragma: no cover - LAPACK argument error
        raise ConvergenceError(f"zgees: illegal argument {-info}")
    return SchurForm(np.ascontiguousarray(vs), np.triu(t))


def _givens(f: complex, g: complex):
    """Rotation (c real, s complex) with ``[c s; -conj(s) c] [f; g] = [r; 0]``."""
    if g == 0:
        return 1.0, 0.0j
    if f == 0:
        return 0.0, np.conj(g) / abs(g)
    af = abs(f)
    nrm = math.hypot(af, abs(g))
    return af / nrm, (f / af) * np.conj(g) / nrm


def _swap_adjacent(T: np.ndarray, Q: np.ndarray, k: int) -> None:
    """Exchange diagonal entries k and k+1 of the Schur form, in place."""
    t11, t22 = T[k, k], T[k + 1, k + 1]
    c, s = _givens(T[k, k + 1], t22 - t11)
    # rows k, k+1 to the right of the 2x2 block
    rk, rk1 = T[k, k + 2:].copy(), T[k + 1, k + 2:].copy()
    T[k, k + 2:] = c * rk + s * rk1
    T[k + 1, k + 2:] = -np.conj(s) * rk + c * rk1
    # columns k, k+1 above the block
    sc = np.conj(s)
    ck, ck1 = T[:k, k].copy(), T[:k, k + 1].copy()
    T[:k, k] = c * ck + sc * ck1
    T[:k, k + 1] = -s * ck + c * ck1
    T[k, k], T[k + 1, k + 1] = t22, t11
    qk, qk1 = Q[:, k].copy(), Q[:, k + 1].copy()
    Q[:, k] = c * qk + sc * qk1
    Q[:, k + 1] = -s * qk + c * qk1


Selector = Union[Callable[[complex], bool], Sequence[bool], np.ndarray]


def reorder_schur(sf: SchurForm, select: Selector, tol: Tolerances = DEFAULT_TOL) -> SchurForm:
    """Move the selected eigenvalues to the leading block of a Schur form.

    Parameters
    ----------
    sf
        Schur form to reorder (not modified).
    select
        Either a predicate evaluated on each diagonal entry, or a boolean mask
        over the diagonal positions.  Selected entries keep their relative
        order, as do the unselected ones.
    tol
        ``tol.swap`` flags swaps of nearly equal eigenvalues, whose rotation
        is ill-determined; such swaps are still carried out but recorded in
        ``warnings`` of the result.
    """
    T = np.array(sf.T)
    Q = np.array(sf.Q)
    n = T.shape[0]
    diag = np.diag(T)
    if callable(select):
        mask = np.array([bool(select(z)) for z in diag])
    else:
        mask = np.asarray(select, dtype=bool)
        if mask.shape != (n,):
            raise InputError(f"selection mask must have length {n}")
    warns = list(sf.warnings)
    scale = max(1.0, float(np.max(np.abs(T))))
    slot = 0
    for j in range(n):
        if not mask[j]:
            continue
        for k in range(j - 1, slot - 1, -1):
            if abs(T[k, k] - T[k + 1, k + 1]) <= tol.swap * scale and abs(T[k, k + 1]) > tol.swap * scale:
                warns.append(f"swap of nearly equal eigenvalues at positions {k},{k + 1}")
            _swap_adjacent(T, Q, k)
        slot += 1
    if warns != list(sf.warnings):
        for w in warns[len(sf.warnings):]:
            logger.warning(w)
    return SchurForm(Q, np.triu(T), tuple(warns))


# --------------------------------------------------------------------------
# singular values


def _inverse_lanczos_sigmin(T: np.ndarray, maxit: int = 200, rtol: float = 1e-15) -> float:
    """Smallest singular value of an upper-triangular ``T``.

    Lanczos on ``(T* T)^{-1}`` with full reorthogonalization; each step costs
    two triangular solves.  The start vector is fixed so results are
    reproducible.
    """
    m = T.shape[0]
    d = np.abs(np.diag(T))
    if np.min(d) == 0.0:
        return 0.0
    TH = T.conj().T
    maxit = min(maxit, m)
    V = np.zeros((m, maxit + 1), dtype=complex)
    alpha = np.zeros(maxit)
    beta = np.zeros(maxit)
    v = np.ones(m, dtype=complex) + 1j * np.linspace(-0.5, 0.5, m)
    V[:, 0] = v / np.linalg.norm(v)
    lam_old = 0.0
    lam = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(maxit):
            y = sla.solve_triangular(TH, V[:, j], lower=True, check_finite=False)
            w = sla.solve_triangular(T, y, lower=False, check_finite=False)
            if not np.all(np.isfinite(w)):
                return 0.0
            alpha[j] = np.real(np.vdot(V[:, j], w))
            w = w - V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
            w = w - V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
            beta[j] = np.linalg.norm(w)
            k = j + 1
            if k == 1:
                lam = alpha[0]
            else:
                lam = sla.eigvalsh_tridiagonal(alpha[:k], beta[: k - 1], select="i",
                                               select_range=(k - 1, k - 1))[0]
            if lam <= 0 or not np.isfinite(lam):
                return 0.0
            if beta[j] <= rtol * lam or (j > 0 and abs(lam - lam_old) <= rtol * lam):
                break
            lam_old = lam
            V[:, j + 1] = w / beta[j]
    return float(1.0 / math.sqrt(lam))


def smallest_singular_value(M) -> float:
    """``sigma_min(M)`` for a square matrix; 0 signals singularity.

    Full SVD up to order 64.  Above that, upper-triangular input uses inverse
    Lanczos with triangular solves; anything else falls back to the SVD.
    """
    a = np.asarray(M, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError("smallest_singular_value needs a square matrix")
    if a.shape[0] > SVD_CUTOFF and is_upper_triangular(a):
        return _inverse_lanczos_sigmin(a)
    return float(np.linalg.svd(a, compute_uv=False)[-1])


def condition_estimate(M) -> float:
    """2-norm condition number from the SVD (``inf`` when singular)."""
    s = np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else math.inf


# --------------------------------------------------------------------------
# matrix exponential

_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with the [13/13] Padé approximant.

    Raises
    ------
    OverflowMatrixError
        If the result is not representable; ``norm`` is ``||M||_1``.
    """
    a = as_matrix(M, "M", square=True)
    n = a.shape[0]
    norm1 = float(np.linalg.norm(a, 1))
    if norm1 == 0.0:
        return np.eye(n, dtype=complex)
    s = max(0, int(math.ceil(math.log2(norm1 / _THETA13))))
    if s > 1000:
        raise OverflowMatrixError(f"expm: ||M||_1 = {norm1:.3e} is too large", norm=norm1)
    a = a / 2.0**s
    b = _PADE13
    ident = np.eye(n, dtype=complex)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    with np.errstate(over="ignore", invalid="ignore"):
        r = np.linalg.solve(v - u, v + u)
        for _ in range(s):
            r = r @ r
    if not np.all(np.isfinite(r)):
        raise OverflowMatrixError(f"expm overflowed for ||M||_1 = {norm1:.3e}", norm=norm1)
    return r


# --------------------------------------------------------------------------
# QR, Cholesky, triangular and LU solves


def qr_economy(M, tol: Tolerances = DEFAULT_TOL):
    """Economy QR ``M = Z S`` with ``diag(S)`` real and nonnegative.

    Raises
    ------
    RankDeficiencyError
        If ``|S_ii| <= tol_rank * ||M||_F``; ``index`` is the column.
    """
    a = as_matrix(M, "M")
    m, k = a.shape
    if m < k:
        raise InputError(f"qr_economy needs rows >= cols, got {a.shape}")
    Z, S = np.linalg.qr(a, mode="reduced")
    d = np.diag(S)
    ph = np.where(d == 0, 1.0, d / np.where(d == 0, 1.0, np.abs(d)))
    Z = Z * ph[None, :]
    S = np.triu(S * np.conj(ph)[:, None])
    S[np.diag_indices(k)] = np.abs(d)
    thresh = tol.rank_tol(max(m, k)) * np.linalg.norm(a)
    bad = np.flatnonzero(np.abs(d) <= thresh)
    if bad.size:
        i = int(bad[0])
        raise RankDeficiencyError(f"qr_economy: column {i} is numerically dependent "
                                  f"(|S_ii| = {abs(d[i]):.3e})", index=i)
    return Z, S


def cholesky(H, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Upper-triangular ``R`` with ``H = R* R``.

    Raises
    ------
    InputError
        If ``H`` is not Hermitian to ``tol.herm * ||H||_F``.
    NotPositiveDefiniteError
        On a non-positive pivot; ``index`` is its 0-based position.
    """
    h = as_matrix(H, "H", square=True)
    nrm = np.linalg.norm(h)
    if np.linalg.norm(h - h.conj().T) > tol.herm * max(nrm, 1.0):
        raise InputError("cholesky: H is not Hermitian")
    h = (h + h.conj().T) / 2
    c, info = lapack.zpotrf(h, lower=0, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(
            f"cholesky: non-positive pivot at index {info - 1}; H is not positive definite",
            index=info - 1,
        )
    R = np.triu(c)
    R[np.diag_indices_from(R)] = np.real(np.diag(R))
    return R


def _check_triangular_diag(T: np.ndarray, tol: Tolerances) -> None:
    n = T.shape[0]
    d = np.abs(np.diag(T))
    thresh = tol.rank_tol(n) * max(np.linalg.norm(T), np.finfo(float).tiny)
    bad = np.flatnonzero(d <= thresh)
    if bad.size:
        i = int(bad[0])
        raise SingularMatrixError(f"triangular matrix singular to working precision at diagonal {i}",
                                  index=i)


def triangular_solve(T, b, lower: bool = False, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Solve ``T x = b`` for triangular ``T`` (vector or matrix right-hand side)."""
    t = np.asarray(T, dtype=complex)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise InputError("triangular_solve needs a square matrix")
    _check_triangular_diag(t, tol)
    return sla.solve_triangular(t, np.asarray(b, dtype=complex), lower=lower, check_finite=False)


def invert_triangular(T, lower: bool = False, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    t = np.asarray(T, dtype=complex)
    inv = triangular_solve(t, np.eye(t.shape[0], dtype=complex), lower=lower, tol=tol)
    return np.tril(inv) if lower else np.triu(inv)


class LUFactor:
    """LU factorization with partial pivoting plus a 1-norm condition estimate.

    Raises :class:`SingularMatrixError` at construction when a pivot is zero to
    working precision; ``index`` is the pivot and ``condition`` the estimate.
    """

    def __init__(self, M, tol: Tolerances = DEFAULT_TOL):
        a = as_matrix(M, "M", square=True)
        n = a.shape[0]
        self.n = n
        self.anorm = float(np.linalg.norm(a, 1))
        lu, piv, info = lapack.zgetrf(a)
        self.lu, self.piv = lu, piv
        u = np.abs(np.diag(lu))
        self.pivot_growth = float(np.max(np.abs(np.triu(lu))) / max(np.max(np.abs(a)), np.finfo(float).tiny))
        if info > 0 or self.anorm == 0.0:
            self.rcond = 0.0
        else:
            rc, _ = lapack.zgecon(lu, self.anorm, norm="1")
            self.rcond = float(rc)
        thresh = tol.rank_tol(n) * max(np.max(np.abs(a)), np.finfo(float).tiny)
        bad = np.flatnonzero(u <= thresh)
        if bad.size:
            i = int(bad[0])
            cond = math.inf if self.rcond == 0 else 1.0 / self.rcond
            raise SingularMatrixError(
                f"LU: zero pivot at index {i} (pivot growth {self.pivot_growth:.2e}, "
                f"condition estimate {cond:.2e})",
                index=i, condition=cond,
            )

    @property
    def condition(self) -> float:
        return math.inf if self.rcond == 0 else 1.0 / self.rcond

    def solve(self, b) -> np.ndarray:
        x, info = lapack.zgetrs(self.lu, self.piv, np.asarray(b, dtype=complex))
        return x


def lu_solve(M, b, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Solve ``M x = b`` by LU with partial pivoting."""
    return LUFactor(M, tol).solve(b)
