"""Finite/infinite spectral splitting of a regular pencil ``(A, E)``.

For an admissible shift ``mu`` the shifted operator ``E_mu = (A - mu E)^{-1} E``
is brought to the ordered Schur form::

    E_mu = [Q  Qt] [[G, D],
                    [0, N]] [Q  Qt]*

with ``G`` invertible upper triangular and ``N`` nilpotent.  The DAE
``E x' = A x`` then evolves inside ``Ran(Q)`` under the generator
``G^{-1} + mu I``, which does not depend on ``mu``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from . import linalg as la
from .errors import (
    InconsistentInitialConditionError,
    InputError,
    NumericalError,
    SingularMatrixError,
    SingularPencilError,
)

logger = logging.getLogger(__name__)

DEFAULT_SHIFTS = (0.0, 0.25, 1.0, -1.0, 1j, -1j, 1 + 1j)

#: ``A - mu E`` with reciprocal condition below this is treated as singular
SINGULAR_RCOND = 1e3 * la.EPS

#: tolerance on ``||(I - QQ*) x0|| / ||x0||`` for initial conditions
TOL_CONSISTENT = 1e-10


@dataclass(frozen=True)
class Pencil:
    """Square matrix pair ``(A, E)`` of the DAE ``E x'(t) = A x(t)``."""

    A: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        A = la.as_matrix(self.A, "A", square=True)
        E = la.as_matrix(self.E, "E", square=True)
        if A.shape != E.shape:
            raise InputError(f"A and E must have the same shape, got {A.shape} and {E.shape}")
        A.flags.writeable = False
        E.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "E", E)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def premultiply(self, T) -> "Pencil":
        """The pencil ``(T A, T E)``; same DAE solutions for invertible ``T``."""
        T = la.as_matrix(T, "T", square=True)
        return Pencil(T @ self.A, T @ self.E)


@dataclass(frozen=True, eq=False)
class FiniteDecomposition:
    """Ordered Schur split of ``E_mu`` (see module docstring).

    ``index`` is the smallest ``k`` with ``N^k = 0`` (0 when ``d = 0``), or
    ``None`` when ``N`` is not nilpotent because ``d`` was overestimated via
    ``d_hint``.
    """

    pencil: Pencil
    mu: complex
    d: int
    Q: np.ndarray
    Qtilde: np.ndarray
    G: np.ndarray
    D: np.ndarray
    N: np.ndarray
    index: int | None
    E_mu: np.ndarray = field(repr=False)
    threshold: float = 0.0
    warnings: tuple = ()

    def __post_init__(self):
        for name in ("Q", "Qtilde", "G", "D", "N", "E_mu"):
            getattr(self, name).flags.writeable = False

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def m(self) -> int:
        """Number of finite eigenvalues, ``n - d``."""
        return self.G.shape[0]

    @cached_property
    def generator(self) -> np.ndarray:
        """``G^{-1} + mu I``, upper triangular and independent of ``mu``."""
        M = la.invert_triangular(self.G) + self.mu * np.eye(self.m)
        M = np.triu(M)
        M.flags.writeable = False
        return M

    @property
    def basis(self) -> np.ndarray:
        return np.hstack([self.Q, self.Qtilde])

    @property
    def schur_factor(self) -> np.ndarray:
        m, d = self.m, self.d
        T = np.zeros((self.n, self.n), dtype=complex)
        T[:m, :m] = self.G
        T[:m, m:] = self.D
        T[m:, m:] = self.N
        return T

    def reconstruction_residual(self) -> float:
        """``||U T U* - E_mu||_F / ||E_mu||_F``."""
        U = self.basis
        R = U @ self.schur_factor @ U.conj().T - self.E_mu
        return float(np.linalg.norm(R) / max(np.linalg.norm(self.E_mu), np.finfo(float).tiny))

    def unitarity_residual(self) -> float:
        U = self.basis
        return float(np.linalg.norm(U.conj().T @ U - np.eye(self.n)))


def shifted_operator(p: Pencil, mu: complex, tol: la.Tolerances = la.DEFAULT_TOL) -> np.ndarray:
    """``E_mu = (A - mu E)^{-1} E``.

    Raises
    ------
    SingularMatrixError
        When ``A - mu E`` is singular or nearly so; ``condition`` holds the
        1-norm condition estimate.
    """
    S = p.A - mu * p.E
    lu = la.LUFactor(S, tol)
    if lu.rcond < SINGULAR_RCOND:
        raise SingularMatrixError(
            f"A - mu E is numerically singular at mu = {mu} (condition estimate {lu.condition:.3e})",
            condition=lu.condition,
        )
    Emu = lu.solve(p.E)
    res = np.linalg.norm(S @ Emu - p.E)
    if res > 1e-8 * max(np.linalg.norm(p.E), 1.0) * max(1.0, lu.condition * la.EPS * 1e4):
        raise SingularMatrixError(f"solve residual {res:.3e} too large at mu = {mu}",
                                  condition=lu.condition)
    return Emu


def select_shift(p: Pencil, candidates: Iterable[complex] | None = None) -> complex:
    """First candidate shift with ``cond(A - mu E) < 1/sqrt(eps)``.

    Raises
    ------
    SingularPencilError
        If every candidate fails; the per-candidate condition estimates are
        attached.
    """
    conds = {}
    limit = 1.0 / math.sqrt(la.EPS)
    for mu in (DEFAULT_SHIFTS if candidates is None else candidates):
        mu = complex(mu)
        try:
            c = la.LUFactor(p.A - mu * p.E).condition
        except SingularMatrixError as exc:
            c = exc.condition if exc.condition is not None else math.inf
        conds[mu] = c
        if c < limit:
            return mu
    listing = ", ".join(f"{k}: {v:.3e}" for k, v in conds.items())
    raise SingularPencilError(f"pencil appears singular or badly scaled ({listing})", conds)


def _zero_threshold(n: int, Emu: np.ndarray) -> float:
    return max(n * la.EPS, 1e-10) * max(1.0, float(np.linalg.norm(Emu)))


def _nilpotency_index(N: np.ndarray, tol: float = 1e-10) -> int | None:
    d = N.shape[0]
    if d == 0:
        return 0
    scale = max(1.0, float(np.linalg.norm(N)))
    P = np.eye(d, dtype=complex)
    for k in range(1, d + 1):
        P = P @ N
        if np.linalg.norm(P) <= tol * scale**k:
            return k
    return None


def decompose(p: Pencil, mu: complex | None = None, d_hint: int | None = None,
              tol: la.Tolerances = la.DEFAULT_TOL) -> FiniteDecomposition:
    """Split ``E_mu`` into finite (``G``) and infinite (``N``) parts.

    The zero eigenvalues of ``E_mu`` are removed by repeatedly deflating the
    left null space of the leading block (a staircase reduction); each pass
    peels one level of the nilpotent structure, so the trailing block is
    strictly upper triangular with exact zeros where the structure demands
    them.  The remaining block is then brought to complex Schur form.

    Parameters
    ----------
    p
        The pencil.
    mu
        Shift; chosen by :func:`select_shift` when omitted.
    d_hint
        Known number of infinite eigenvalues.  Values above the detected
        count move the smallest-magnitude eigenvalues of ``G`` into ``N``
        (giving interior pseudospectra); values below it are rejected.
    """
    if mu is None:
        mu = select_shift(p)
    mu = complex(mu)
    Emu = shifted_operator(p, mu, tol)
    n = p.n
    thr = _zero_threshold(n, Emu)
    warns: list[str] = []

    U = np.eye(n, dtype=complex)
    m = n
    levels = []
    while m > 0:
        T = U.conj().T @ Emu @ U
        X, s, _ = np.linalg.svd(T[:m, :m])
        r = int(np.sum(s <= thr))
        near = s[(s > thr) & (s <= 10 * thr)]
        if near.size or np.any((s <= thr) & (s > thr / 10)):
            warns.append(f"ambiguous zero classification: singular values {s[s <= 10 * thr]} "
                         f"near threshold {thr:.3e}")
        if r == 0:
            break
        # left null vectors go last: the trailing r rows of P* T P vanish
        U[:, :m] = U[:, :m] @ X
        m -= r
        levels.append(r)
    if m == 0:
        raise NumericalError("E_mu is nilpotent: the pencil has no finite eigenvalues")

    T = U.conj().T @ Emu @ U
    sf = la.schur(T[:m, :m])
    U[:, :m] = U[:, :m] @ sf.Q
    T = U.conj().T @ Emu @ U
    T[:m, :m] = sf.T
    # impose the staircase zeros
    T[m:, :m] = 0.0
    start = m
    for r in reversed(levels):
        T[start:start + r, :start + r] = 0.0
        start += r
    d = n - m
    index = len(levels) if levels else 0

    if d_hint is not None:
        d_hint = int(d_hint)
        if d_hint < d:
            raise InputError(f"d_hint = {d_hint} is below the {d} zero eigenvalues detected in E_mu; "
                             "G would be singular")
        if d_hint > n - 1:
            raise InputError(f"d_hint = {d_hint} leaves no finite eigenvalues (n = {n})")
        extra = d_hint - d
        if extra:
            g = la.SchurForm(np.eye(m, dtype=complex), T[:m, :m].copy())
            mags = np.abs(np.diag(g.T))
            keep = np.zeros(m, dtype=bool)
            keep[np.argsort(-mags, kind="stable")[: m - extra]] = True
            g = la.reorder_schur(g, keep, tol)
            U[:, :m] = U[:, :m] @ g.Q
            T[:m, :] = g.Q.conj().T @ T[:m, :]
            T[:m, :m] = g.T
            m -= extra
            d = d_hint
            warns.append(f"d_hint overestimates d by {extra}; pseudospectra are interior bounds")
            index = _nilpotency_index(T[m:, m:])

    for w in warns:
        logger.warning(w)
    fd = FiniteDecomposition(
        pencil=p, mu=mu, d=d,
        Q=np.ascontiguousarray(U[:, :m]), Qtilde=np.ascontiguousarray(U[:, m:]),
        G=np.ascontiguousarray(T[:m, :m]), D=np.ascontiguousarray(T[:m, m:]),
        N=np.ascontiguousarray(T[m:, m:]),
        index=index, E_mu=Emu, threshold=thr, warnings=tuple(warns),
    )
    return fd


def _cluster_average(vals: np.ndarray, M: np.ndarray, safety: float = 10.0) -> np.ndarray:
    """Replace clusters of ill-conditioned eigenvalues by their mean.

    A defective eigenvalue of multiplicity k is split by rounding into k
    values spread over roughly ``eps**(1/k)``; their mean is accurate to
    ``O(eps)``.  Two eigenvalues are clustered when their first-order
    uncertainty discs ``kappa_i * eps * ||M||_F`` (times ``safety``) overlap.
    """
    k = vals.size
    if k < 2:
        return vals
    w, vl, vr = sla.eig(M, left=True, right=True)
    # align the eig() ordering with vals
    r, c = linear_sum_assignment(np.abs(vals[:, None] - w[None, :]))
    order = np.empty(k, dtype=int)
    order[r] = c
    denom = np.abs(np.sum(vl.conj() * vr, axis=0))[order]
    kappa = np.where(denom > 0, 1.0 / np.maximum(denom, np.finfo(float).tiny), np.inf)
    radius = safety * kappa * la.EPS * max(float(np.linalg.norm(M)), 1.0)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(k):
        for j in range(i + 1, k):
            if abs(vals[i] - vals[j]) <= radius[i] + radius[j]:
                parent[find(i)] = find(j)
    roots = np.array([find(i) for i in range(k)])
    out = vals.copy()
    for root in np.unique(roots):
        members = roots == root
        if members.sum() > 1:
            out[members] = vals[members].mean()
    return out


def finite_eigenvalues(fd: FiniteDecomposition, refine_clusters: bool = True) -> np.ndarray:
    """Finite spectrum of the pencil: ``1/g_ii + mu``.

    With ``refine_clusters`` (default) numerically defective clusters are
    reported by their mean, which is far better conditioned than the
    individual computed values.
    """
    vals = 1.0 / np.diag(fd.G) + fd.mu
    if refine_clusters:
        vals = _cluster_average(vals, fd.generator)
    return vals


def match_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Largest distance in an optimal one-to-one matching of two multisets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return math.inf
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def check_mu_independence(p: Pencil, mu: complex, nu: complex, probes: Iterable[complex]) -> float:
    """Largest relative discrepancy between the two shifts.

    Compares resolvent norms of ``G_mu^{-1} + mu I`` and ``G_nu^{-1} + nu I``
    at each probe point, and the matched eigenvalue multisets (relative to
    their magnitude); returns the maximum of both.
    """
    f1 = decompose(p, mu)
    f2 = decompose(p, nu)
    worst = 0.0
    I = np.eye(f1.m)
    for z in probes:
        s1 = la.smallest_singular_value(z * I - f1.generator)
        s2 = la.smallest_singular_value(z * I - f2.generator)
        if s1 == 0.0 and s2 == 0.0:
            continue
        worst = max(worst, abs(s1 - s2) / max(s1, s2))
    e1, e2 = finite_eigenvalues(f1), finite_eigenvalues(f2)
    scale = max(1.0, float(np.max(np.abs(e1))))
    return max(worst, match_distance(e1, e2) / scale)


def consistency_residual(fd: FiniteDecomposition, x0) -> float:
    """``||(I - Q Q*) x0||``; zero exactly for admissible initial states."""
    x0 = np.asarray(x0, dtype=complex).ravel()
    if x0.shape[0] != fd.n:
        raise InputError(f"x0 has length {x0.shape[0]}, expected {fd.n}")
    return float(np.linalg.norm(x0 - fd.Q @ (fd.Q.conj().T @ x0)))


def require_consistent(fd: FiniteDecomposition, x0, tol: float = TOL_CONSISTENT) -> np.ndarray:
    x0 = np.asarray(x0, dtype=complex).ravel()
    res = consistency_residual(fd, x0)
    if res > tol * max(np.linalg.norm(x0), np.finfo(float).tiny):
        projected = fd.Q @ (fd.Q.conj().T @ x0)
        raise InconsistentInitialConditionError(
            f"initial state violates the algebraic constraints (residual {res:.3e}); "
            f"its consistent part is Q Q* x0 = {np.array2string(projected, precision=6)}",
            residual=res, projected=projected,
        )
    return x0


def solution_at(fd: FiniteDecomposition, x0, t: float) -> np.ndarray:
    """DAE solution ``x(t) = Q exp(t (G^{-1} + mu I)) Q* x0``.

    Raises
    ------
    InconsistentInitialConditionError
        When ``x0`` is not in ``Ran(Q)``.
    """
    if t < 0:
        raise InputError("t must be nonnegative")
    x0 = require_consistent(fd, x0)
    y = la.expm(t * fd.generator) @ (fd.Q.conj().T @ x0)
    return fd.Q @ y
