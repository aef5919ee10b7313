"""Projection onto invariant subspaces of the shift-invert operator.

For large pencils the dominant eigenvalues of ``E_mu = (A - mu E)^{-1} E``
(the finite pencil eigenvalues closest to ``mu``) are captured by a
Krylov-Schur Arnoldi iteration.  With an orthonormal basis ``V`` of the
computed invariant subspace, ``Ghat = V* E_mu V`` gives the generator
``Ghat^{-1} + mu I`` whose pseudospectra lie inside those of the pencil.

Also provides sparse saddle-point pencils

    A = [[K, B^T], [B, 0]],   E = [[M, 0], [0, 0]]

with ``M`` symmetric positive definite and ``B`` of full row rank, which have
``2 n_p`` infinite eigenvalues in Jordan blocks of size two.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import linalg as la
from .criss_cross import pseudospectral_abscissa
from .errors import ConvergenceError, InputError, NumericalError, SingularMatrixError
from .pencil import SINGULAR_RCOND, Pencil
from .pseudospectra import GridSpec, ResolventField, matrix_field
from .weighted import InnerProductNorm, weighted_generator

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2000
ARNOLDI_TOL = 1e-12
MAX_RESTARTS = 500


# ----------------------------------------------------------------------------
# sparse pencils
# ----------------------------------------------------------------------------

def _coo(M, n: int, name: str) -> sp.csr_matrix:
    if sp.issparse(M):
        S = sp.csr_matrix(M, dtype=complex if np.iscomplexobj(M.data) else float)
    else:
        S = sp.csr_matrix(np.asarray(M))
    if S.shape != (n, n):
        raise InputError(f"{name} has shape {S.shape}, expected {(n, n)}")
    S.sum_duplicates()
    S.eliminate_zeros()
    if not np.isfinite(S.data).all():
        raise InputError(f"{name} has non-finite entries")
    return S


@dataclass(frozen=True, eq=False)
class SparsePencil:
    """Sparse ``(A, E)`` with optional saddle block sizes ``(n_v, n_p)``."""

    A: sp.csr_matrix
    E: sp.csr_matrix
    blocks: tuple | None = None

    def __post_init__(self):
        n = self.A.shape[0]
        object.__setattr__(self, "A", _coo(self.A, n, "A"))
        object.__setattr__(self, "E", _coo(self.E, n, "E"))
        if self.blocks is not None and sum(self.blocks) != n:
            raise InputError(f"block sizes {self.blocks} do not add up to {n}")

    @classmethod
    def from_triplets(cls, n, a_triplets, e_triplets, blocks=None) -> "SparsePencil":
        """From ``(rows, cols, values)`` triplets; duplicates are summed."""
        mats = []
        for r, c, v in (a_triplets, e_triplets):
            r, c = np.asarray(r, dtype=int), np.asarray(c, dtype=int)
            if r.size and (r.min() < 0 or c.min() < 0 or r.max() >= n or c.max() >= n):
                raise InputError("triplet index out of range")
            mats.append(sp.coo_matrix((np.asarray(v), (r, c)), shape=(n, n)).tocsr())
        return cls(mats[0], mats[1], blocks)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def triplets(self, which: str = "A"):
        M = (self.A if which == "A" else self.E).tocoo()
        order = np.lexsort((M.col, M.row))
        return M.row[order], M.col[order], M.data[order]

    def to_dense(self) -> Pencil:
        return Pencil(self.A.toarray(), self.E.toarray())


# ----------------------------------------------------------------------------
# shift-invert solvers
# ----------------------------------------------------------------------------

class ShiftInvertSolver:
    """Interface: ``apply(v) = (A - mu E)^{-1} E v`` for one fixed shift."""

    n: int
    mu: complex

    def apply(self, v: np.ndarray) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError


class DenseShiftInvert(ShiftInvertSolver):
    """Dense LU of ``A - mu E``; refuses dimensions above ``DENSE_LIMIT``."""

    def __init__(self, p, mu: complex):
        if isinstance(p, SparsePencil):
            if p.n > DENSE_LIMIT:
                raise InputError(
                    f"n = {p.n} exceeds the dense limit {DENSE_LIMIT}; pass a sparse solver "
                    "such as SparseLUShiftInvert or an external one"
                )
            A, E = p.A.toarray(), p.E.toarray()
        else:
            A, E = p.A, p.E
        self.n = A.shape[0]
        self.mu = complex(mu)
        self.E = np.asarray(E, dtype=complex)
        try:
            self.lu = la.LUFactor(A - self.mu * self.E)
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"A - mu E is singular at mu = {mu}; try another shift",
                                      exc.index, exc.condition) from None
        if self.lu.rcond < SINGULAR_RCOND:
            raise SingularMatrixError(f"A - mu E is nearly singular at mu = {mu}; try another shift",
                                      condition=self.lu.condition)

    def apply(self, v):
        return self.lu.solve(self.E @ v)


class SparseLUShiftInvert(ShiftInvertSolver):
    """Sparse direct solver (SuperLU) for large sparse pencils."""

    def __init__(self, p: SparsePencil, mu: complex):
        self.n = p.n
        self.mu = complex(mu)
        self.E = p.E.astype(complex)
        S = (p.A.astype(complex) - self.mu * self.E).tocsc()
        try:
            self.lu = spla.splu(S)
        except RuntimeError as exc:
            raise SingularMatrixError(f"sparse LU of A - mu E failed at mu = {mu}: {exc}") from None

    def apply(self, v):
        return self.lu.solve(np.asarray(self.E @ v, dtype=complex))


# ----------------------------------------------------------------------------
# Krylov-Schur
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Orthonormal ``V`` (n x k), ``Ghat = V* E_mu V`` and diagnostics.

    ``residuals[i]`` is ``||E_mu v_i - V Ghat e_i||`` for the i-th basis
    vector.  Leading columns of ``V`` span nested invariant subspaces, so
    :meth:`truncate` gives the result for any smaller ``k``.
    """

    mu: complex
    V: np.ndarray
    Ghat: np.ndarray
    ritz_values: np.ndarray
    residuals: np.ndarray
    converged: bool = True
    iterations: int = 0
    basis_condition: float = 1.0
    S: np.ndarray | None = None
    ipn: InnerProductNorm | None = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return self.V.shape[1]

    def truncate(self, j: int) -> "ProjectionResult":
        if not 1 <= j <= self.k:
            raise InputError(f"cannot truncate a {self.k}-dimensional projection to {j}")
        res = replace(self, V=self.V[:, :j], Ghat=self.Ghat[:j, :j], ritz_values=self.ritz_values[:j],
                      residuals=self.residuals[:j], S=None, ipn=None)
        return projected_h_norm(res, self.ipn) if self.ipn is not None else res

    def generator(self) -> np.ndarray:
        """``Ghat^{-1} + mu I`` (or its weighted form ``S Ghat^{-1} S^{-1} + mu I``)."""
        _check_ritz(self)
        if self.S is not None:
            return weighted_generator(self.V, self.Ghat, self.mu, self.ipn).matrix
        return np.linalg.inv(self.Ghat) + self.mu * np.eye(self.k)


def _order_by_magnitude(sf: la.SchurForm, k: int) -> la.SchurForm:
    """Put the ``k`` largest-modulus eigenvalues first, in descending order."""
    for r in range(k):
        d = np.abs(np.diag(sf.T))
        rest = np.argsort(-d[r:], kind="stable")[0] + r
        mask = np.zeros(sf.n, dtype=bool)
        mask[:r] = True
        mask[rest] = True
        sf = la.reorder_schur(sf, mask)
    return sf


def _mgs(V, w, j):
    """Orthogonalise ``w`` against ``V[:, :j]`` twice (modified Gram-Schmidt)."""
    h = np.zeros(j, dtype=complex)
    for _ in range(2):
        for i in range(j):
            c = np.vdot(V[:, i], w)
            h[i] += c
            w = w - c * V[:, i]
    return w, h


def _start_vector(n, seed):
    rng = np.random.default_rng(seed)
    v = np.ones(n) / np.sqrt(n) + 1e-2 * rng.standard_normal(n)
    return (v / np.linalg.norm(v)).astype(complex)


def _finish(solver, V, mu, converged, iterations):
    W = np.column_stack([solver.apply(V[:, i]) for i in range(V.shape[1])])
    G = V.conj().T @ W
    # rotate to Schur form ordered by modulus so truncations are nested
    sf = _order_by_magnitude(la.schur(G), G.shape[0])
    V = V @ sf.Q
    W = W @ sf.Q
    G = V.conj().T @ W
    res = np.linalg.norm(W - V @ G, axis=0)
    s = np.linalg.svd(V, compute_uv=False)
    return ProjectionResult(complex(mu), V, G, np.diag(G).copy(), res, converged, iterations,
                            float(s[0] / s[-1]))


def arnoldi_invariant_subspace(p, mu: complex, k: int, solver: ShiftInvertSolver | None = None,
                               seed: int = 0, tol: float = ARNOLDI_TOL,
                               max_restarts: int = MAX_RESTARTS) -> ProjectionResult:
    """Invariant subspace for the ``k`` largest-modulus eigenvalues of ``E_mu``.

    Parameters
    ----------
    p
        :class:`SparsePencil` or dense :class:`~daepsa.pencil.Pencil`.
    solver
        Shift-invert operator; dense LU by default.
    tol
        Ritz pairs are converged when ``residual < tol * |ritz value|``.

    Returns
    -------
    ProjectionResult
        ``converged`` is False when the restart budget ran out; the partial
        subspace and its honest residuals are still returned.
    """
    n = p.n
    k = int(k)
    if not 1 <= k <= n:
        raise InputError(f"k must be between 1 and n = {n}, got {k}")
    solver = DenseShiftInvert(p, mu) if solver is None else solver
    mu = solver.mu
    m = min(max(3 * k, k + 10), n)
    if m >= n or k == n:
        # the whole space fits: dense ordered Schur
        Emu = np.column_stack([solver.apply(e) for e in np.eye(n, dtype=complex)])
        sf = _order_by_magnitude(la.schur(Emu), k)
        return _finish(solver, sf.Q[:, :k], mu, True, 0)

    V = np.zeros((n, m + 1), dtype=complex)
    H = np.zeros((m + 1, m), dtype=complex)
    V[:, 0] = _start_vector(n, seed)
    j0 = 0
    for it in range(1, max_restarts + 1):
        for j in range(j0, m):
            w = solver.apply(V[:, j])
            w, h = _mgs(V, w, j + 1)
            H[: j + 1, j] = h
            beta = np.linalg.norm(w)
            H[j + 1, j] = beta
            if beta <= 1e-14 * max(1.0, np.abs(h).max()):
                # invariant subspace found; continue with a fresh direction
                r = _start_vector(n, seed + j + 1)
                r, _ = _mgs(V, r, j + 1)
                V[:, j + 1] = r / np.linalg.norm(r)
                H[j + 1, j] = 0.0
            else:
                V[:, j + 1] = w / beta
        sf = _order_by_magnitude(la.schur(H[:m, :m]), k)
        b = H[m, :m] @ sf.Q  # coupling row after rotation
        T = sf.T
        theta = np.diag(T)[:k]
        # Ritz-pair residuals of the leading k x k block
        _, Y = np.linalg.eig(T[:k, :k])
        resid = np.abs(b[:k] @ Y) / np.linalg.norm(Y, axis=0)
        done = (resid <= tol * np.maximum(np.abs(theta[np.argsort(-np.abs(theta))]).min(), 1e-300)).all()
        Vk = V[:, :m] @ sf.Q[:, :k]
        if done:
            return _finish(solver, Vk, mu, True, it)
        vnext = V[:, m].copy()
        V[:] = 0
        H[:] = 0
        V[:, :k] = Vk
        V[:, k] = vnext
        H[:k, :k] = T[:k, :k]
        H[k, :k] = b[:k]
        j0 = k
    logger.warning("Arnoldi did not converge in %d restarts", max_restarts)
    return _finish(solver, V[:, :k], mu, False, max_restarts)


# ----------------------------------------------------------------------------
# interior bounds
# ----------------------------------------------------------------------------

def _check_ritz(pr: ProjectionResult):
    scale = max(np.abs(pr.Ghat).max(), np.finfo(float).tiny)
    small = np.abs(pr.ritz_values) <= 1e-10 * scale
    if small.any():
        raise SingularMatrixError(
            "a zero Ritz value was retained: the subspace reaches into the infinite eigenvalues",
            index=int(np.flatnonzero(small)[0]),
        )


def interior_pseudospectra(pr: ProjectionResult, grid: GridSpec) -> ResolventField:
    """Field of the projected generator; pointwise no larger in resolvent
    norm than the exact DAE field."""
    f = matrix_field(pr.generator(), grid, kind="dae", mu=pr.mu)
    return ResolventField(grid, "dae", f.sigmin, pr.mu, {"projected": pr.k})


def projected_h_norm(pr: ProjectionResult, ipn: InnerProductNorm) -> ProjectionResult:
    """Attach the factor ``S`` of ``R V = Z S`` for ``H``-norm interior bounds."""
    wg = weighted_generator(pr.V, pr.Ghat, pr.mu, ipn)
    return replace(pr, S=wg.S, ipn=ipn)


def projected_growth_bound(pr: ProjectionResult, epsilon: float) -> float:
    """``alpha_eps(projected generator) / eps``: guaranteed transient growth."""
    return pseudospectral_abscissa(pr.generator(), epsilon).value / float(epsilon)


# ----------------------------------------------------------------------------
# saddle-point pencils
# ----------------------------------------------------------------------------

def _sprand(rng, r, c, density):
    return sp.random(r, c, density=density, random_state=rng, data_rvs=rng.standard_normal, format="csr")


def generate_saddle_pencil(n_v: int, n_p: int, seed: int = 0, density: float = 0.2,
                           skew: float = 4.0) -> SparsePencil:
    """Random sparse saddle-point pencil with stable, nonnormal dynamics.

    ``K = -S + W`` with ``S`` symmetric positive definite and ``W`` skew
    (scaled by ``skew``), so the finite eigenvalues lie in the left
    half-plane while ``K`` is far from normal.  ``M`` is symmetric and
    strictly diagonally dominant.  ``B`` is redrawn (up to three times) if it
    is numerically rank deficient.
    """
    n_v, n_p = int(n_v), int(n_p)
    if n_p < 1 or n_v <= 2 * n_p:
        raise InputError(f"need n_p >= 1 and n_v > 2 n_p, got n_v={n_v}, n_p={n_p}")
    if not 0 < density <= 1:
        raise InputError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    Mo = _sprand(rng, n_v, n_v, density)
    Mo = (Mo + Mo.T) / 2
    dom = np.asarray(abs(Mo).sum(axis=1)).ravel()
    M = Mo + sp.diags(dom + 1.0)
    P = _sprand(rng, n_v, n_v, density)
    S = P.T @ P + sp.identity(n_v)
    C = _sprand(rng, n_v, n_v, density)
    K = -S + skew * (C - C.T)
    for attempt in range(4):
        B = _sprand(rng, n_p, n_v, density)
        cols = rng.permutation(n_v)[:n_p]
        B = B + sp.csr_matrix((np.ones(n_p), (np.arange(n_p), cols)), shape=(n_p, n_v))
        s = np.linalg.svd(B.toarray(), compute_uv=False)
        if s[-1] > 1e-8 * s[0]:
            break
    else:
        raise NumericalError(f"could not draw a full-rank constraint block B (seed {seed})")
    Z = sp.csr_matrix((n_p, n_p))
    A = sp.bmat([[K, B.T], [B, Z]], format="csr")
    E = sp.bmat([[M, None], [None, Z]], format="csr")
    return SparsePencil(A, E, (n_v, n_p))
