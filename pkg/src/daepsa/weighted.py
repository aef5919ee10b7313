"""Pseudospectra in a norm induced by a Hermitian positive definite ``H``.

With ``H = R* R`` (``R`` the upper Cholesky factor) the ``H``-norm of a
vector is ``||R x||`` and of a matrix ``||R M R^{-1}||``.  Two equivalent
routes give the weighted DAE pseudospectrum:

* transform the pencil to ``(A R^{-1}, E R^{-1})`` and use 2-norm machinery;
* keep the 2-norm decomposition, factor ``R Q = Z S`` and use the generator
  ``S G^{-1} S^{-1} + mu I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import InputError
from .pencil import FiniteDecomposition, Pencil


@dataclass(frozen=True, eq=False)
class InnerProductNorm:
    """Gram matrix ``H`` and its upper Cholesky factor ``R``."""

    H: np.ndarray
    R: np.ndarray

    @classmethod
    def from_gram(cls, H, tol: la.Tolerances = la.DEFAULT_TOL) -> "InnerProductNorm":
        H = la.as_matrix(H, "H", square=True)
        R = la.cholesky(H, tol)
        H.flags.writeable = False
        R.flags.writeable = False
        return cls(H, R)

    @classmethod
    def identity(cls, n: int) -> "InnerProductNorm":
        return cls.from_gram(np.eye(n))

    @property
    def n(self) -> int:
        return self.H.shape[0]

    def factor_residual(self) -> float:
        R = self.R
        return float(np.linalg.norm(R.conj().T @ R - self.H) / np.linalg.norm(self.H))


def _check_dim(ipn: InnerProductNorm, n: int):
    if ipn.n != n:
        raise InputError(f"H has dimension {ipn.n}, expected {n}")


def h_vector_norm(x, ipn: InnerProductNorm) -> float:
    """``||x||_H = ||R x||_2``."""
    x = np.asarray(x, dtype=complex)
    _check_dim(ipn, x.shape[0])
    return float(np.linalg.norm(ipn.R @ x))


def h_matrix_norm(M, ipn: InnerProductNorm) -> float:
    """``||M||_H = ||R M R^{-1}||_2``."""
    M = la.as_matrix(M, "M", square=True)
    _check_dim(ipn, M.shape[0])
    RM = ipn.R @ M
    # R M R^{-1} = (R^{-*} (R M)^*)^*
    X = la.triangular_solve(ipn.R.conj().T, RM.conj().T, lower=True).conj().T
    return float(np.linalg.norm(X, 2))


def h_pseudospectra_transform(p: Pencil, ipn: InnerProductNorm) -> Pencil:
    """The pencil ``(A R^{-1}, E R^{-1})`` whose 2-norm pseudospectra are the
    ``H``-norm pseudospectra of ``(A, E)``."""
    _check_dim(ipn, p.n)
    Rinv = la.invert_triangular(ipn.R)
    return Pencil(p.A @ Rinv, p.E @ Rinv)


@dataclass(frozen=True, eq=False)
class WeightedGenerator:
    """``S G^{-1} S^{-1} + mu I`` with the QR factors of ``R Q``."""

    matrix: np.ndarray
    S: np.ndarray
    Z: np.ndarray
    mu: complex


def weighted_generator(Q, G, mu, ipn: InnerProductNorm, tol: la.Tolerances = la.DEFAULT_TOL) -> WeightedGenerator:
    """Shared kernel for decompositions and projections."""
    Q = np.asarray(Q, dtype=complex)
    _check_dim(ipn, Q.shape[0])
    Z, S = la.qr_economy(ipn.R @ Q, tol)
    Ginv = la.invert_triangular(G) if la.is_upper_triangular(G) else np.linalg.inv(G)
    SG = S @ Ginv
    # S G^{-1} S^{-1} = (S^{-*} (S G^{-1})^*)^*
    X = la.triangular_solve(S.conj().T, SG.conj().T, lower=True).conj().T
    return WeightedGenerator(X + mu * np.eye(X.shape[0]), S, Z, complex(mu))


def h_pseudospectra_schur(fd: FiniteDecomposition, ipn: InnerProductNorm) -> WeightedGenerator:
    """Weighted generator from a 2-norm decomposition (no refactorisation)."""
    return weighted_generator(fd.Q, fd.G, fd.mu, ipn)
