"""Small reference pencils used by the tests, the CLI and the README.

``jordan_example`` and ``spiral_example`` are 3x3 DAEs with the algebraic
constraint ``x1 + x2 + x3 = 0`` and finite spectra ``{-1, -1}`` (a Jordan
block) and ``{-1 + 5i, -1 - 5i}``.  ``premultipliers`` are two invertible
matrices that change the pencil but not the dynamics.
"""

from __future__ import annotations

import numpy as np

from .pencil import Pencil
from .projection import SparsePencil, generate_saddle_pencil

E3 = np.diag([1.0, 1.0, 0.0])


def jordan_example() -> Pencil:
    A = np.array([[-1.0, -10.0, 0.0], [0.0, -1.0, 0.0], [1.0, 1.0, 1.0]])
    return Pencil(A, E3)


def spiral_example() -> Pencil:
    A = np.array([[-1.0, -25.0, 0.0], [1.0, -1.0, 0.0], [1.0, 1.0, 1.0]])
    return Pencil(A, E3)


def premultipliers() -> tuple:
    T1 = np.array([[1.0, -4.0, 16.0], [0.0, 1.0, -1.0], [0.0, 0.0, 1.0]])
    T2 = np.array([[1.0, -10.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    return T1, T2


#: (n_v, n_p, seed) of the small saddle pencils used in the bound checks
SADDLE_SPECS = ((8, 3, 0), (10, 4, 1), (13, 5, 2))


def saddle_fixtures() -> list:
    return [generate_saddle_pencil(nv, npr, seed=s) for nv, npr, s in SADDLE_SPECS]


def all_fixtures() -> dict:
    """Name -> dense pencil for every reference problem."""
    out = {"jordan": jordan_example(), "spiral": spiral_example()}
    for (nv, npr, s), sp_ in zip(SADDLE_SPECS, saddle_fixtures()):
        out[f"saddle-{nv}-{npr}-s{s}"] = sp_.to_dense()
    return out


def random_regular_pencil(n: int, d: int, seed: int = 0, jordan: int | None = None) -> tuple:
    """Random regular pencil with ``d`` infinite eigenvalues.

    The infinite part is planted as a single nilpotent Jordan block of size
    ``jordan`` (default ``min(d, 2)``) plus 1x1 blocks, and both sides are
    mixed by random well-conditioned matrices.  Returns ``(pencil, finite
    eigenvalues)``.
    """
    rng = np.random.default_rng(seed)
    m = n - d
    lam = rng.uniform(-2, 0.5, m) + 1j * rng.uniform(-2, 2, m)
    Af = np.diag(lam) + np.triu(rng.standard_normal((m, m)), 1) * 0.5
    Ef = np.eye(m)
    Ni = np.zeros((d, d))
    jb = min(d, 2) if jordan is None else min(jordan, d)
    for i in range(jb - 1):
        Ni[i, i + 1] = 1.0
    A0 = np.zeros((n, n), dtype=complex)
    E0 = np.zeros((n, n), dtype=complex)
    A0[:m, :m], E0[:m, :m] = Af, Ef
    A0[m:, m:], E0[m:, m:] = np.eye(d), Ni

    def mixer():
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        U, _, Vh = np.linalg.svd(X)
        return U @ np.diag(rng.uniform(0.5, 2.0, n)) @ Vh

    P, R = mixer(), mixer()
    return Pencil(P @ A0 @ R, P @ E0 @ R), lam


__all__ = [
    "E3", "SparsePencil", "jordan_example", "spiral_example", "premultipliers",
    "saddle_fixtures", "all_fixtures", "random_regular_pencil", "SADDLE_SPECS",
]
