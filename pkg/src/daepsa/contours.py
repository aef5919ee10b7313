"""Level curves of a sampled field by marching squares.

The field is sampled on a rectilinear lattice ``f[i, j] = f(x_i, y_j)``.
Crossings are placed on cell edges by linear interpolation, and the two
ambiguous saddle configurations are resolved with the average of the four
corner values.  Segments are joined through the lattice edge they share, so
the joining is exact and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class ContourLevel:
    """Polylines of one level; vertices are complex numbers ``x + iy``.

    A closed polyline repeats its first vertex at the end.
    """

    epsilon: float
    polylines: tuple = ()
    closed: tuple = ()

    @property
    def length(self) -> float:
        return float(sum(np.abs(np.diff(p)).sum() for p in self.polylines))

    @property
    def all_closed(self) -> bool:
        return bool(self.polylines) and all(self.closed)

    def contains(self, points) -> np.ndarray:
        """Even-odd test against all closed polylines of this level."""
        pts = np.asarray(points, dtype=complex).ravel()
        inside = np.zeros(pts.shape, dtype=bool)
        for poly, cl in zip(self.polylines, self.closed):
            if cl:
                inside ^= points_in_polygon(pts, poly)
        return inside


@dataclass(frozen=True)
class ContourSet:
    """Contours of a field at several levels, with the lattice spacing."""

    levels: tuple = ()
    spacing: tuple = (0.0, 0.0)
    meta: dict = field(default_factory=dict)

    @property
    def epsilons(self) -> list:
        return [lv.epsilon for lv in self.levels]

    @property
    def lengths(self) -> list:
        return [lv.length for lv in self.levels]

    def level(self, epsilon: float) -> ContourLevel:
        for lv in self.levels:
            if lv.epsilon == epsilon:
                return lv
        raise KeyError(epsilon)


def points_in_polygon(points, poly) -> np.ndarray:
    """Vectorised even-odd ray casting; ``poly`` is a closed complex polyline."""
    pts = np.asarray(points, dtype=complex).ravel()
    poly = np.asarray(poly, dtype=complex)
    x, y = pts.real[:, None], pts.imag[:, None]
    x0, y0 = poly.real[:-1][None, :], poly.imag[:-1][None, :]
    x1, y1 = poly.real[1:][None, :], poly.imag[1:][None, :]
    straddle = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    hits = straddle & (x < xc)
    return (hits.sum(axis=1) % 2).astype(bool)


def _segments(f: np.ndarray, level: float):
    """Segments of one level as pairs of lattice-edge keys."""
    inside = f < level
    a = inside[:-1, :-1]  # corner 0: (i, j)
    b = inside[1:, :-1]  # corner 1: (i+1, j)
    c = inside[1:, 1:]  # corner 2: (i+1, j+1)
    d = inside[:-1, 1:]  # corner 3: (i, j+1)
    case = a * 1 + b * 2 + c * 4 + d * 8
    segs = []
    for i, j in zip(*np.nonzero((case != 0) & (case != 15))):
        k = case[i, j]
        # edges: 0 bottom, 1 right, 2 top, 3 left
        keys = (("h", i, j), ("v", i + 1, j), ("h", i, j + 1), ("v", i, j))
        corners = (bool(a[i, j]), bool(b[i, j]), bool(c[i, j]), bool(d[i, j]))
        if k in (5, 10):
            centre = (f[i, j] + f[i + 1, j] + f[i + 1, j + 1] + f[i, j + 1]) / 4 < level
            cut = [q for q in range(4) if corners[q] != centre]
            for q in cut:
                segs.append((keys[(q - 1) % 4], keys[q]))
        else:
            crossed = [e for e in range(4) if corners[e] != corners[(e + 1) % 4]]
            segs.append((keys[crossed[0]], keys[crossed[1]]))
    return segs


def _edge_point(key, f, xs, ys, level) -> complex:
    kind, i, j = key
    if kind == "h":
        f0, f1 = f[i, j], f[i + 1, j]
        t = (level - f0) / (f1 - f0)
        return complex(xs[i] + t * (xs[i + 1] - xs[i]), ys[j])
    f0, f1 = f[i, j], f[i, j + 1]
    t = (level - f0) / (f1 - f0)
    return complex(xs[i], ys[j] + t * (ys[j + 1] - ys[j]))


def _join(segs):
    adj: dict = {}
    for s, (p, q) in enumerate(segs):
        adj.setdefault(p, []).append(s)
        adj.setdefault(q, []).append(s)
    used = np.zeros(len(segs), dtype=bool)
    chains = []

    def walk(start_key, s):
        keys = [start_key]
        cur = start_key
        while s is not None:
            used[s] = True
            p, q = segs[s]
            cur = q if p == cur else p
            keys.append(cur)
            s = next((t for t in adj[cur] if not used[t]), None)
        return keys

    # open chains start at lattice edges touched only once (window boundary)
    for key in sorted(k for k, v in adj.items() if len(v) == 1):
        s = adj[key][0]
        if not used[s]:
            chains.append((walk(key, s), False))
    for s in range(len(segs)):
        if not used[s]:
            start = min(segs[s])
            keys = walk(start, s)
            chains.append((keys, keys[0] == keys[-1]))
    return chains


def contour_level(f, xs, ys, level: float) -> ContourLevel:
    """Marching-squares polylines of ``f == level``."""
    f = np.asarray(f, dtype=float)
    if not np.isfinite(f).all():
        raise InputError("field contains non-finite values")
    level = float(level)
    if not level > 0:
        raise InputError(f"contour levels must be positive, got {level}")
    polys, closed = [], []
    for keys, cl in _join(_segments(f, level)):
        pts = np.array([_edge_point(k, f, xs, ys, level) for k in keys])
        polys.append(pts)
        closed.append(bool(cl))
    return ContourLevel(level, tuple(polys), tuple(closed))


def extract_contours(field, epsilons) -> ContourSet:
    """Contours of a resolvent field at each ``epsilon`` (sorted descending).

    Levels above the largest sampled value, or below the smallest, give an
    empty polyline list.
    """
    eps = [float(e) for e in epsilons]
    if any(not e > 0 for e in eps):
        raise InputError("epsilon levels must be positive")
    xs, ys = field.grid.xs, field.grid.ys
    levels = tuple(contour_level(field.sigmin, xs, ys, e) for e in sorted(eps, reverse=True))
    spacing = (float(xs[1] - xs[0]), float(ys[1] - ys[0]))
    return ContourSet(levels, spacing, {"kind": field.kind})
