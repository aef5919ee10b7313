"""SVG figures for the CLI reports.

Uses the object-oriented matplotlib API (no pyplot state), a fixed SVG hash
salt and no date metadata, so the same data always gives the same file.
Conventions: eigenvalues as black crosses, pseudospectral boundaries as
coloured polylines labelled by ``log10(eps)``, the numerical range as a
dashed curve.
"""

from __future__ import annotations

import numpy as np
from matplotlib import rcParams
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

FIGSIZE = (5.0, 4.2)
CONTOUR_CMAP = "viridis"
EIG_KWARGS = dict(marker="x", color="black", linestyle="none", markersize=7, mew=1.5)
NR_KWARGS = dict(color="black", linestyle="--", linewidth=1.0)
GRID_KWARGS = dict(linestyle="-", color="black", linewidth=0.4, alpha=0.3)


def _figure(ncols: int = 1, width: float | None = None):
    w = FIGSIZE[0] * ncols if width is None else width
    fig = Figure(figsize=(w, FIGSIZE[1]))
    FigureCanvasSVG(fig)
    axes = [fig.add_subplot(1, ncols, i + 1) for i in range(ncols)]
    return fig, axes


def save_svg(fig, path) -> None:
    with rcParams_context():
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")


class rcParams_context:
    """Pin the SVG id salt while saving."""

    def __enter__(self):
        self._old = rcParams["svg.hashsalt"]
        rcParams["svg.hashsalt"] = "daepsa"

    def __exit__(self, *exc):
        rcParams["svg.hashsalt"] = self._old


def _level_colors(n):
    from matplotlib import colormaps

    cmap = colormaps[CONTOUR_CMAP]
    return [cmap(x) for x in np.linspace(0.05, 0.85, max(n, 1))]


def draw_pseudospectra(ax, contours, eigenvalues=(), nr=None, grid=None, title=None):
    """Contours, eigenvalues and numerical range on one axis."""
    levels = list(contours.levels)
    for lv, c in zip(levels, _level_colors(len(levels))):
        label = f"{np.log10(lv.epsilon):.2g}"
        for k, p in enumerate(lv.polylines):
            ax.plot(p.real, p.imag, color=c, linewidth=1.2, label=label if k == 0 else None)
    if nr is not None:
        poly = nr.polygon()
        ax.plot(poly.real, poly.imag, **NR_KWARGS, label="W")
    lam = np.asarray(eigenvalues, dtype=complex)
    if lam.size:
        ax.plot(lam.real, lam.imag, **EIG_KWARGS)
    if grid is not None:
        ax.set_xlim(grid.re_min, grid.re_max)
        ax.set_ylim(grid.im_min, grid.im_max)
    ax.set_aspect("equal", adjustable="box")
    ax.grid(True, **GRID_KWARGS)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    if title:
        ax.set_title(title, fontsize=10)
    if levels or nr is not None:
        ax.legend(title="log10 eps", fontsize=7, title_fontsize=7, loc="upper right")


def plot_pseudospectra(path, contours, eigenvalues=(), nr=None, grid=None, title=None):
    fig, (ax,) = _figure()
    draw_pseudospectra(ax, contours, eigenvalues, nr, grid, title)
    save_svg(fig, path)


def plot_panels(path, panels):
    """Side-by-side pseudospectra; ``panels`` is a list of keyword dicts."""
    fig, axes = _figure(len(panels))
    for ax, kw in zip(axes, panels):
        draw_pseudospectra(ax, **kw)
    save_svg(fig, path)


def plot_transient(path, times, norms, lower=None, upper=None, title=None):
    """``||e^{tM}||`` on a log axis with optional bound curves.

    ``lower`` maps labels to constants; ``upper`` maps labels to curves.
    """
    fig, (ax,) = _figure()
    ax.semilogy(times, norms, color="black", linewidth=1.8, label="||exp(tM)||")
    for label, val in (lower or {}).items():
        ax.axhline(val, linestyle=":", linewidth=1.0, color="tab:blue", label=label)
    for (label, curve), c in zip((upper or {}).items(), _level_colors(len(upper or {}))):
        curve = np.asarray(curve, dtype=float)
        if np.isfinite(curve).any():
            ax.semilogy(times, np.broadcast_to(curve, np.shape(times)), color=c, linewidth=1.0,
                        linestyle="--", label=label)
    top = max(float(np.max(norms)) * 20, 10.0)
    ax.set_ylim(min(float(np.min(norms)), 1.0) / 2, top)
    ax.set_xlabel("t")
    ax.set_ylabel("growth")
    ax.grid(True, **GRID_KWARGS)
    ax.legend(fontsize=7)
    if title:
        ax.set_title(title, fontsize=10)
    save_svg(fig, path)


def plot_kreiss(path, samples, K=None, eps_star=None, title=None):
    """``alpha_eps / eps`` against ``eps`` with the supremum marked."""
    fig, (ax,) = _figure()
    e = np.array([s[0] for s in samples])
    r = np.array([s[1] for s in samples])
    keep = r > 0
    ax.semilogx(e[keep], r[keep], color="black", marker=".", linewidth=1.2)
    if K is not None and np.isfinite(K):
        ax.axhline(K, linestyle="--", color="tab:red", linewidth=1.0, label=f"K = {K:.4g}")
        if eps_star is not None and np.isfinite(eps_star):
            ax.plot([eps_star], [K], "o", color="tab:red")
        ax.legend(fontsize=8)
    ax.set_xlabel("eps")
    ax.set_ylabel("alpha_eps / eps")
    ax.grid(True, **GRID_KWARGS)
    if title:
        ax.set_title(title, fontsize=10)
    save_svg(fig, path)


def plot_power(path, power_curve, title=None):
    fig, (ax,) = _figure()
    k = np.arange(len(power_curve))
    ax.semilogy(k, np.maximum(power_curve, 1e-300), color="black", marker=".", linewidth=1.0)
    ax.set_xlabel("k")
    ax.set_ylabel("||M^k||")
    ax.grid(True, **GRID_KWARGS)
    if title:
        ax.set_title(title, fontsize=10)
    save_svg(fig, path)
