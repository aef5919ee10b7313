"""Command-line interface.

Every subcommand reads a pencil from Matrix Market files, runs one group of
computations and writes ``<out>/<command>.json`` plus, depending on
``--format``, a CSV table and an SVG figure.  Exit codes: 0 success, 2 bad
input, 3 numerical failure (an ``error.json`` document is written too).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import mmio, plotting
from .contours import extract_contours
from .errors import DaepsaError, InputError, NumericalError
from .pencil import (
    FiniteDecomposition, Pencil, consistency_residual, decompose, finite_eigenvalues,
    select_shift, solution_at,
)
from .projection import (
    SparsePencil, arnoldi_invariant_subspace, generate_saddle_pencil, interior_pseudospectra,
    projected_growth_bound, projected_h_norm,
)
from .pseudospectra import (
    GridSpec, check_inclusion, field_discrepancy, legacy_grid, matrix_field, numerical_range,
    pseudospectra_grid,
)
from .serialization import RunConfig, field_rows, parse_floats, write_csv, write_json
from .transient import (
    discrete_report, exp_norm_curve, kreiss_constant, numerical_abscissa,
    pseudospectral_abscissa, spectral_abscissa, transient_report,
)
from .weighted import InnerProductNorm, h_pseudospectra_schur

logger = logging.getLogger("daepsa")

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3
DEFAULT_EPS = (1.0, 0.1, 0.01)


# ----------------------------------------------------------------------------
# problem setup
# ----------------------------------------------------------------------------

@dataclass
class Problem:
    pencil: Pencil
    fd: FiniteDecomposition
    M: np.ndarray
    eigenvalues: np.ndarray
    ipn: InnerProductNorm | None

    @property
    def target(self):
        """What the transient functions should analyse."""
        return self.fd if self.ipn is None else self.M


def load_pencil(cfg: RunConfig) -> Pencil:
    if cfg.A is None or cfg.E is None:
        raise InputError("--A and --E are required")
    return Pencil(mmio.read_matrix(cfg.A), mmio.read_matrix(cfg.E))


def load_problem(cfg: RunConfig) -> Problem:
    p = load_pencil(cfg)
    mu = cfg.mu_value if cfg.mu_value is not None else select_shift(p)
    fd = decompose(p, mu, cfg.d)
    for w in fd.warnings:
        logger.warning(w)
    ipn = None
    M = np.asarray(fd.generator)
    if cfg.H is not None:
        ipn = InnerProductNorm.from_gram(mmio.read_matrix(cfg.H))
        M = h_pseudospectra_schur(fd, ipn).matrix
    return Problem(p, fd, M, finite_eigenvalues(fd), ipn)


def auto_grid(M, eps, n=101) -> GridSpec:
    """Window holding the numerical range grown by the largest ``eps``."""
    nr = numerical_range(M)
    pts = nr.points
    span = max(np.ptp(pts.real), np.ptp(pts.imag), 1e-3)
    margin = max(1.05 * max(eps, default=0.0), 0.1 * span)
    return GridSpec.around(pts, margin, n)


def _common_summary(pb: Problem) -> dict:
    return {
        "mu": pb.fd.mu,
        "n": pb.fd.n,
        "d": pb.fd.d,
        "index": pb.fd.index,
        "norm": "2" if pb.ipn is None else "H",
    }


class Outputs:
    """Collects the artefacts of one subcommand and writes the selected ones."""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg, self.command = cfg, command
        os.makedirs(cfg.out, exist_ok=True)
        self.written = []

    def path(self, suffix: str, ext: str) -> str:
        name = self.command + (f"_{suffix}" if suffix else "") + "." + ext
        return os.path.join(self.cfg.out, name)

    def json(self, obj):
        if "json" in self.cfg.formats:
            obj = {"command": self.command, "version": __version__, "config": self.cfg.to_dict(), **obj}
            p = self.path("", "json")
            write_json(p, obj)
            self.written.append(p)

    def csv(self, header, rows, suffix: str = ""):
        if "csv" in self.cfg.formats:
            p = self.path(suffix, "csv")
            write_csv(p, header, rows)
            self.written.append(p)

    def svg(self, painter, *args, suffix: str = "", **kw):
        if "svg" in self.cfg.formats:
            p = self.path(suffix, "svg")
            painter(p, *args, **kw)
            self.written.append(p)


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------

def cmd_decompose(cfg, out):
    pb = load_problem(cfg)
    fd = pb.fd
    out.json({
        **_common_summary(pb),
        "finite_eigenvalues": sorted(pb.eigenvalues.tolist(), key=lambda z: (z.real, z.imag)),
        "infinite_eigenvalues": fd.d,
        "residuals": {
            "reconstruction": fd.reconstruction_residual(),
            "unitarity": fd.unitarity_residual(),
        },
        "warnings": list(fd.warnings),
    })
    out.csv(["re", "im"], [(z.real, z.imag) for z in pb.eigenvalues])


def _field(pb: Problem, grid: GridSpec):
    if pb.ipn is None:
        return pseudospectra_grid(pb.fd, grid)
    return matrix_field(pb.M, grid, mu=pb.fd.mu)


def cmd_grid(cfg, out):
    pb = load_problem(cfg)
    eps = cfg.eps or DEFAULT_EPS
    grid = cfg.grid_spec or auto_grid(pb.M, eps)
    f = _field(pb, grid)
    nr = numerical_range(pb.M)
    out.json({
        **_common_summary(pb),
        "grid": grid.as_text(),
        "sigmin_min": float(f.sigmin.min()),
        "sigmin_max": float(f.sigmin.max()),
        "eigenvalue_points": int((f.sigmin == 0).sum()),
        "inclusion_violations": {str(e): check_inclusion(pb.fd, f, e, nr) for e in eps},
    })
    out.csv(["re", "im", "sigmin"], field_rows(f))
    out.svg(plotting.plot_pseudospectra, extract_contours(f, eps), pb.eigenvalues, nr, grid)


def cmd_contours(cfg, out):
    pb = load_problem(cfg)
    eps = cfg.eps or DEFAULT_EPS
    grid = cfg.grid_spec or auto_grid(pb.M, eps, 201)
    f = _field(pb, grid)
    cs = extract_contours(f, eps)
    out.json({
        **_common_summary(pb),
        "grid": grid.as_text(),
        "levels": [{
            "epsilon": lv.epsilon,
            "polylines": len(lv.polylines),
            "closed": list(lv.closed),
            "length": lv.length,
        } for lv in cs.levels],
    })
    rows = []
    for lv in cs.levels:
        for k, p in enumerate(lv.polylines):
            rows += [(lv.epsilon, k, z.real, z.imag) for z in p]
    out.csv(["epsilon", "polyline", "re", "im"], rows)
    out.csv(["re", "im", "sigmin"], field_rows(f), suffix="field")
    out.svg(plotting.plot_pseudospectra, cs, pb.eigenvalues, numerical_range(pb.M), grid)


def cmd_nr(cfg, out):
    pb = load_problem(cfg)
    nr = numerical_range(pb.M)
    out.json({
        **_common_summary(pb),
        "omega": nr.omega,
        "boundary_max_re": float(nr.points.real.max()),
        "convex": nr.is_convex(),
        "n_theta": int(nr.theta.size),
    })
    out.csv(["theta", "re", "im", "support"],
            [(t, z.real, z.imag, s) for t, z, s in zip(nr.theta, nr.points, nr.support)])
    from .contours import ContourSet

    out.svg(plotting.plot_pseudospectra, ContourSet(), pb.eigenvalues, nr)


def cmd_abscissa(cfg, out):
    pb = load_problem(cfg)
    eps = cfg.eps or DEFAULT_EPS
    rows = []
    table = []
    for e in eps:
        r = pseudospectral_abscissa(pb.M, e)
        table.append({"epsilon": e, "alpha_eps": r.value, "ratio": r.value / e, "z": r.z,
                      "method": r.method, "flagged": r.flagged})
        rows.append((e, r.value, r.value / e))
    out.json({
        **_common_summary(pb),
        "alpha": spectral_abscissa(pb.target),
        "omega": numerical_abscissa(pb.M),
        "alpha_eps": table,
    })
    out.csv(["epsilon", "alpha_eps", "ratio"], rows)


def cmd_kreiss(cfg, out):
    pb = load_problem(cfg)
    K = kreiss_constant(pb.target)
    out.json({**_common_summary(pb), "kreiss": K.K, "eps_star": K.eps_star,
              "alpha": spectral_abscissa(pb.target)})
    out.csv(["epsilon", "ratio"], K.samples)
    out.svg(plotting.plot_kreiss, K.samples, K.K, K.eps_star)


def cmd_bounds(cfg, out):
    pb = load_problem(cfg)
    eps = cfg.eps or tuple(np.logspace(-6, 0, 13))
    grid = cfg.grid_spec or auto_grid(pb.M, eps, 201)
    f = _field(pb, grid)
    cs = extract_contours(f, eps)
    rep = transient_report(pb.target, eps, cfg.times, f, cs)
    up = rep.upper
    out.json({
        **_common_summary(pb),
        "omega": rep.omega,
        "alpha": rep.alpha,
        "kreiss": rep.kreiss.K,
        "eps_star": rep.kreiss.eps_star,
        "peak": rep.curve.peak,
        "t_peak": rep.curve.t_peak,
        "alpha_eps": [{"epsilon": e, "alpha_eps": a, "ratio": a / e} for e, a in rep.alpha_eps],
        "upper_bounds": {
            "coppell_at_peak": float(np.exp(rep.curve.t_peak * rep.omega)),
            "eigenvector_kappa": up.kappa,
            "kreiss": up.kreiss,
            "contour_lengths": {str(e): L for e, L in up.contour_lengths.items()},
            "refused": {str(k): v for k, v in up.refused.items()},
        },
        "sandwich_violations": rep.sandwich_violations(),
    })
    header = ["t", "exp_norm", "coppell", "eigenvector", "kreiss"] + [f"contour_{e:.3g}" for e in up.contour]
    cols = [rep.curve.times, rep.curve.norms, up.coppell, up.eigenvector,
            np.full(up.times.shape, up.kreiss)] + list(up.contour.values())
    out.csv(header, zip(*cols))
    lower = {f"alpha_eps/eps, eps={e:.2g}": a / e for e, a in rep.alpha_eps if a > 0}
    upper = {"Coppell": up.coppell, "e(n-d)K": np.full(up.times.shape, up.kreiss)}
    upper.update({f"contour eps={e:.2g}": c for e, c in up.contour.items()})
    out.svg(plotting.plot_transient, rep.curve.times, rep.curve.norms, lower, upper)
    out.svg(plotting.plot_kreiss, rep.kreiss.samples, rep.kreiss.K, rep.kreiss.eps_star, suffix="kreiss")


def cmd_transient(cfg, out):
    pb = load_problem(cfg)
    curve = exp_norm_curve(pb.target, cfg.times)
    doc = {**_common_summary(pb), "peak": curve.peak, "t_peak": curve.t_peak,
           "omega": numerical_abscissa(pb.M)}
    if pb.ipn is None:
        x0 = curve.x0_worst
        xt = solution_at(pb.fd, x0, curve.t_peak)
        doc["worst_initial_condition"] = x0
        doc["replayed_growth"] = float(np.linalg.norm(xt) / np.linalg.norm(x0))
        doc["consistency_residual"] = consistency_residual(pb.fd, x0)
    out.json(doc)
    out.csv(["t", "exp_norm"], zip(curve.times, curve.norms))
    out.svg(plotting.plot_transient, curve.times, curve.norms)


def cmd_discrete(cfg, out):
    pb = load_problem(cfg)
    eps = cfg.eps or DEFAULT_EPS
    kmax = cfg.k if cfg.k is not None else 50
    rep = discrete_report(pb.target, eps, kmax)
    out.json({
        **_common_summary(pb),
        "spectral_radius": rep.spectral_radius,
        "rho_eps": [{"epsilon": e, "rho_eps": r} for e, r in rep.rho_eps],
        "kreiss_extension": rep.kreiss_extension,
        "max_power_norm": float(rep.power_curve.max()),
    })
    out.csv(["k", "power_norm"], enumerate(rep.power_curve))
    out.svg(plotting.plot_power, rep.power_curve)


def cmd_compare(cfg, out, T_paths):
    if not T_paths:
        raise InputError("compare needs at least one --T matrix")
    pb = load_problem(cfg)
    eps = cfg.eps or (0.1, 0.01, 0.001)
    grid = cfg.grid_spec or GridSpec(-3, 1, -2, 2, 101, 101)
    base_dae = _field(pb, grid)
    base_gen = legacy_grid(pb.pencil, grid, "gen1")
    panels = [dict(contours=extract_contours(base_gen, eps), eigenvalues=pb.eigenvalues, grid=grid,
                   title="(A, E)")]
    results, gens = [], [base_gen]
    for k, tp in enumerate(T_paths):
        T = mmio.read_matrix(tp)
        q = pb.pencil.premultiply(T)
        fq = decompose(q, cfg.mu_value if cfg.mu_value is not None else select_shift(q), cfg.d)
        dae = pseudospectra_grid(fq, grid)
        gen = legacy_grid(q, grid, "gen1")
        gens.append(gen)
        results.append({
            "T": tp,
            "dae_max_relative_difference": field_discrepancy(base_dae, dae),
            "gen1_max_ratio": sigmin_ratio(base_gen, gen),
            "gen1_abscissa": {str(e): _grid_abscissa(gen, e) for e in eps},
        })
        panels.append(dict(contours=extract_contours(gen, eps), eigenvalues=pb.eigenvalues, grid=grid,
                           title=f"T{k + 1} (A, E)"))
        out.csv(["re", "im", "sigmin"], field_rows(gen), suffix=f"gen1_T{k + 1}")
    out.json({**_common_summary(pb), "grid": grid.as_text(),
              "gen1_abscissa": {str(e): _grid_abscissa(base_gen, e) for e in eps},
              "gen1_pairwise_max_ratio": max(sigmin_ratio(f, g) for i, f in enumerate(gens)
                                             for g in gens[i + 1:]),
              "comparisons": results})
    out.csv(["re", "im", "sigmin"], field_rows(base_gen), suffix="gen1")
    out.csv(["re", "im", "sigmin"], field_rows(base_dae), suffix="dae")
    out.svg(plotting.plot_panels, panels)


def sigmin_ratio(f, g) -> float:
    """Largest ``max(a/b, b/a)`` over grid points where both fields are nonzero."""
    a, b = f.sigmin, g.sigmin
    ok = (a > 0) & (b > 0)
    if not ok.any():
        return 1.0
    return float(np.maximum(a[ok] / b[ok], b[ok] / a[ok]).max())


def _grid_abscissa(f, e) -> float | None:
    inside = f.sublevel(e)
    return float(f.grid.points[inside].real.max()) if inside.any() else None


def cmd_project(cfg, out):
    if cfg.k is None:
        raise InputError("project needs --k")
    if cfg.A is None or cfg.E is None:
        raise InputError("--A and --E are required")
    sp_ = SparsePencil(mmio.read_matrix(cfg.A, sparse=True), mmio.read_matrix(cfg.E, sparse=True))
    dense = sp_.to_dense() if sp_.n <= 200 else None
    mu = cfg.mu_value
    if mu is None:
        mu = select_shift(dense if dense is not None else sp_.to_dense())
    pr = arnoldi_invariant_subspace(sp_, mu, cfg.k, seed=cfg.seed)
    if cfg.H is not None:
        pr = projected_h_norm(pr, InnerProductNorm.from_gram(mmio.read_matrix(cfg.H)))
    eps = cfg.eps or (0.1,)
    Mhat = pr.generator()
    grid = cfg.grid_spec or auto_grid(Mhat, eps, 41)
    fp = interior_pseudospectra(pr, grid)
    doc = {
        "mu": pr.mu, "n": sp_.n, "k": pr.k, "converged": pr.converged, "iterations": pr.iterations,
        "ritz_values": pr.ritz_values, "residuals": pr.residuals, "basis_condition": pr.basis_condition,
        "projected_eigenvalues": 1.0 / pr.ritz_values + pr.mu,
        "projected_growth_bound": {str(e): projected_growth_bound(pr, e) for e in eps},
        "grid": grid.as_text(),
    }
    if dense is not None:
        fd = decompose(dense, pr.mu, cfg.d)
        if cfg.H is not None:
            fe = matrix_field(h_pseudospectra_schur(fd, pr.ipn).matrix, grid)
            Mx = h_pseudospectra_schur(fd, pr.ipn).matrix
        else:
            fe = pseudospectra_grid(fd, grid)
            Mx = fd
        excess = fp.resolvent_norm - fe.resolvent_norm
        doc["exact"] = {
            "d": fd.d,
            "max_resolvent_excess": float(np.nanmax(np.where(np.isinf(excess), np.nan, excess))),
            "growth_bound": {str(e): pseudospectral_abscissa(Mx, e).value / e for e in eps},
        }
    out.json(doc)
    out.csv(["re", "im", "sigmin"], field_rows(fp))
    out.svg(plotting.plot_pseudospectra, extract_contours(fp, eps), 1.0 / pr.ritz_values + pr.mu, None, grid)


def cmd_gen_saddle(cfg, out, nv, npr, density):
    sp_ = generate_saddle_pencil(nv, npr, seed=cfg.seed, density=density)
    pa = os.path.join(cfg.out, "A.mtx")
    pe = os.path.join(cfg.out, "E.mtx")
    mmio.write_matrix(pa, sp_.A, "coordinate", comment=f"saddle pencil n_v={nv} n_p={npr} seed={cfg.seed}")
    mmio.write_matrix(pe, sp_.E, "coordinate", comment=f"saddle pencil n_v={nv} n_p={npr} seed={cfg.seed}")
    out.json({"n_v": nv, "n_p": npr, "n": sp_.n, "seed": cfg.seed, "density": density,
              "nnz_A": int(sp_.A.nnz), "nnz_E": int(sp_.E.nnz), "files": [pa, pe]})


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--A", help="Matrix Market file for A")
    p.add_argument("--E", help="Matrix Market file for E")
    p.add_argument("--H", help="Hermitian positive definite Gram matrix of the norm")
    p.add_argument("--mu", help="shift: 'auto' or RE[,IM] (write --mu=-1,0 for negative values)")
    p.add_argument("--d", type=int, help="known number of infinite eigenvalues")
    p.add_argument("--grid", help="re0,re1,im0,im1,nx,ny (write --grid=-3,1,... for negative values)")
    p.add_argument("--eps", help="comma-separated epsilon levels")
    p.add_argument("--tmax", type=float, help="final time of the growth curve")
    p.add_argument("--nt", type=int, help="number of time samples")
    p.add_argument("--k", type=int, help="subspace dimension (project) or steps (discrete)")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", help="comma-separated subset of csv,json,svg")
    p.add_argument("-v", "--verbose", action="store_true")


COMMANDS = {
    "decompose": (cmd_decompose, "finite/infinite split and finite eigenvalues"),
    "grid": (cmd_grid, "resolvent field on a grid"),
    "contours": (cmd_contours, "pseudospectral boundaries and their lengths"),
    "nr": (cmd_nr, "numerical range boundary and numerical abscissa"),
    "abscissa": (cmd_abscissa, "pseudospectral abscissae by criss-cross"),
    "kreiss": (cmd_kreiss, "Kreiss constant"),
    "bounds": (cmd_bounds, "lower and upper transient growth bounds"),
    "transient": (cmd_transient, "norm of the solution operator over time"),
    "discrete": (cmd_discrete, "power norms and pseudospectral radii"),
    "compare": (cmd_compare, "premultiplication invariance versus the gen1 definition"),
    "project": (cmd_project, "Arnoldi projection and interior bounds"),
    "gen-saddle": (cmd_gen_saddle, "write a random saddle-point pencil"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="daepsa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "compare":
            p.add_argument("--T", action="append", default=[], help="premultiplier matrix file (repeatable)")
        if name == "gen-saddle":
            p.add_argument("--nv", type=int, required=True, help="velocity block size")
            p.add_argument("--np", type=int, required=True, help="pressure block size")
            p.add_argument("--density", type=float, default=0.2)
    return parser


def config_from_args(args) -> RunConfig:
    base = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = RunConfig.from_json(fh.read()).to_dict()
        except OSError as exc:
            raise InputError(f"cannot read configuration: {exc}") from None
    over = {
        "A": args.A, "E": args.E, "H": args.H, "mu": args.mu, "d": args.d, "grid": args.grid,
        "tmax": args.tmax, "nt": args.nt, "k": args.k, "seed": args.seed, "out": args.out,
    }
    base.update({k: v for k, v in over.items() if v is not None})
    if args.eps is not None:
        base["eps"] = parse_floats(args.eps)
    if args.format is not None:
        base["formats"] = tuple(s.strip() for s in args.format.split(",") if s.strip())
    return RunConfig.from_dict(base)


def _error_doc(cfg_out, exc, code):
    doc = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    for attr in ("index", "condition", "line", "residual", "norm", "conditions"):
        v = getattr(exc, attr, None)
        if v is not None:
            doc["error"][attr] = {str(k): c for k, c in v.items()} if isinstance(v, dict) else v
    try:
        os.makedirs(cfg_out, exist_ok=True)
        write_json(os.path.join(cfg_out, "error.json"), doc)
    except OSError:
        pass
    print(f"daepsa: error: {exc}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    out_dir = args.out or "."
    try:
        cfg = config_from_args(args)
        out_dir = cfg.out
        outputs = Outputs(cfg, args.command)
        fn = COMMANDS[args.command][0]
        if args.command == "compare":
            fn(cfg, outputs, args.T)
        elif args.command == "gen-saddle":
            fn(cfg, outputs, args.nv, args.np, args.density)
        else:
            fn(cfg, outputs)
    except InputError as exc:
        _error_doc(out_dir, exc, EXIT_INPUT)
        return EXIT_INPUT
    except NumericalError as exc:
        _error_doc(out_dir, exc, EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    except OSError as exc:
        _error_doc(out_dir, exc, EXIT_INPUT)
        return EXIT_INPUT
    for p in outputs.written:
        logger.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
