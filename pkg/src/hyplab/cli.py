"""Command-line front end.

Subcommands cover the whole laboratory: radial ball eigenvalues, the
closed-form margin curves, threshold radii, 2-D eigen solves, pointwise
concavity verdicts, fundamental-gap reports, curvature-flow runs and the full
flow-then-verify pipeline.  Data lands in CSV/JSON files, figures as SVG.

Exit codes: 0 success, 2 domain or solver error (the error name goes to
stderr), 64 usage error.  The HYPLAB_OUT environment variable overrides the
output directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import concavity as concavity_mod
from . import eigen2d, horoflow, hypgeom, radial, svgplot
from .domain import StarDomain, domain_from_dict
from .errors import HoroConvexityLost, HyplabError

EXIT_OK = 0
EXIT_MODEL = 2
EXIT_USAGE = 64


@dataclass
class RunConfig:
    shooting_residual: float = 1e-10
    eigen_tol: float = 1e-10
    eigen_residual: float = 1e-8
    psd_tol_factor: float = 1e-2
    h: float = 0.01
    n_theta: int = 256
    delta_mult: float = 5.0
    v_floor: float = 1e-3
    diameter_cap: float = 2.5
    out_dir: str = "."


def load_config(path: str | None) -> RunConfig:
    cfg = RunConfig()
    if path:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for key, val in data.items():
            setattr(cfg, key, type(getattr(cfg, key))(val))
        numeric = [f.name for f in fields(RunConfig) if f.name != "out_dir"]
        if any(getattr(cfg, name) <= 0 for name in numeric):
            raise UsageError("config values must be positive")
    if os.environ.get("HYPLAB_OUT"):
        cfg.out_dir = os.environ["HYPLAB_OUT"]
    return cfg


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EXIT_USAGE)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _load_domain(path: str) -> StarDomain:
    with open(path, encoding="utf-8") as fh:
        return domain_from_dict(json.load(fh))


def _warn_if_not_horo_convex(domain: StarDomain):
    margin = hypgeom.horo_convexity_margin(domain)
    if margin < 0.0:
        print(
            f"warning: domain is not horo-convex (margin {margin:.4g}); "
            "results are exploratory",
            file=sys.stderr,
        )
    return margin


def _out_path(cfg: RunConfig, name: str, override: str | None = None) -> str:
    if override:
        return override
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_ball(args, cfg: RunConfig) -> int:
    res = radial.mu_ball(args.n, args.r, args.l, args.k)
    path = _out_path(cfg, f"ball_n{args.n}_r{args.r:g}_l{args.l}_k{args.k}.csv", args.out)
    _write_csv(path, ["t", "v"], zip(res.t_samples, res.v_samples))
    print(
        f"n={args.n} r={args.r:g} l={args.l} k={args.k} "
        f"mu={res.mu:.12g} residual={res.residual:.3e}"
    )
    print(f"profile written to {path}")
    return EXIT_OK


def cmd_figure1(args, cfg: RunConfig) -> int:
    r_list = [float(s) for s in args.r_list.split(",")] if args.r_list else list(range(1, 10))
    if any(r <= 0 for r in r_list):
        raise UsageError("radii must be positive")
    samples = args.samples
    rows = []
    curves = []
    for r in r_list:
        t = r * (np.arange(samples) + 0.5) / samples
        val = radial.h3_radial_margin_curve(r, t)
        rows.extend(zip([r] * samples, t, val))
        curves.append((t, val, f"r={r:g}"))
    csv_path = _out_path(cfg, "figure1.csv", args.out)
    _write_csv(csv_path, ["r", "t", "value"], rows)
    svg_path = os.path.splitext(csv_path)[0] + ".svg"
    finite = np.concatenate([c[1] for c in curves])
    y_lo = float(np.percentile(finite, 2))
    y_hi = float(np.percentile(finite, 99.5))
    svgplot.line_plot(
        svg_path,
        curves,
        title="Radial concavity margin of the ball ground state",
        xlabel="t",
        ylabel="(log v)'' - (log v)'",
        y_window=(max(y_lo, -8.0), max(y_hi, 0.5)),
    )
    print(f"{len(r_list)} curves, {samples} samples each -> {csv_path}, {svg_path}")
    return EXIT_OK


def cmd_c0(args, cfg: RunConfig) -> int:
    c0 = radial.critical_radius_h3()
    assert 2.0 < c0 < 3.0
    print(f"c0 = {c0:.6f} (bisection tolerance 1e-4, bracket (2, 3))")
    return EXIT_OK


def cmd_r0(args, cfg: RunConfig) -> int:
    r0 = radial.critical_radius(args.n)
    print(f"r0({args.n}) = {r0:.6f} (scan up to 6, bisection tolerance 5e-5)")
    return EXIT_OK


def cmd_eig(args, cfg: RunConfig) -> int:
    domain = _load_domain(args.domain)
    _warn_if_not_horo_convex(domain)
    h = args.h if args.h is not None else cfg.h
    sol = eigen2d.solve_domain(domain, h, k=args.k)
    grid = sol.grid
    header = ["x1", "x2"] + [f"v{j + 1}" for j in range(args.k)]
    rows = zip(grid.x, grid.y, *(sol.eigenvectors[:, j] for j in range(args.k)))
    path = _out_path(cfg, "eig.csv", args.out)
    _write_csv(path, header, rows)
    mus = " ".join(f"mu{j + 1}={sol.mu_values[j]:.10g}" for j in range(args.k))
    print(f"h={h:g} nodes={grid.n_nodes} {mus} residuals={sol.residual_norms}")
    print(f"nodal values written to {path}")
    return EXIT_OK


def cmd_concavity(args, cfg: RunConfig) -> int:
    domain = _load_domain(args.domain)
    _warn_if_not_horo_convex(domain)
    h = args.h if args.h is not None else cfg.h
    sol = eigen2d.solve_domain(domain, h, k=1)
    field = concavity_mod.concavity_field(
        sol, lam=args.lam, delta=args.delta, v_floor=args.v_floor or cfg.v_floor
    )
    bc = concavity_mod.boundary_criterion(domain, args.lam)
    path = _out_path(cfg, "concavity.csv", args.out)
    _write_csv(
        path,
        ["x1", "x2", "w", "H11", "H12", "H22", "min_eig_local"],
        zip(
            field.points[:, 0],
            field.points[:, 1],
            field.w,
            field.h11,
            field.h12,
            field.h22,
            field.min_eig_local,
        ),
    )
    print(
        f"lambda={args.lam:g} min_eig={field.min_eig:.6g} "
        f"tolerance={field.psd_tolerance:.4g} psd={field.numerically_psd} "
        f"boundary_criterion={bc:.6g}"
    )
    print(f"pointwise field written to {path}")
    return EXIT_OK


def cmd_gap(args, cfg: RunConfig) -> int:
    domain = _load_domain(args.domain)
    _warn_if_not_horo_convex(domain)
    h = args.h if args.h is not None else cfg.h
    rep = eigen2d.gap_domain(domain, h)
    report = {
        "mu1": rep.mu1,
        "mu2": rep.mu2,
        "gap": rep.gap,
        "diameter": rep.diameter,
        "reference_scale": rep.reference_scale,
    }
    path = _out_path(cfg, "gap.json", args.out)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    print(
        f"mu1={rep.mu1:.8g} mu2={rep.mu2:.8g} gap={rep.gap:.8g} "
        f"D={rep.diameter:.8g} pi^2/D^2={rep.reference_scale:.8g}"
    )
    print(f"report written to {path}")
    return EXIT_OK


def _write_flow_outputs(run, out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for snap in run.snapshots:
        p = os.path.join(out_dir, f"snapshot_t{snap.t:.4f}.json")
        with open(p, "w", encoding="utf-8") as fh:
            json.dump(snap.domain.to_dict(), fh, indent=2)
            fh.write("\n")
        paths.append(p)
    monitor = os.path.join(out_dir, "monitor.csv")
    _write_csv(
        monitor,
        ["t", "min_rho", "max_rho", "min_kappa_shift", "oscillation"],
        zip(
            run.monitor_t,
            run.monitor_min_rho,
            run.monitor_max_rho,
            run.monitor_min_kappa_shift,
            run.monitor_oscillation,
        ),
    )
    curves = []
    for snap in run.snapshots:
        s = np.tanh(0.5 * snap.state.rho)
        th = np.linspace(0.0, 2.0 * np.pi, len(s), endpoint=False)
        curves.append((s * np.cos(th), s * np.sin(th), f"t={snap.t:g}"))
    if curves:
        svgplot.closed_curve_plot(
            os.path.join(out_dir, "boundaries.svg"),
            curves,
            title="Flow snapshots (disk coordinates)",
        )
    return paths, monitor


def cmd_flow(args, cfg: RunConfig) -> int:
    domain = _load_domain(args.domain)
    snaps = [float(s) for s in args.snapshots.split(",")] if args.snapshots else [args.t_end]
    out_dir = args.out_dir or cfg.out_dir
    try:
        run = horoflow.flow_run(
            domain, args.t_end, snapshot_times=snaps, n_theta=args.n_theta or cfg.n_theta
        )
    except HyplabError as exc:
        partial = getattr(exc, "partial_run", None)
        if partial is not None:
            _write_flow_outputs(partial, out_dir)
            manifest = {
                "status": exc.code,
                "failure_time": getattr(exc, "failure_time", None),
                "message": str(exc),
            }
            with open(os.path.join(out_dir, "MANIFEST.json"), "w", encoding="utf-8") as fh:
                json.dump(manifest, fh, indent=2)
                fh.write("\n")
        raise
    paths, monitor = _write_flow_outputs(run, out_dir)
    print(
        f"flow to t={args.t_end:g}: oscillation {run.monitor_oscillation[0]:.4g} -> "
        f"{run.final_state.oscillation:.4g}, fitted rate {run.fitted_rate:.4g}, "
        f"radius bounds ok: {run.radius_bounds_ok}, min kappa_shift "
        f"{run.min_kappa_shift_seen:.4g}"
    )
    print(f"{len(paths)} snapshots + {monitor} written to {out_dir}")
    return EXIT_OK


def cmd_pipeline(args, cfg: RunConfig) -> int:
    domain = _load_domain(args.domain)
    margin = hypgeom.horo_convexity_margin(domain)
    if margin <= 0.0:
        raise HoroConvexityLost(
            f"pipeline requires a strictly horo-convex domain (margin {margin:.4g})"
        )
    diam = hypgeom.diameter(domain)
    if diam > cfg.diameter_cap:
        raise UsageError(
            f"domain diameter {diam:.3f} exceeds configured cap {cfg.diameter_cap}"
        )
    t_list = [float(s) for s in args.t_list.split(",")] if args.t_list else [0.0, 0.5, 1.0]
    h = args.h if args.h is not None else cfg.h
    run = horoflow.flow_run(
        domain, max(t_list) if max(t_list) > 0 else 1e-3, snapshot_times=t_list,
        n_theta=args.n_theta or cfg.n_theta,
    )
    entries = []
    for snap in run.snapshots:
        entry = {"t": snap.t}
        try:
            sol = eigen2d.solve_domain(snap.domain, h, k=1)
            field = concavity_mod.concavity_field(sol, lam=args.lam)
            entry.update(
                mu1=sol.mu1,
                min_eig=field.min_eig,
                psd=field.numerically_psd,
                psd_tolerance=field.psd_tolerance,
                diameter=hypgeom.diameter(snap.domain),
                boundary_criterion=concavity_mod.boundary_criterion(snap.domain, args.lam),
            )
        except (HyplabError, ValueError) as exc:
            entry["error"] = getattr(exc, "code", str(exc))
        entries.append(entry)
    report = {
        "domain": domain.to_dict(),
        "lambda": args.lam,
        "h": h,
        "snapshots": entries,
    }
    path = _out_path(cfg, "pipeline.json", args.out)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    for e in entries:
        if "error" in e:
            print(f"t={e['t']:g}: FAILED ({e['error']})")
        else:
            print(
                f"t={e['t']:g}: mu1={e['mu1']:.6g} min_eig={e['min_eig']:.4g} "
                f"psd={e['psd']} D={e['diameter']:.4g} "
                f"boundary_criterion={e['boundary_criterion']:.4g}"
            )
    print(f"report written to {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> Parser:
    parser = Parser(
        prog="hyplab",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", help="JSON config file (RunConfig keys)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("ball", help="radial ball eigenvalue; CSV columns: t,v")
    p.add_argument("--n", type=int, required=True, help="ambient dimension (>= 2)")
    p.add_argument("--r", type=float, required=True, help="ball radius")
    p.add_argument("--l", type=int, default=0, help="angular index")
    p.add_argument("--k", type=int, default=1, help="root index (1 = lowest)")
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_ball)

    p = sub.add_parser(
        "figure1",
        help="closed-form margin curves in 3-D; CSV columns: r,t,value (+SVG)",
    )
    p.add_argument("--r-list", help="comma-separated radii (default 1..9)")
    p.add_argument("--samples", type=int, default=400, help="samples per curve")
    p.add_argument("--out", help="CSV output path (SVG lands beside it)")
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("c0", help="critical radius in 3-D via the closed form")
    p.set_defaults(func=cmd_c0)

    p = sub.add_parser("r0", help="super log-concavity radius via shooting")
    p.add_argument("--n", type=int, required=True, help="ambient dimension")
    p.set_defaults(func=cmd_r0)

    p = sub.add_parser("eig", help="2-D eigen solve; CSV columns: x1,x2,v1[,v2]")
    p.add_argument("--domain", required=True, help="domain JSON file")
    p.add_argument("--h", type=float, help="grid spacing")
    p.add_argument("--k", type=int, default=1, choices=(1, 2))
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser(
        "concavity",
        help="pointwise concavity field; CSV columns: x1,x2,w,H11,H12,H22,min_eig_local",
    )
    p.add_argument("--domain", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--delta", type=float, help="boundary margin (hyperbolic length)")
    p.add_argument("--h", type=float)
    p.add_argument("--v-floor", dest="v_floor", type=float)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_concavity)

    p = sub.add_parser("gap", help="fundamental gap report (JSON)")
    p.add_argument("--domain", required=True)
    p.add_argument("--h", type=float)
    p.add_argument("--out", help="JSON output path")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser(
        "flow",
        help="curvature flow run; snapshots as domain JSON + monitor CSV + SVG",
    )
    p.add_argument("--domain", required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--snapshots", help="comma-separated snapshot times")
    p.add_argument("--n-theta", type=int, help="angular samples")
    p.add_argument("--out-dir", help="output directory for this run")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser(
        "pipeline", help="flow, then eigen + concavity verdict per snapshot (JSON)"
    )
    p.add_argument("--domain", required=True)
    p.add_argument("--t-list", help="comma-separated snapshot times")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--h", type=float)
    p.add_argument("--n-theta", type=int)
    p.add_argument("--out", help="JSON output path")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HyplabError as exc:
        print(exc.code, file=sys.stderr)
        if exc.message:
            print(exc.message, file=sys.stderr)
        return EXIT_MODEL
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
