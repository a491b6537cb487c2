"""Command-line front end: ``sphexit <subcommand> [options]``.

Every report starts with the full effective configuration: a ``# config:``
comment line in CSV mode, the ``config`` member in JSON mode.  Feeding a
report back through ``sphexit --replay REPORT`` reproduces it byte for byte.

Exit status: 0 success, 2 invalid input, 3 accuracy failure, 4 simulation
nonconvergence.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

from . import concentration, exit_solver, io, stochastic
from .errors import AccuracyError, DomainError, NonConvergenceError, SphexitError
from .geometry import (HALF_PI, NEGATIVE_INFINITY, TOLERANCE_PROFILES, BallGeometry,
                       KernelAccuracy, TubeGeometry, solve_riccati)

EXIT_OK, EXIT_INVALID, EXIT_ACCURACY, EXIT_NONCONVERGENCE = 0, 2, 3, 4
# options that choose where or how fast a report is produced, never what it contains
_UNLOGGED = ("output_path", "workers", "replay")


class UsageError(DomainError):
    pass


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _k0(text):
    if text in (NEGATIVE_INFINITY, "-inf"):
        return NEGATIVE_INFINITY
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or {NEGATIVE_INFINITY!r}, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="sphexit",
        description="Exit times, exit moments, bounds and volume concentration for equatorial "
                    "tubes and polar balls of the unit sphere S^n.  All angles are in radians.",
        epilog="Exit status: 0 ok, 2 invalid input, 3 accuracy failure, 4 simulation nonconvergence. "
               "Environment: SPHEXIT_TOLERANCE_PROFILE selects the default tolerance profile.",
        formatter_class=fmt)
    parser.add_argument("--replay", metavar="REPORT",
                        help="re-run the configuration logged in an earlier CSV or JSON report")

    common = argparse.ArgumentParser(add_help=False)
    out = common.add_argument_group("output")
    out.add_argument("--output", choices=("csv", "json"), default="csv", help="report format")
    out.add_argument("--output-path", default=None,
                     help="write the report to this file (atomically) instead of standard output")
    tol = common.add_argument_group("tolerances")
    tol.add_argument("--tolerance-profile", choices=sorted(TOLERANCE_PROFILES),
                     default=os.environ.get("SPHEXIT_TOLERANCE_PROFILE", "default"),
                     help="named kernel accuracy profile (default taken from SPHEXIT_TOLERANCE_PROFILE)")
    tol.add_argument("--rel-tol", type=float, default=None,
                     help="relative quadrature tolerance, overrides the profile (dimensionless)")
    tol.add_argument("--abs-tol", type=float, default=None,
                     help="absolute quadrature tolerance, overrides the profile (time units)")

    geom = argparse.ArgumentParser(add_help=False)
    g = geom.add_argument_group("geometry")
    g.add_argument("--kind", choices=("tube", "ball"), default="tube",
                   help="equatorial tube or polar ball")
    g.add_argument("--n", type=int, required=True, help="sphere dimension n >= 2")
    size = g.add_mutually_exclusive_group(required=True)
    size.add_argument("--delta", type=float, help="tube half-width delta in radians, 0 < delta < pi/2 "
                                                  "(for a ball: radius pi/2 - delta)")
    size.add_argument("--rho", type=float, help="ball radius rho in radians, 0 < rho < pi/2 "
                                                "(for a tube: half-width pi/2 - rho)")

    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    sub.required = False

    p = sub.add_parser("solve", parents=[common, geom], formatter_class=fmt,
                       help="mean exit time u (tube) or v (ball) at given radii")
    p.add_argument("--at", type=_float_list, default=[0.0],
                   help="comma-separated radial coordinates in radians (distance to the equator "
                        "for a tube, to the pole for a ball)")
    p.add_argument("--method", choices=("quadrature", "closed-form-n2"), default="quadrature",
                   help="evaluation route; closed-form-n2 needs n = 2")

    p = sub.add_parser("moments", parents=[common, geom], formatter_class=fmt,
                       help="k-th exit moment profile on a uniform radial grid")
    p.add_argument("--k", type=int, default=1, help="moment order k >= 1")
    p.add_argument("--grid-size", type=int, default=exit_solver.DEFAULT_GRID_SIZE,
                   help="number of grid points (>= 16) on [0, boundary]")
    p.add_argument("--method", choices=exit_solver.METHODS, default="quadrature",
                   help="solution route")

    p = sub.add_parser("bounds", parents=[common, geom], formatter_class=fmt,
                       help="lower-F, upper-G or factorial-cap bound on an interior grid")
    p.add_argument("--bound", choices=exit_solver.BOUND_KINDS, default="lower-F", help="bound family")
    p.add_argument("--k", type=int, default=1, help="moment order k >= 1")
    p.add_argument("--grid-size", type=int, default=33, help="number of interior points")

    p = sub.add_parser("simulate", parents=[common, geom], formatter_class=fmt,
                       help="Monte Carlo exit-time statistics of the radial diffusion")
    p.add_argument("--start", type=float, default=0.0,
                   help="starting radial coordinate in radians (signed for a tube)")
    p.add_argument("--paths", type=int, default=10000, help="number of sample paths")
    p.add_argument("--dt", type=float, default=1e-4, help="Euler-Maruyama time step (time units)")
    p.add_argument("--seed", type=int, default=stochastic.DEFAULT_SEED, help="master random seed")
    p.add_argument("--streams", type=int, default=8,
                   help="random streams; path i runs on stream i mod streams")
    p.add_argument("--workers", type=int, default=None,
                   help="threads executing the streams (default: min(streams, CPU count)); "
                        "never changes the output")
    p.add_argument("--k-max", type=int, default=2, help="highest raw moment reported")
    p.add_argument("--generator", choices=stochastic.GENERATORS, default="laplacian",
                   help="diffusion generator: full Laplacian (matches Delta u + 1 = 0) or half of it")
    p.add_argument("--antithetic", action="store_true", help="pair paths with negated noise")
    p.add_argument("--max-steps", type=int, default=None,
                   help="per-path step cap (default 1e9/dt)")

    p = sub.add_parser("volume", parents=[common], formatter_class=fmt,
                       help="tube volume fraction, Levy bound and rigidity volume cap")
    p.add_argument("--n", type=int, required=True, help="sphere dimension n >= 2")
    p.add_argument("--delta", type=float, required=True, help="tube half-width in radians")
    p.add_argument("--sigma-volume", type=float, default=None,
                   help="hypersurface volume to test against half the cap (optional)")

    p = sub.add_parser("scan", parents=[common], formatter_class=fmt,
                       help="table over dimensions and tube half-widths")
    p.add_argument("--n", type=_int_list, required=True, help="comma-separated dimensions")
    p.add_argument("--delta", type=_float_list, required=True,
                   help="comma-separated tube half-widths in radians")

    p = sub.add_parser("residual", parents=[common, geom], formatter_class=fmt,
                       help="finite-difference residual of the Poisson equation for a moment profile")
    p.add_argument("--k", type=int, default=1, help="moment order k >= 1")
    p.add_argument("--grid-size", type=int, default=2049, help="number of grid points")
    p.add_argument("--method", choices=exit_solver.METHODS, default="quadrature",
                   help="solution route")
    p.add_argument("--collar", type=float, default=None,
                   help="ball only: skip t below this radius in radians (default 5%% of rho)")

    p = sub.add_parser("riccati", parents=[common], formatter_class=fmt,
                       help="principal curvature k(r) along normal geodesics, k' = k^2 + 1")
    p.add_argument("--k0", type=_k0, default=0.0,
                   help=f"initial curvature at r = 0, or {NEGATIVE_INFINITY} (also --k0=-inf) for a pole start")
    p.add_argument("--r-end", type=float, default=math.pi / 4, help="end radius in radians")
    p.add_argument("--step", type=float, default=1e-3, help="RK4 step in radians")
    p.add_argument("--eps", type=float, default=1e-4, help="pole-start offset in radians")
    return parser


# ---------------------------------------------------------------- dispatch


def _accuracy(cfg) -> KernelAccuracy:
    base = KernelAccuracy.profile(cfg["tolerance_profile"])
    return KernelAccuracy(cfg["rel_tol"] if cfg["rel_tol"] is not None else base.rel_tol,
                          cfg["abs_tol"] if cfg["abs_tol"] is not None else base.abs_tol,
                          base.max_subdivisions)


def _geometry(cfg):
    delta, rho = cfg.get("delta"), cfg.get("rho")
    if (delta is None) == (rho is None):
        raise UsageError("give exactly one of --delta and --rho")
    if cfg["kind"] == "tube":
        return TubeGeometry(cfg["n"], delta if delta is not None else HALF_PI - rho)
    if rho is not None:
        return BallGeometry(cfg["n"], rho)
    return BallGeometry.from_delta(cfg["n"], delta)


def _solve(cfg, acc):
    geom = _geometry(cfg)
    pts = cfg["at"]
    if not pts:
        raise UsageError("--at needs at least one radius")
    if cfg["method"] == "closed-form-n2":
        if geom.n != 2:
            raise UsageError("closed-form-n2 needs n = 2")
        exit_solver._check_points(pts, 0.0, geom.boundary, "radius")
        f = exit_solver.closed_form_tube_n2 if geom.kind == "tube" else exit_solver.closed_form_ball_n2
        vals = [0.0 if r == geom.boundary else float(f(geom.boundary, r)) for r in pts]
    elif geom.kind == "tube":
        vals = [float(v) for v in exit_solver.exit_time_tube(geom, pts, acc)]
    else:
        vals = [float(v) for v in exit_solver.exit_time_ball(geom, pts, acc)]
    rows = [(float(r), v, geom.kind, 1, geom.n, geom.delta, cfg["method"]) for r, v in zip(pts, vals)]
    return (io.PROFILE_COLUMNS, rows), [dict(zip(io.PROFILE_COLUMNS, r)) for r in rows]


def _moments(cfg, acc):
    geom = _geometry(cfg)
    prof = exit_solver.moment_hierarchy(geom, cfg["k"], cfg["grid_size"], acc, cfg["method"])[-1]
    return (io.PROFILE_COLUMNS, list(io.profile_rows(prof))), io.profile_to_dict(prof)


def _bounds(cfg, acc):
    geom = _geometry(cfg)
    prof = exit_solver.bound_profile(geom, cfg["k"], cfg["bound"], cfg["grid_size"], acc)
    payload = {"geometry": io.geometry_to_dict(geom), "k": prof.k, "kind": prof.kind,
               "grid": [float(x) for x in prof.grid],
               "values": [io._finite_or_none(x) for x in prof.values]}
    return (io.PROFILE_COLUMNS, list(io.profile_rows(prof))), payload


def _simulate(cfg, acc, workers=None):
    geom = _geometry(cfg)
    sim = stochastic.SimulationConfig(geom, cfg["start"], cfg["paths"], cfg["dt"], cfg["seed"],
                                      cfg["streams"], cfg["generator"], cfg["antithetic"],
                                      max_steps=cfg["max_steps"])
    if workers is None:
        workers = min(sim.streams, os.cpu_count() or 1)
    stats = stochastic.simulate(sim, cfg["k_max"], workers).require_converged()
    header = io.stats_csv_header(len(stats.raw_moments))
    row = [stats.count, stats.mean, stats.variance, *stats.raw_moments, *stats.std_errors,
           stats.seed, stats.streams, stats.dt, stats.nonconverged]
    return (header, [row]), io.stats_to_dict(stats)


def _volume(cfg, acc):
    geom = TubeGeometry(cfg["n"], cfg["delta"])
    cap = concentration.rigidity_volume_cap(geom.n, geom.delta)
    rec = {"n": geom.n, "delta": geom.delta,
           "tube_frac": concentration.tube_volume_fraction(geom, acc),
           "levy_bound": concentration.levy_lower_bound(geom.n, geom.delta),
           "volume_cap": cap.value, "log_volume_cap": cap.log_value, "cap_defined": cap.defined}
    if cfg["sigma_volume"] is not None:
        rec["sigma_volume"] = cfg["sigma_volume"]
        rec["sphere_threshold"] = concentration.sphere_theorem_threshold(
            geom.n, geom.delta, cfg["sigma_volume"])
    payload = {k: (io._finite_or_none(v) if isinstance(v, float) else v) for k, v in rec.items()}
    return (list(rec), [list(rec.values())]), payload


def _scan(cfg, acc):
    rows = concentration.scan(cfg["n"], cfg["delta"], acc)
    return (io.SCAN_COLUMNS, [io._scan_values(r) for r in rows]), io.scan_to_dicts(rows)


def _residual(cfg, acc):
    geom = _geometry(cfg)
    prof = exit_solver.moment_hierarchy(geom, cfg["k"], cfg["grid_size"], acc, cfg["method"])[-1]
    res = exit_solver.pde_residual(prof, cfg["collar"])
    rec = {"n": geom.n, "delta": geom.delta, "kind": geom.kind, "k": prof.k,
           "grid_size": prof.grid.size, "method": prof.method, "residual": res}
    return (list(rec), [list(rec.values())]), {k: (io._finite_or_none(v) if isinstance(v, float)
                                                   else v) for k, v in rec.items()}


def _riccati(cfg, acc):
    path = solve_riccati(cfg["k0"], cfg["r_end"], cfg["step"], cfg["eps"])
    rows = [(float(r), float(k)) for r, k in zip(path.r, path.k)]
    return (("r", "k"), rows), {"r": [r for r, _ in rows], "k": [k for _, k in rows]}


HANDLERS = {"solve": _solve, "moments": _moments, "bounds": _bounds, "simulate": _simulate,
            "volume": _volume, "scan": _scan, "residual": _residual, "riccati": _riccati}


def effective_config(ns: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(ns).items() if k not in _UNLOGGED}
    acc = _accuracy(cfg)
    # record the resolved tolerances so a replay does not depend on the environment
    cfg["rel_tol"], cfg["abs_tol"] = acc.rel_tol, acc.abs_tol
    return cfg


def render(cfg: dict, workers=None) -> str:
    """Run the configured computation and return the complete report text."""
    acc = _accuracy(cfg)
    handler = HANDLERS[cfg["subcommand"]]
    if cfg["subcommand"] == "simulate":
        (header, rows), payload = handler(cfg, acc, workers)
    else:
        (header, rows), payload = handler(cfg, acc)
    if cfg["output"] == "json":
        return io.dumps({"config": dict(sorted(cfg.items())), "result": payload}) + "\n"
    return "# config: " + json.dumps(cfg, sort_keys=True) + "\n" + io.csv_lines(header, rows)


def read_logged_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    first = text.split("\n", 1)[0]
    try:
        if first.startswith("# config: "):
            cfg = json.loads(first[len("# config: "):])
        else:
            cfg = json.loads(text)["config"]
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"no logged configuration found in {path}: {exc}") from None
    if cfg.get("subcommand") not in HANDLERS:
        raise UsageError(f"logged configuration in {path} names no known subcommand")
    return cfg


def write_atomic(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".sphexit-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.replay is not None:
            if ns.subcommand is not None:
                raise UsageError("--replay takes no subcommand")
            cfg, out_path, workers = read_logged_config(ns.replay), None, None
        else:
            if ns.subcommand is None:
                parser.print_usage(sys.stderr)
                raise UsageError("a subcommand is required")
            cfg, out_path, workers = effective_config(ns), ns.output_path, getattr(ns, "workers", None)
        text = render(cfg, workers)
        write_atomic(text, out_path)
    except NonConvergenceError as exc:
        print(f"sphexit: nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except AccuracyError as exc:
        print(f"sphexit: accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (DomainError, SphexitError, ValueError, TypeError, KeyError) as exc:
        print(f"sphexit: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"sphexit: cannot write report: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK
