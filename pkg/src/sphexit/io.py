"""CSV and JSON serialization of profiles, simulation statistics and scan tables.

CSV numbers use ``%.17g`` so every double survives a text round trip.  JSON
uses Python's shortest round-trip float repr; non-finite numbers become null.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict

import numpy as np

from .concentration import ScanRow
from .errors import DomainError
from .exit_solver import BoundProfile, RadialProfile
from .geometry import BallGeometry, TubeGeometry
from .stochastic import ExitSampleStats

PROFILE_COLUMNS = ("radial_coord", "value", "kind", "k", "n", "delta", "method")
SCAN_COLUMNS = ("n", "delta", "F_mid", "G", "u_center", "v_center", "tube_frac",
                "levy_bound", "volume_cap", "cap_defined")


def fmt(x) -> str:
    """One CSV cell: integers and booleans verbatim, floats with 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def csv_lines(header, rows) -> str:
    out = [",".join(header)]
    out.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(out) + "\n"


def _finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


def dumps(obj) -> str:
    return json.dumps(obj, allow_nan=False, separators=(",", ":"))


# ---------------------------------------------------------------- geometry


def geometry_to_dict(g) -> dict:
    if isinstance(g, TubeGeometry):
        return {"kind": "tube", "n": g.n, "delta": g.delta}
    return {"kind": "ball", "n": g.n, "rho": g.rho}


def geometry_from_dict(d: dict):
    if d.get("kind") == "tube":
        return TubeGeometry(d["n"], d["delta"])
    if d.get("kind") == "ball":
        return BallGeometry(d["n"], d["rho"])
    raise DomainError(f"unknown geometry kind {d.get('kind')!r}")


# ---------------------------------------------------------------- profiles


def profile_rows(profile: RadialProfile | BoundProfile):
    g = profile.geometry
    label = profile.method if isinstance(profile, RadialProfile) else profile.kind
    kind = g.kind if isinstance(profile, RadialProfile) else profile.kind
    for r, v in zip(profile.grid, profile.values):
        yield (float(r), float(v), kind, profile.k, g.n, g.delta, label)


def profile_to_csv(profile: RadialProfile | BoundProfile) -> str:
    """Columns radial_coord,value,kind,k,n,delta,method.

    ``delta`` is the tube half-width, or pi/2 - rho for a ball.  Bound
    profiles put the bound kind into both the ``kind`` and ``method`` columns.
    """
    return csv_lines(PROFILE_COLUMNS, profile_rows(profile))


def profile_to_dict(profile: RadialProfile) -> dict:
    return {
        "geometry": geometry_to_dict(profile.geometry),
        "k": profile.k,
        "grid": [float(x) for x in profile.grid],
        "values": [float(x) for x in profile.values],
        "method": profile.method,
        "tolerance": float(profile.tolerance),
        "previous": None if profile.previous is None else [float(x) for x in profile.previous],
    }


def profile_to_json(profile: RadialProfile) -> str:
    return dumps(profile_to_dict(profile))


def profile_from_json(text: str) -> RadialProfile:
    d = json.loads(text)
    prev = d.get("previous")
    return RadialProfile(
        geometry_from_dict(d["geometry"]),
        int(d["k"]),
        np.array(d["grid"], dtype=float),
        np.array(d["values"], dtype=float),
        d["method"],
        float(d["tolerance"]),
        None if prev is None else np.array(prev, dtype=float),
    )


# ---------------------------------------------------------------- simulation


def stats_to_dict(stats: ExitSampleStats) -> dict:
    return {
        "count": stats.count,
        "mean": _finite_or_none(stats.mean),
        "variance": _finite_or_none(stats.variance),
        "raw_moments": [_finite_or_none(m) for m in stats.raw_moments],
        "std_errors": [_finite_or_none(s) for s in stats.std_errors],
        "seed": stats.seed,
        "streams": stats.streams,
        "dt": stats.dt,
        "nonconverged": stats.nonconverged,
    }


def stats_to_json(stats: ExitSampleStats) -> str:
    return dumps(stats_to_dict(stats))


def stats_csv_header(k_max: int) -> list[str]:
    cols = ["count", "mean", "variance"]
    cols += [f"moment_{k}" for k in range(1, k_max + 1)]
    cols += [f"std_error_{k}" for k in range(1, k_max + 1)]
    return cols + ["seed", "streams", "dt", "nonconverged"]


def stats_csv_row(stats: ExitSampleStats) -> str:
    """The statistics as one CSV line (no header, no newline)."""
    vals = [stats.count, stats.mean, stats.variance, *stats.raw_moments, *stats.std_errors,
            stats.seed, stats.streams, stats.dt, stats.nonconverged]
    return ",".join(fmt(v) for v in vals)


def stats_to_csv(stats: ExitSampleStats) -> str:
    return ",".join(stats_csv_header(len(stats.raw_moments))) + "\n" + stats_csv_row(stats) + "\n"


# ---------------------------------------------------------------- scans


def _scan_values(row: ScanRow):
    return (row.n, row.delta, row.F_at_midpoint, row.G_value, row.u_at_center, row.v_at_center,
            row.tube_volume_fraction, row.levy_bound, row.volume_cap, row.cap_defined)


def scan_to_csv(rows) -> str:
    return csv_lines(SCAN_COLUMNS, (_scan_values(r) for r in rows))


def scan_to_dicts(rows) -> list[dict]:
    out = []
    for r in rows:
        d = dict(zip(SCAN_COLUMNS, _scan_values(r)))
        for key, v in d.items():
            if isinstance(v, float):
                d[key] = _finite_or_none(v)
        out.append(d)
    return out


def scan_to_json(rows) -> str:
    return dumps(scan_to_dicts(rows))


def record_to_dict(obj) -> dict:
    """Dataclass to plain dict with non-finite floats mapped to None."""
    d = asdict(obj)
    return {k: (_finite_or_none(v) if isinstance(v, float) else v) for k, v in d.items()}
