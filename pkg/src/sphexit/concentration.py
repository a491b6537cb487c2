"""Volume concentration around the equator, the Levy bound, and the rigidity volume cap."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .exit_solver import exit_time_ball, exit_time_tube, lower_bound_F, upper_bound_G
from .geometry import (KernelAccuracy, TubeGeometry, cos_power_integral, cos_power_integral_table,
                       log_sphere_volume, wallis_integral)
from .quadrature import gauss_kronrod


def _check(n, delta):
    # TubeGeometry carries the validation for (n, delta)
    return TubeGeometry(n, delta)


def _tail(n, delta):
    # J_n(pi/2 - delta) / I_n(pi/2) is the regularized incomplete beta I_{cos^2 delta}(n/2, 1/2)
    return special.betainc(0.5 * n, 0.5, np.cos(delta) ** 2)


def tube_tail_fraction(geom: TubeGeometry, acc: KernelAccuracy | None = None) -> float:
    """vol(S^n minus the tube)/vol(S^n): the two polar caps of radius pi/2 - delta."""
    return float(_tail(geom.n, geom.delta))


def tube_volume_fraction(geom: TubeGeometry, acc: KernelAccuracy | None = None) -> float:
    """vol(T_delta(S^{n-1}))/vol(S^n) = I_n(delta)/I_n(pi/2).

    Once the tube holds more than half the volume the fraction is formed as
    one minus the cap fraction, which keeps the deficit accurate.  It rounds
    to 1.0 when the deficit is below half an ulp.
    """
    w = wallis_integral(geom.n)
    head = cos_power_integral(geom.n, geom.delta, acc) / w
    if head <= 0.5:
        return head
    return 1.0 - tube_tail_fraction(geom, acc)


def volume_fraction_table(n_max: int, deltas, acc: KernelAccuracy | None = None):
    """Tube volume fractions for every n = 2..n_max and each half-width in ``deltas``.

    Same values as :func:`tube_volume_fraction`, from one pass of the
    power-integral recursion.  Returns (dimensions, fractions) with
    fractions[i, j] belonging to (dimensions[i], deltas[j]).
    """
    d = np.atleast_1d(np.asarray(deltas, dtype=float))
    for x in d:
        _check(n_max, x)
    dims = np.arange(2, n_max + 1)
    w = np.array([wallis_integral(int(n)) for n in dims])
    heads = cos_power_integral_table(n_max, d, acc)[1:] / w[:, None]
    tails = 1.0 - _tail(dims[:, None], d[None, :])
    return dims, np.where(heads > 0.5, tails, heads)


def levy_lower_bound(n: int, delta: float) -> float:
    """1 - 2 exp(-(n-1) delta^2 / 2); negative values are returned unclamped."""
    _check(n, delta)
    return 1.0 - 2.0 * math.exp(-0.5 * (n - 1) * delta * delta)


@dataclass(frozen=True)
class VolumeCap:
    """vol(S^{n-1}) / levy_lower_bound, or undefined when the bound is <= 0."""

    defined: bool
    value: float
    log_value: float


def rigidity_volume_cap(n: int, delta: float) -> VolumeCap:
    levy = levy_lower_bound(n, delta)
    if levy <= 0.0:
        return VolumeCap(False, math.nan, math.nan)
    log_cap = log_sphere_volume(n - 1) - math.log(levy)
    return VolumeCap(True, math.exp(log_cap), log_cap)


def sphere_theorem_threshold(n: int, delta: float, sigma_volume: float) -> bool:
    """True iff ``sigma_volume`` exceeds half the rigidity volume cap.

    An undefined cap means the threshold cannot be verified, so the answer
    is False.
    """
    if not sigma_volume > 0:
        raise DomainError("sigma_volume must be positive")
    cap = rigidity_volume_cap(n, delta)
    if not cap.defined:
        return False
    if math.isinf(sigma_volume):
        return True
    return math.log(sigma_volume) > cap.log_value - math.log(2.0)


@dataclass(frozen=True)
class ScanRow:
    n: int
    delta: float
    F_at_midpoint: float
    G_value: float
    u_at_center: float
    v_at_center: float
    tube_volume_fraction: float
    levy_bound: float
    volume_cap: float
    cap_defined: bool


_LOG_DBL_MAX = math.log(np.finfo(float).max)


def _center_exit_time(geom: TubeGeometry, acc):
    # u(0) ~ peak/((n-1) tan delta) with peak = I_n(delta)/cos^{n-1}(delta), the
    # integrand at the wall; past the double range the row reports inf
    acc = acc or KernelAccuracy()
    n, d = geom.n, geom.delta
    log_peak = math.log(cos_power_integral(n, d, acc)) - (n - 1) * math.log(math.cos(d))
    if log_peak - math.log((n - 1) * math.tan(d)) > _LOG_DBL_MAX:
        return math.inf
    if log_peak < _LOG_DBL_MAX - 1.0:
        return exit_time_tube(geom, 0.0, acc)
    # finite u but an overflowing integrand: integrate it scaled by exp(-log_peak)

    def scaled(x):
        return np.exp(np.log(cos_power_integral(n, x, acc)) - (n - 1) * np.log(np.cos(x)) - log_peak)

    pieces, _ = gauss_kronrod(scaled, np.linspace(0.0, d, 9), acc.rel_tol, acc.abs_tol * math.exp(-log_peak),
                              acc.max_subdivisions)
    with np.errstate(over="ignore"):
        return float(np.exp(math.log(pieces.sum()) + log_peak))


def scan_row(n: int, delta: float, acc: KernelAccuracy | None = None) -> ScanRow:
    geom = TubeGeometry(n, delta)
    cap = rigidity_volume_cap(n, delta)
    return ScanRow(
        n=geom.n,
        delta=geom.delta,
        F_at_midpoint=lower_bound_F(geom, 1, 0.5 * geom.delta),
        G_value=upper_bound_G(geom),
        u_at_center=_center_exit_time(geom, acc),
        v_at_center=exit_time_ball(geom.complement(), 0.0, acc),
        tube_volume_fraction=tube_volume_fraction(geom, acc),
        levy_bound=levy_lower_bound(n, delta),
        volume_cap=cap.value,
        cap_defined=cap.defined,
    )


def scan(n_list, delta_list, acc: KernelAccuracy | None = None) -> list[ScanRow]:
    """One row per distinct (n, delta) pair, sorted by n then delta."""
    n_list, delta_list = list(n_list), list(delta_list)
    if not n_list or not delta_list:
        raise DomainError("n_list and delta_list must be nonempty")
    pairs = sorted({(int(n), float(d)) for n, d in itertools.product(n_list, delta_list)})
    for n, d in pairs:
        _check(n, d)
    return [scan_row(n, d, acc) for n, d in pairs]
