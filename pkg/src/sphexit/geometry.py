"""Geometric kernels of the unit-curvature sphere model.

Everything here is a pure function of its arguments.  Angles are radians.

The two powered-trigonometric integrals

    I_n(tau) = int_0^tau cos^{n-1}(l) dl,     J_n(tau) = int_0^tau sin^{n-1}(l) dl

are the building blocks of the exit-time formulas.  Their naive evaluation
underflows long before the dimensions of interest (cos^{n-1} drops below the
double range near n ~ 1500 for moderate tau), so both are computed from
representations that keep the large power as a ratio:

* ``cos_power_integral`` runs the reduction formula
  C_m = cos^{m-1} sin / m + (m-1)/m C_{m-2} upward from m in {0, 1}; every
  term is positive, so the recursion cannot lose relative precision through
  cancellation.
* ``cos_power_ratio`` runs the same recursion on Q_m = C_m / cos^m, giving
  I_n / cos^{n-1} directly.
* ``sin_power_ratio`` uses the positive hypergeometric series of the
  incomplete beta function below sin^2 = 0.95 and the regularized incomplete
  beta function above it.  The sine reduction formula alternates in sign and
  cancels for small tau, and the reflection J_n(tau) = I_n(pi/2) - I_n(pi/2 - tau)
  cancels whenever J_n is small, so neither is used for evaluation.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import AccuracyError, BlowUpError, DomainError

HALF_PI = 0.5 * math.pi
_EPS = np.finfo(float).eps

# sin^2 tau above which the beta-function branch replaces the series
_SERIES_SWITCH = 0.95
_SERIES_MAX_TERMS = 4000


@dataclass(frozen=True)
class TubeGeometry:
    """Tube of half-width ``delta`` around the equator S^{n-1} of S^n."""

    n: int
    delta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension n must be an integer >= 2, got {self.n!r}")
        if not 0.0 < self.delta < HALF_PI:
            raise DomainError(f"tube half-width must lie in (0, pi/2), got {self.delta!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "delta", float(self.delta))

    kind = "tube"

    @property
    def boundary(self) -> float:
        return self.delta

    def complement(self) -> "BallGeometry":
        """Polar cap B_{pi/2 - delta}(p_N) left over by the tube."""
        return BallGeometry(self.n, HALF_PI - self.delta)


@dataclass(frozen=True)
class BallGeometry:
    """Geodesic ball of radius ``rho`` centred at the north pole of S^n."""

    n: int
    rho: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension n must be an integer >= 2, got {self.n!r}")
        if not 0.0 < self.rho < HALF_PI:
            raise DomainError(f"ball radius must lie in (0, pi/2), got {self.rho!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "rho", float(self.rho))

    kind = "ball"

    @classmethod
    def from_delta(cls, n: int, delta: float) -> "BallGeometry":
        if not 0.0 < delta < HALF_PI:
            raise DomainError(f"delta must lie in (0, pi/2), got {delta!r}")
        return cls(n, HALF_PI - delta)

    @property
    def boundary(self) -> float:
        return self.rho

    @property
    def delta(self) -> float:
        return HALF_PI - self.rho

    def complement(self) -> TubeGeometry:
        return TubeGeometry(self.n, HALF_PI - self.rho)


@dataclass(frozen=True)
class KernelAccuracy:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 60

    def __post_init__(self):
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise DomainError("tolerances must be positive")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be an integer >= 1")

    @classmethod
    def profile(cls, name: str) -> "KernelAccuracy":
        try:
            return TOLERANCE_PROFILES[name]
        except KeyError:
            raise DomainError(
                f"unknown tolerance profile {name!r}; choose from {sorted(TOLERANCE_PROFILES)}"
            ) from None

    @classmethod
    def from_env(cls) -> "KernelAccuracy":
        """Default accuracy, overridable through ``SPHEXIT_TOLERANCE_PROFILE``."""
        return cls.profile(os.environ.get("SPHEXIT_TOLERANCE_PROFILE", "default"))


TOLERANCE_PROFILES = {
    "default": KernelAccuracy(),
    "fast": KernelAccuracy(rel_tol=1e-7, abs_tol=1e-12, max_subdivisions=40),
    "strict": KernelAccuracy(rel_tol=1e-12, abs_tol=1e-15, max_subdivisions=80),
}


def _check_order(n):
    if int(n) != n or n < 1:
        raise DomainError(f"power-integral order must be an integer >= 1, got {n!r}")
    return int(n)


def _as_angles(tau, lo, hi, hi_open, name):
    arr = np.asarray(tau, dtype=float)
    bad = ~np.isfinite(arr) | (arr < lo) | ((arr >= hi) if hi_open else (arr > hi))
    if np.any(bad):
        bracket = ")" if hi_open else "]"
        raise DomainError(f"{name} must lie in [{lo}, {hi}{bracket}, got {arr[bad].ravel()[0]!r}")
    return arr


def _finish(out, scalar):
    return float(np.reshape(out, -1)[0]) if scalar else out


def cos_power_integral(n, tau, acc: KernelAccuracy | None = None):
    """Return I_n(tau) = int_0^tau cos^{n-1}(l) dl for tau in [0, pi/2).

    ``tau`` may be an array.  Powers of cos are formed as exp(m ln cos tau),
    so large ``n`` degrades to underflow of single terms only, never of the
    sum.
    """
    n = _check_order(n)
    acc = acc or KernelAccuracy()
    t = _as_angles(tau, 0.0, HALF_PI, True, "tau")
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    m_top = n - 1
    # rounding budget of the positive recursion: a few ulps per step
    if 4.0 * _EPS * (m_top // 2 + 1) > acc.rel_tol:
        raise AccuracyError(f"reduction recursion cannot reach rel_tol={acc.rel_tol:g} at n={n}")
    s = np.sin(t)
    lc = np.log(np.cos(t))
    c = t.copy() if m_top % 2 == 0 else s.copy()
    for m in range(2 + m_top % 2, m_top + 1, 2):
        c = np.exp((m - 1) * lc) * s / m + (m - 1) / m * c
    if not np.all(np.isfinite(c)):
        raise AccuracyError("power-integral recursion produced a non-finite value")
    return _finish(c, scalar)


def cos_power_integral_table(n_max, tau, acc: KernelAccuracy | None = None):
    """I_n(tau) for every n = 1..n_max in one sweep of the reduction recursion.

    Returns an array of shape (n_max, len(tau)); row n-1 holds I_n.
    """
    n_max = _check_order(n_max)
    acc = acc or KernelAccuracy()
    if 4.0 * _EPS * ((n_max - 1) // 2 + 1) > acc.rel_tol:
        raise AccuracyError(f"reduction recursion cannot reach rel_tol={acc.rel_tol:g} at n={n_max}")
    t = np.atleast_1d(_as_angles(tau, 0.0, HALF_PI, True, "tau"))
    s = np.sin(t)
    lc = np.log(np.cos(t))
    out = np.empty((n_max, t.size))
    out[0], out[1] = t, s
    for m in range(2, n_max):
        out[m] = np.exp((m - 1) * lc) * s / m + (m - 1) / m * out[m - 2]
    if not np.all(np.isfinite(out)):
        raise AccuracyError("power-integral recursion produced a non-finite value")
    return out


def cos_power_ratio(n, tau):
    """Return I_n(tau) / cos^{n-1}(tau), the tube exit-time integrand.

    Runs Q_m = tan/m + (m-1)/(m cos^2) Q_{m-2}; the result is finite exactly
    when the ratio itself is representable.
    """
    n = _check_order(n)
    t = _as_angles(tau, 0.0, HALF_PI, True, "tau")
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    m_top = n - 1
    tn = np.tan(t)
    sec2 = 1.0 / np.cos(t) ** 2
    q = t.copy() if m_top % 2 == 0 else tn.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(2 + m_top % 2, m_top + 1, 2):
            q = tn / m + (m - 1) / m * sec2 * q
    return _finish(q, scalar)


def _sin_ratio_series(n, t):
    # (1/2) sin t * sum_j c_j x^j / (n/2 + j),  c_j = (1/2)_j / j!
    x = np.sin(t) ** 2
    a = 0.5 * n
    coef = np.ones_like(x)
    total = coef / a
    for j in range(1, _SERIES_MAX_TERMS):
        coef = coef * x * ((j - 0.5) / j)
        term = coef / (a + j)
        total = total + term
        if np.all(term <= 0.25 * _EPS * total):
            break
    else:
        raise AccuracyError("incomplete-beta series did not converge")
    return 0.5 * np.sin(t) * total


def _sin_ratio_beta(n, t):
    x = np.sin(t) ** 2
    a = 0.5 * n
    log_j = (
        math.log(0.5) + special.betaln(a, 0.5) + np.log(special.betainc(a, 0.5, x))
    )
    return np.exp(log_j - (n - 1) * 0.5 * np.log(x))


def sin_power_ratio(n, tau):
    """Return J_n(tau) / sin^{n-1}(tau), the ball exit-time integrand.

    The removable singularity at tau = 0 is handled by the series, whose
    leading term is sin(tau)/n.
    """
    n = _check_order(n)
    t = _as_angles(tau, 0.0, HALF_PI, False, "tau")
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty_like(t)
    low = np.sin(t) ** 2 <= _SERIES_SWITCH
    if np.any(low):
        out[low] = _sin_ratio_series(n, t[low])
    if np.any(~low):
        out[~low] = _sin_ratio_beta(n, t[~low])
    return _finish(out, scalar)


def sin_power_integral(n, tau, acc: KernelAccuracy | None = None):
    """Return J_n(tau) = int_0^tau sin^{n-1}(l) dl for tau in [0, pi/2]."""
    n = _check_order(n)
    t = _as_angles(tau, 0.0, HALF_PI, False, "tau")
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if n == 1:
        return _finish(t.copy(), scalar)
    ratio = sin_power_ratio(n, t)
    with np.errstate(divide="ignore"):
        out = ratio * np.exp((n - 1) * np.log(np.sin(t)))
    return _finish(out, scalar)


def wallis_integral(n) -> float:
    """I_n(pi/2) = sqrt(pi) Gamma(n/2) / (2 Gamma((n+1)/2))."""
    n = _check_order(n)
    return math.exp(0.5 * math.log(math.pi) + math.lgamma(0.5 * n) - math.lgamma(0.5 * (n + 1)) - math.log(2.0))


def log_sphere_volume(m) -> float:
    """ln vol(S^m) for the unit m-sphere, via log-gamma."""
    if int(m) != m or m < 0:
        raise DomainError(f"sphere dimension must be a nonnegative integer, got {m!r}")
    h = 0.5 * (m + 1)
    return math.log(2.0) + h * math.log(math.pi) - math.lgamma(h)


def sphere_volume(m) -> float:
    return math.exp(log_sphere_volume(m))


def mean_curvature_tube(n, s):
    """Trace (n-1) tan s of the shape operator of the level set at distance s from the equator."""
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    arr = np.asarray(s, dtype=float)
    if np.any(~(np.abs(arr) < HALF_PI)):
        raise DomainError("|s| must be < pi/2")
    out = (n - 1) * np.tan(arr)
    return float(out) if out.ndim == 0 else out


def mean_curvature_ball(n, t):
    """Trace -(n-1) cot t of the shape operator of the geodesic sphere of radius t."""
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    arr = np.asarray(t, dtype=float)
    if np.any(~((arr > 0) & (arr < math.pi))):
        raise DomainError("t must lie in (0, pi)")
    # cot(pi/2) evaluates to 6e-17 through tan; use cos/sin so it vanishes exactly
    out = -(n - 1) * np.cos(arr) / np.sin(arr)
    out = np.where(arr == HALF_PI, 0.0, out)
    return float(out) if out.ndim == 0 else out


NEGATIVE_INFINITY = "negative-infinity"


@dataclass(frozen=True)
class RiccatiPath:
    r: np.ndarray
    k: np.ndarray

    @property
    def final(self) -> float:
        return float(self.k[-1])


def _is_pole_start(k0) -> bool:
    if isinstance(k0, str):
        if k0 != NEGATIVE_INFINITY:
            raise DomainError(f"unknown initial-curvature sentinel {k0!r}")
        return True
    return math.isinf(k0) and k0 < 0


def _rk4_riccati(y, h):
    k1 = y * y + 1.0
    z = y + 0.5 * h * k1
    k2 = z * z + 1.0
    z = y + 0.5 * h * k2
    k3 = z * z + 1.0
    z = y + h * k3
    k4 = z * z + 1.0
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def solve_riccati(k0, r_end: float, step: float, eps: float = 1e-4) -> RiccatiPath:
    """Integrate the principal-curvature flow k' = k^2 + 1 with classical RK4.

    ``k0`` is the curvature at r = 0, or ``"negative-infinity"`` (also
    ``-math.inf``) for curvature spheres shrinking to a point; that case starts
    at r = ``eps`` from k = -cot(eps).  The last step is shortened to land on
    ``r_end`` exactly.  Steps are taken on k or on -1/k, whichever is at most
    one in modulus, so large initial curvatures need no step-size control.
    """
    if not step > 0:
        raise DomainError(f"step must be positive, got {step!r}")
    if not r_end > 0:
        raise DomainError(f"r_end must be positive, got {r_end!r}")
    if _is_pole_start(k0):
        if not 0 < eps < r_end:
            raise DomainError("pole offset eps must lie in (0, r_end)")
        r0, k, blowup = eps, -1.0 / math.tan(eps), math.pi
    else:
        r0, k, blowup = 0.0, float(k0), HALF_PI - math.atan(k0)
    if r_end >= blowup:
        raise BlowUpError(f"solution blows up at r = {blowup:.17g} before r_end = {r_end:.17g}")

    nsteps = max(1, math.ceil((r_end - r0) / step - 1e-9))
    rs = np.empty(nsteps + 1)
    ks = np.empty(nsteps + 1)
    rs[0], ks[0] = r0, k
    # w = -1/k obeys the same equation w' = w^2 + 1, so the march carries
    # whichever of k, -1/k has modulus <= 1 and never sees a steep slope
    flipped = abs(k) > 1.0
    y = -1.0 / k if flipped else k
    r = r0
    for i in range(1, nsteps + 1):
        h = step if i < nsteps else r_end - r
        y = _rk4_riccati(y, h)
        if abs(y) > 1.0:
            y, flipped = -1.0 / y, not flipped
        r = r0 + i * step if i < nsteps else r_end
        rs[i], ks[i] = r, (-1.0 / y if flipped else y)
    return RiccatiPath(rs, ks)
