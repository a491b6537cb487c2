"""Mean exit times, exit-moment hierarchies and their dimension bounds.

Radial coordinates: ``s`` is the distance to the equator for the tube
T_delta(S^{n-1}), ``t`` the distance to the north pole for the ball
B_rho(p_N).  Exit moments solve the Poisson hierarchy

    u_k'' - trS u_k' + k u_{k-1} = 0,   u_k(boundary) = 0,   u_0 = 1,

with trS = (n-1) tan s on the tube and -(n-1) cot t on the ball, whose
solutions are the nested integrals

    u_k(s) = k int_s^delta cos^{1-n}(tau) int_0^tau cos^{n-1}(xi) u_{k-1}(xi) dxi dtau

(and the same with sin on the ball).  Three routes are provided:

``quadrature``
    Composite Gauss-Legendre panels.  Every level lives on the same nodes,
    so the nested integral never interpolates; weights (cos xi/cos tau)^{n-1}
    are formed relative to panel end points and stay within [e^-2, e^2].
``ode``
    The integrating-factor form g' = (n-1) tan(s) g + k u_{k-1}, u = int g,
    marched with scipy's explicit (tube) or implicit (ball) Runge-Kutta
    solvers.  Independent of the panel code; used for cross-checks.
``closed-form-n2``
    u = ln cos s - ln cos delta and v = 2 ln cos(t/2) - 2 ln cos(rho/2), n = 2, k = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AccuracyError, DomainError, GridError
from .geometry import (
    BallGeometry,
    KernelAccuracy,
    TubeGeometry,
    cos_power_ratio,
    sin_power_ratio,
)
from .quadrature import LegendrePanels, gauss_kronrod

METHODS = ("quadrature", "ode", "closed-form-n2")
BOUND_KINDS = ("lower-F", "upper-G", "upper-factorial")

DEFAULT_GRID_SIZE = 1025
ORACLE_GRID_SIZE = 4096
# below this radius the ball integrand is replaced by its series tau/n
BALL_SERIES_RADIUS = 1e-4

_PANEL_ORDER = 16
_PANEL_GROWTH = 2.0
_MAX_REFINEMENTS = 5


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Exit moment of order ``k`` sampled on a radial grid.

    ``previous`` holds level k-1 on the same grid (all ones for k = 1) so the
    profile can be checked against its Poisson equation on its own.
    """

    geometry: TubeGeometry | BallGeometry
    k: int
    grid: np.ndarray
    values: np.ndarray
    method: str
    tolerance: float
    previous: np.ndarray | None = field(default=None)

    def __post_init__(self):
        grid, values = _frozen(self.grid), _frozen(self.values)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise DomainError("grid and values must be 1-D arrays of equal length")
        if grid.size >= 2 and np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if int(self.k) != self.k or self.k < 0:
            raise DomainError("moment order must be a nonnegative integer")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.previous is not None:
            prev = _frozen(self.previous)
            if prev.shape != grid.shape:
                raise DomainError("previous level must share the grid")
            object.__setattr__(self, "previous", prev)

    @property
    def kind(self) -> str:
        return self.geometry.kind

    def at(self, r):
        """Linear interpolation of the stored values, for plotting and quick lookups."""
        return np.interp(r, self.grid, self.values)


@dataclass(frozen=True, eq=False)
class BoundProfile:
    geometry: TubeGeometry | BallGeometry
    k: int
    grid: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in BOUND_KINDS:
            raise DomainError(f"unknown bound kind {self.kind!r}")
        object.__setattr__(self, "grid", _frozen(self.grid))
        object.__setattr__(self, "values", _frozen(self.values))


def _check_points(r, lo, hi, name):
    arr = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < lo) or np.any(arr > hi):
        raise DomainError(f"{name} must lie in [{lo:.17g}, {hi:.17g}]")
    return arr


def _integrate_to_boundary(integrand, points, boundary, acc):
    """Return int_{p}^{boundary} integrand for every p in ``points``."""
    scalar = points.ndim == 0
    flat = np.atleast_1d(points).ravel()
    knots = np.unique(np.append(flat, boundary))
    # coarse initial mesh so the adaptive pass starts from a sensible scale
    seed = np.linspace(knots[0], boundary, 9)
    bp = np.union1d(knots, seed)
    pieces, _ = gauss_kronrod(integrand, bp, acc.rel_tol, acc.abs_tol, acc.max_subdivisions)
    tail = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    out = tail[np.searchsorted(bp, flat)]
    if not np.all(np.isfinite(out)):
        raise AccuracyError("exit time overflows double precision")
    return float(out[0]) if scalar else out.reshape(np.shape(points))


def exit_time_tube(geom: TubeGeometry, s, acc: KernelAccuracy | None = None):
    """Mean exit time u(s) of the equatorial tube; ``s`` may be an array."""
    acc = acc or KernelAccuracy()
    pts = _check_points(s, 0.0, geom.delta, "s")
    n = geom.n
    return _integrate_to_boundary(lambda x: cos_power_ratio(n, x), pts, geom.delta, acc)


def exit_time_ball(geom: BallGeometry, t, acc: KernelAccuracy | None = None):
    """Mean exit time v(t) of the polar ball; ``t`` may be an array."""
    acc = acc or KernelAccuracy()
    pts = _check_points(t, 0.0, geom.rho, "t")
    n = geom.n
    return _integrate_to_boundary(lambda x: sin_power_ratio(n, x), pts, geom.rho, acc)


def closed_form_tube_n2(delta, s):
    return np.log(np.cos(s)) - math.log(math.cos(delta))


def closed_form_ball_n2(rho, t):
    return 2.0 * np.log(np.cos(0.5 * np.asarray(t))) - 2.0 * math.log(math.cos(0.5 * rho))


# ---------------------------------------------------------------- bounds


def log_lower_bound_F(geom: TubeGeometry, k: int, r):
    """Natural log of the tube lower bound F_{delta,k,n}(r)."""
    if int(k) != k or k < 1:
        raise DomainError("moment order k must be an integer >= 1")
    delta, n = geom.delta, geom.n
    r0 = np.asarray(r, dtype=float)
    if np.any(~((r0 > 0) & (r0 < delta))):
        raise DomainError("r must lie in the open interval (0, delta)")

    def log_core(x):
        # ln[(delta - x) (1 - cos^n x) / (n cos^{n-1} x)]
        lc = np.log(np.cos(x))
        return np.log(delta - x) + np.log(-np.expm1(n * lc)) - math.log(n) - (n - 1) * lc

    total = np.zeros_like(r0)
    x = r0
    for j in range(k, 1, -1):
        nxt = 0.5 * (x + delta)
        total = total + math.log(j) - math.log(2.0) - np.log(np.sin(nxt)) + log_core(x)
        x = nxt
    total = total + log_core(x) - math.log(math.sin(delta))
    return float(total) if total.ndim == 0 else total


def lower_bound_F(geom: TubeGeometry, k: int, r):
    """Tube lower bound F_{delta,k,n}(r), evaluated in log space.

    For k = 1 it is (delta - r)/sin(delta) * (1 - cos^n r)/(n cos^{n-1} r); for
    k >= 2 it is k F_{k-1}(m) (delta - r)/(2 cos^{n-1}(r) sin m) (1 - cos^n r)/n
    with m = (r + delta)/2, unrolled iteratively along the midpoints.
    """
    with np.errstate(over="ignore"):
        out = np.exp(log_lower_bound_F(geom, k, r))
    return float(out) if out.ndim == 0 else out


def upper_bound_G(geom: TubeGeometry | BallGeometry) -> float:
    """Uniform ball bound (1 - sin delta)/(n sin delta), delta = pi/2 - rho."""
    delta = geom.delta
    sd = math.sin(delta)
    return (1.0 - sd) / sd / geom.n


def factorial_cap(geom: BallGeometry, k: int, acc: KernelAccuracy | None = None) -> float:
    """k! v_1(0)^k, the uniform bound on the k-th ball moment."""
    if int(k) != k or k < 1:
        raise DomainError("moment order k must be an integer >= 1")
    return math.factorial(k) * exit_time_ball(geom, 0.0, acc) ** k


def bound_profile(geom, k: int, kind: str, grid_size: int = 33, acc=None) -> BoundProfile:
    """Bound ``kind`` on ``grid_size`` interior points of (0, boundary)."""
    if grid_size < 1:
        raise GridError("grid_size must be >= 1")
    b = geom.boundary
    grid = b * np.arange(1, grid_size + 1) / (grid_size + 1)
    if kind == "lower-F":
        if not isinstance(geom, TubeGeometry):
            raise DomainError("lower-F is a tube bound")
        values = lower_bound_F(geom, k, grid)
    elif kind == "upper-G":
        values = np.full(grid.size, upper_bound_G(geom))
    elif kind == "upper-factorial":
        if not isinstance(geom, BallGeometry):
            raise DomainError("upper-factorial is a ball bound")
        values = np.full(grid.size, factorial_cap(geom, k, acc))
    else:
        raise DomainError(f"unknown bound kind {kind!r}")
    return BoundProfile(geom, k, grid, values, kind)


def limit_diagnostic(geom: TubeGeometry, r: float, n_list):
    """F_{delta,n}(r) along the dimensions in ``n_list`` (tube half-width fixed)."""
    return [(int(n), lower_bound_F(TubeGeometry(n, geom.delta), 1, r)) for n in n_list]


# ---------------------------------------------------------------- hierarchies


def _tube_panels(geom: TubeGeometry):
    n, delta = geom.n, geom.delta
    wmax = delta / 32
    shrink = math.exp(-_PANEL_GROWTH / (n - 1))
    edges = [0.0]
    a = 0.0
    while a < delta:
        b = min(a + wmax, math.acos(math.cos(a) * shrink), delta)
        if delta - b < 0.25 * (b - a):
            b = delta
        edges.append(b)
        a = b
    return LegendrePanels(np.array(edges), _PANEL_ORDER)


def _ball_panels(geom: BallGeometry):
    n, rho = geom.n, geom.rho
    eps = min(BALL_SERIES_RADIUS, rho / 100)
    wmax = rho / 32
    grow = math.exp(_PANEL_GROWTH / (n - 1))
    edges = [eps]
    a = eps
    while a < rho:
        b = min(a + wmax, math.asin(min(1.0, math.sin(a) * grow)), rho)
        if rho - b < 0.25 * (b - a):
            b = rho
        edges.append(b)
        a = b
    return LegendrePanels(np.array(edges), _PANEL_ORDER)


def _panel_hierarchy(geom, k_max, panels):
    """Levels 1..k_max at the panel nodes; ball levels also return v_k(0)."""
    x, w, cum, _ = panels.reference
    outer = w[None, :] - cum
    nodes = panels.nodes
    hw = panels.half_width
    m = geom.n - 1
    is_ball = isinstance(geom, BallGeometry)
    trig = np.sin if is_ball else np.cos
    logw = lambda z: np.log(trig(z))
    ln_nodes, ln_left, ln_right = logw(nodes), logw(panels.left), logw(panels.right)
    h = np.exp(m * (ln_nodes - ln_right[:, None]))
    fac_left = np.exp(m * (ln_left[:, None] - ln_nodes))
    fac_right = np.exp(m * (ln_right[:, None] - ln_nodes))
    jump = np.exp(m * (ln_left - ln_right))
    eps = panels.edges[0]
    ratio_eps = sin_power_ratio(geom.n, eps) if is_ball else 0.0

    f = np.ones_like(nodes)
    f0 = 1.0
    levels, centres = [], []
    for k in range(1, k_max + 1):
        hf = h * f
        local = hw[:, None] * (hf @ cum.T)
        full = hw * (hf @ w)
        g_left = np.empty(full.size)
        acc = f0 * ratio_eps
        for p in range(full.size):
            g_left[p] = acc
            acc = jump[p] * acc + full[p]
        g = fac_left * g_left[:, None] + fac_right * local
        within = hw[:, None] * (g @ outer.T)
        totals = hw * (g @ w)
        tail = np.concatenate([np.cumsum(totals[::-1])[::-1][1:], [0.0]])
        u = k * (within + tail[:, None])
        centre = None
        if is_ball:
            # v_k(0) = v_k(eps) + k int_0^eps f(0) tau/n dtau
            centre = k * (totals.sum() + f0 * eps * eps / (2 * geom.n))
            f0 = centre
        levels.append(u)
        centres.append(centre)
        f = u
    return levels, centres


def _eval_panel_level(geom, panels, level, centre, k, f0_prev, grid):
    out = np.empty(grid.size)
    eps = panels.edges[0]
    inside = grid >= eps
    out[inside] = panels.interpolate(level, grid[inside])
    if isinstance(geom, BallGeometry) and np.any(~inside):
        t = grid[~inside]
        out[~inside] = centre - k * f0_prev * t * t / (2 * geom.n)
    out[grid == geom.boundary] = 0.0
    return out


def _panel_profiles(geom, k_max, grid, acc):
    panels = _tube_panels(geom) if isinstance(geom, TubeGeometry) else _ball_panels(geom)

    def on_grid(pan):
        levels, centres = _panel_hierarchy(geom, k_max, pan)
        out, f0 = [], 1.0
        for k, (lev, c) in enumerate(zip(levels, centres), start=1):
            out.append(_eval_panel_level(geom, pan, lev, c, k, f0, grid))
            f0 = c
        return out

    coarse = on_grid(panels)
    for _ in range(_MAX_REFINEMENTS):
        panels = panels.refined()
        fine = on_grid(panels)
        errs = [float(np.max(np.abs(a - b))) for a, b in zip(coarse, fine)]
        if all(e <= acc.rel_tol * np.max(np.abs(b)) + acc.abs_tol for e, b in zip(errs, fine)):
            return fine, errs
        coarse = fine
    raise AccuracyError("nested quadrature error estimate exceeds rel_tol after refinement")


def _ode_profiles(geom, k_max, grid, acc):
    n = geom.n
    is_ball = isinstance(geom, BallGeometry)
    b = geom.boundary
    consts = []  # u_j(0) for completed levels
    start = min(BALL_SERIES_RADIUS, b / 100) if is_ball else 0.0
    eval_pts = grid[grid >= start]
    if eval_pts[-1] != b:
        eval_pts = np.append(eval_pts, b)

    for K in range(1, k_max + 1):
        def rhs(r, y, K=K):
            g, W = y[:K], y[K:]
            drift = -(n - 1) / math.tan(r) if is_ball else (n - 1) * math.tan(r)
            prev = np.empty(K)
            prev[0] = 1.0
            if K > 1:
                prev[1:] = np.asarray(consts[: K - 1]) - W[: K - 1]
            dg = drift * g + np.arange(1, K + 1) * prev
            return np.concatenate([dg, g])

        y0 = np.zeros(2 * K)
        if is_ball:
            f0 = np.array([1.0] + consts[: K - 1])
            j = np.arange(1, K + 1)
            y0[:K] = j * f0 * sin_power_ratio(n, start)
            y0[K:] = j * f0 * start * start / (2 * n)
        sol = solve_ivp(
            rhs, (start, b), y0,
            method="Radau" if is_ball else "DOP853",
            t_eval=eval_pts, rtol=min(acc.rel_tol, 1e-10), atol=acc.abs_tol,
        )
        if not sol.success:
            raise AccuracyError(f"ODE march failed: {sol.message}")
        W = sol.y[K:]
        consts.append(float(W[K - 1, -1]))

    profiles = []
    for j in range(1, k_max + 1):
        vals = np.empty(grid.size)
        sel = grid >= start
        vals[sel] = consts[j - 1] - W[j - 1, : sel.sum()]
        if is_ball and np.any(~sel):
            f0 = 1.0 if j == 1 else consts[j - 2]
            t = grid[~sel]
            vals[~sel] = consts[j - 1] - j * f0 * t * t / (2 * n)
        vals[grid == b] = 0.0
        profiles.append(vals)
    return profiles, [acc.rel_tol] * k_max


def moment_hierarchy(geom, k_max: int, grid_size: int = DEFAULT_GRID_SIZE,
                     acc: KernelAccuracy | None = None, method: str = "quadrature"):
    """Exit moments of orders 1..k_max on a uniform grid over [0, boundary].

    Returns a list of RadialProfile, one per level, each carrying the level
    below it in ``previous``.
    """
    acc = acc or KernelAccuracy()
    if int(k_max) != k_max or k_max < 1:
        raise DomainError("moment order must be an integer >= 1")
    if grid_size < 16:
        raise GridError("grid_size must be >= 16")
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}; choose from {METHODS}")
    grid = np.linspace(0.0, geom.boundary, grid_size)
    if method == "quadrature":
        levels, errs = _panel_profiles(geom, k_max, grid, acc)
    elif method == "ode":
        levels, errs = _ode_profiles(geom, k_max, grid, acc)
    else:
        if geom.n != 2 or k_max != 1:
            raise DomainError("closed-form-n2 covers only n = 2, k = 1")
        if isinstance(geom, TubeGeometry):
            vals = closed_form_tube_n2(geom.delta, grid)
        else:
            vals = closed_form_ball_n2(geom.rho, grid)
        vals[-1] = 0.0
        levels, errs = [vals], [0.0]
    out = []
    prev = np.ones(grid.size)
    for k, (vals, err) in enumerate(zip(levels, errs), start=1):
        out.append(RadialProfile(geom, k, grid, vals, method, err, prev))
        prev = vals
    return out


def moment_tube(geom: TubeGeometry, k: int, grid_size: int = DEFAULT_GRID_SIZE,
                acc: KernelAccuracy | None = None, method: str = "quadrature") -> RadialProfile:
    if not isinstance(geom, TubeGeometry):
        raise DomainError("moment_tube needs a TubeGeometry")
    return moment_hierarchy(geom, k, grid_size, acc, method)[-1]


def moment_ball(geom: BallGeometry, k: int, grid_size: int = DEFAULT_GRID_SIZE,
                acc: KernelAccuracy | None = None, method: str = "quadrature") -> RadialProfile:
    if not isinstance(geom, BallGeometry):
        raise DomainError("moment_ball needs a BallGeometry")
    return moment_hierarchy(geom, k, grid_size, acc, method)[-1]


# ---------------------------------------------------------------- residual


def pde_residual(profile: RadialProfile, collar: float | None = None) -> float:
    """Max |u'' - trS u' + k u_{k-1}| by central differences on the interior.

    The two grid points nearest each end are skipped.  For the ball, points
    with t < ``collar`` (default 5% of the radius) are skipped as well, since
    cot t is large there.
    """
    grid, u = profile.grid, profile.values
    if grid.size < 5:
        raise GridError("residual needs at least 5 grid points")
    if profile.k < 1:
        raise DomainError("residual is defined for k >= 1")
    prev = profile.previous if profile.previous is not None else np.ones_like(u)
    if profile.k > 1 and profile.previous is None:
        raise DomainError("profile of order k > 1 must carry its previous level")
    h_left = grid[1:-1] - grid[:-2]
    h_right = grid[2:] - grid[1:-1]
    # nonuniform three-point formulas; they reduce to the usual ones on uniform grids
    d1 = (h_left**2 * u[2:] - h_right**2 * u[:-2] + (h_right**2 - h_left**2) * u[1:-1]) / (
        h_left * h_right * (h_left + h_right))
    d2 = 2 * (h_left * u[2:] - (h_left + h_right) * u[1:-1] + h_right * u[:-2]) / (
        h_left * h_right * (h_left + h_right))
    r = grid[1:-1]
    n = profile.geometry.n
    if isinstance(profile.geometry, BallGeometry):
        trace = -(n - 1) * np.cos(r) / np.sin(r)
    else:
        trace = (n - 1) * np.tan(r)
    res = np.abs(d2 - trace * d1 + profile.k * prev[1:-1])
    keep = np.zeros(res.size, dtype=bool)
    keep[1:-1] = True
    if isinstance(profile.geometry, BallGeometry):
        c = 0.05 * profile.geometry.rho if collar is None else collar
        keep &= r >= c
    if not np.any(keep):
        raise GridError("no interior points left after excluding the end points")
    return float(np.max(res[keep]))
