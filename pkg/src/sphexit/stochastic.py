"""First-passage Monte Carlo for the radial exit-time diffusions.

The default generator is the full Laplacian, so the radial processes are

    tube:  dS = -(n-1) tan S dt + sqrt(2) dW,   exit when |S| >= delta
    ball:  dT =  (n-1) cot T dt + sqrt(2) dW,   exit when T >= rho

and the sample mean estimates the solution of Delta u + 1 = 0 directly.  The
``half-laplacian`` generator (Delta / 2) halves drift and variance, which
doubles every exit time.

Randomness: the seed expands into ``streams`` independent PCG64 generators
and path i is simulated on stream ``i % streams``.  Streams run on a thread
pool whose size (``workers``) never changes the result.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, NonConvergenceError
from .geometry import BallGeometry, TubeGeometry

DEFAULT_SEED = 20240611
GENERATORS = ("laplacian", "half-laplacian")


@dataclass(frozen=True)
class SimulationConfig:
    geometry: TubeGeometry | BallGeometry
    start: float
    paths: int
    dt: float
    seed: int = DEFAULT_SEED
    streams: int = 1
    generator: str = "laplacian"
    antithetic: bool = False
    # flip the sign of every Gaussian increment (mirror-image noise)
    mirror: bool = False
    max_steps: int | None = None

    def __post_init__(self):
        g = self.geometry
        if not isinstance(g, (TubeGeometry, BallGeometry)):
            raise DomainError("geometry must be a TubeGeometry or BallGeometry")
        start = float(self.start)
        if g.kind == "tube" and not abs(start) < g.delta:
            raise DomainError(f"tube start must satisfy |s0| < delta = {g.delta!r}, got {start!r}")
        if g.kind == "ball" and not 0.0 <= start < g.rho:
            raise DomainError(f"ball start must satisfy 0 <= t0 < rho = {g.rho!r}, got {start!r}")
        if int(self.paths) != self.paths or self.paths < 1:
            raise DomainError("paths must be an integer >= 1")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise DomainError("dt must be a positive finite number")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an integer in [0, 2**64)")
        if int(self.streams) != self.streams or self.streams < 1:
            raise DomainError("streams must be an integer >= 1")
        if self.generator not in GENERATORS:
            raise DomainError(f"generator must be one of {GENERATORS}")
        cap = self.max_steps if self.max_steps is not None else int(1e9 / self.dt)
        if int(cap) != cap or cap < 1:
            raise DomainError("max_steps must be an integer >= 1")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "paths", int(self.paths))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "streams", int(self.streams))
        object.__setattr__(self, "max_steps", int(cap))

    def with_dt(self, dt: float, seed: int | None = None) -> "SimulationConfig":
        return SimulationConfig(self.geometry, self.start, self.paths, dt,
                                self.seed if seed is None else seed, self.streams,
                                self.generator, self.antithetic, self.mirror,
                                None if self.max_steps == int(1e9 / self.dt) else self.max_steps)


@dataclass(frozen=True)
class ExitSampleStats:
    count: int
    mean: float
    variance: float
    raw_moments: tuple
    std_errors: tuple
    seed: int
    streams: int
    dt: float
    nonconverged: int = 0
    samples: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def converged(self) -> bool:
        return self.nonconverged == 0

    def require_converged(self) -> "ExitSampleStats":
        if self.nonconverged:
            raise NonConvergenceError(
                f"{self.nonconverged} of {self.count} paths hit the step cap before exiting")
        return self


def summarize(times: np.ndarray, k_max: int, cfg: SimulationConfig, capped: int = 0,
              keep_samples: bool = False) -> ExitSampleStats:
    """Moment statistics of an exit-time sample, reduced in path order."""
    if int(k_max) != k_max or k_max < 1:
        raise DomainError("k_max must be an integer >= 1")
    times = np.asarray(times, dtype=float)
    m = times.size
    raw, se = [], []
    power = np.ones_like(times)
    for _ in range(int(k_max)):
        power = power * times
        raw.append(float(np.mean(power)))
        se.append(float(np.std(power, ddof=1) / math.sqrt(m)) if m > 1 else math.inf)
    variance = float(np.var(times, ddof=1)) if m > 1 else 0.0
    return ExitSampleStats(m, raw[0], variance, tuple(raw), tuple(se), cfg.seed, cfg.streams,
                           cfg.dt, int(capped), times if keep_samples else None)


def _stream_generators(seed: int, streams: int):
    return [np.random.Generator(np.random.PCG64(s))
            for s in np.random.SeedSequence(seed).spawn(streams)]


def sample_exit_times(cfg: SimulationConfig, workers: int | None = None):
    """Simulate every path of ``cfg``; return (times in path order, capped count)."""
    g = cfg.geometry
    if cfg.generator == "laplacian":
        sigma, drift = math.sqrt(2.0 * cfg.dt), 1.0
    else:
        sigma, drift = math.sqrt(cfg.dt), 0.5
    sign = -1.0 if cfg.mirror else 1.0
    ball = g.kind == "ball"
    gens = _stream_generators(cfg.seed, cfg.streams)
    counts = [len(range(s, cfg.paths, cfg.streams)) for s in range(cfg.streams)]
    buffers = [np.empty(c) for c in counts]

    def run(s):
        if counts[s] == 0:
            return 0
        return _kernels.run_stream(gens[s], ball, g.n, g.boundary, cfg.start, counts[s],
                                   cfg.dt, sigma, drift, sign, cfg.antithetic,
                                   cfg.max_steps, buffers[s])

    workers = cfg.streams if workers is None else int(workers)
    if workers < 1:
        raise DomainError("workers must be >= 1")
    if workers == 1 or cfg.streams == 1:
        capped = [run(s) for s in range(cfg.streams)]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, cfg.streams)) as pool:
            capped = list(pool.map(run, range(cfg.streams)))
    times = np.empty(cfg.paths)
    for s in range(cfg.streams):
        times[s::cfg.streams] = buffers[s]
    return times, int(sum(capped))


def simulate(cfg: SimulationConfig, k_max: int = 2, workers: int | None = None,
             keep_samples: bool = False) -> ExitSampleStats:
    times, capped = sample_exit_times(cfg, workers)
    return summarize(times, k_max, cfg, capped, keep_samples)


def simulate_exit_tube(cfg: SimulationConfig, k_max: int = 2, workers: int | None = None,
                       keep_samples: bool = False) -> ExitSampleStats:
    if cfg.geometry.kind != "tube":
        raise DomainError("simulate_exit_tube needs a TubeGeometry")
    return simulate(cfg, k_max, workers, keep_samples)


def simulate_exit_ball(cfg: SimulationConfig, k_max: int = 2, workers: int | None = None,
                       keep_samples: bool = False) -> ExitSampleStats:
    if cfg.geometry.kind != "ball":
        raise DomainError("simulate_exit_ball needs a BallGeometry")
    return simulate(cfg, k_max, workers, keep_samples)


@dataclass(frozen=True)
class SweepRow:
    dt: float
    mean: float
    std_error: float
    seed: int


def sweep_seed(seed: int, index: int) -> int:
    """Sub-seed for the ``index``-th step size; index 0 keeps the master seed."""
    if index == 0:
        return seed
    return int(np.random.SeedSequence([seed, index]).generate_state(2, np.uint64)[0])


def convergence_sweep(cfg: SimulationConfig, dt_list, workers: int | None = None):
    dts = [float(d) for d in dt_list]
    if not dts:
        raise DomainError("dt_list must not be empty")
    if any(d <= 0 for d in dts) or any(b >= a for a, b in zip(dts, dts[1:])):
        raise DomainError("dt_list must be strictly decreasing positive step sizes")
    rows = []
    for i, dt in enumerate(dts):
        sub = cfg.with_dt(dt, sweep_seed(cfg.seed, i))
        st = simulate(sub, 1, workers).require_converged()
        rows.append(SweepRow(dt, st.mean, st.std_errors[0], sub.seed))
    return rows
