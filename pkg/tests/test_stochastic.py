import math

import numpy as np
import pytest

from sphexit import _kernels
from sphexit.errors import DomainError, NonConvergenceError
from sphexit.exit_solver import exit_time_ball, exit_time_tube, moment_ball, moment_tube, upper_bound_G
from sphexit.geometry import BallGeometry, TubeGeometry
from sphexit.stochastic import (SimulationConfig, convergence_sweep, sample_exit_times, simulate,
                                simulate_exit_ball, simulate_exit_tube, summarize, sweep_seed)

QUARTER = math.pi / 4
TUBE2 = TubeGeometry(2, QUARTER)
BALL2 = BallGeometry(2, QUARTER)


def within(stats_value, se, target, z=3.0):
    return abs(stats_value - target) <= z * se


def test_config_validation():
    with pytest.raises(DomainError):
        SimulationConfig(TUBE2, QUARTER, 10, 1e-3)
    with pytest.raises(DomainError):
        SimulationConfig(TUBE2, -QUARTER, 10, 1e-3)
    with pytest.raises(DomainError):
        SimulationConfig(BALL2, QUARTER, 10, 1e-3)
    with pytest.raises(DomainError):
        SimulationConfig(BALL2, -0.1, 10, 1e-3)
    for kw in [dict(dt=0.0), dict(dt=float("nan")), dict(paths=0), dict(streams=0), dict(seed=-1),
               dict(generator="ito"), dict(max_steps=0)]:
        args = dict(geometry=TUBE2, start=0.0, paths=10, dt=1e-3)
        args.update(kw)
        with pytest.raises(DomainError):
            SimulationConfig(**args)
    cfg = SimulationConfig(TUBE2, 0.0, 10, 1e-3)
    assert cfg.max_steps == int(1e9 / 1e-3)


def test_summarize_moments():
    cfg = SimulationConfig(TUBE2, 0.0, 4, 1e-3)
    st = summarize(np.array([1.0, 2.0, 3.0, 4.0]), 3, cfg)
    assert st.count == 4 and st.mean == 2.5 and st.raw_moments[0] == st.mean
    assert st.raw_moments[1] == pytest.approx(7.5) and st.raw_moments[2] == pytest.approx(25.0)
    assert st.variance == pytest.approx(np.var([1, 2, 3, 4], ddof=1))
    assert st.std_errors[0] == pytest.approx(math.sqrt(st.variance / 4))
    with pytest.raises(DomainError):
        summarize(np.ones(3), 0, cfg)


def test_deterministic_and_independent_of_workers():
    cfg = SimulationConfig(TubeGeometry(3, 0.5), 0.1, 3000, 1e-4, seed=99, streams=5)
    a, _ = sample_exit_times(cfg, workers=1)
    b, _ = sample_exit_times(cfg, workers=5)
    c, _ = sample_exit_times(cfg, workers=2)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, c)
    assert simulate(cfg, 3, workers=1) == simulate(cfg, 3, workers=3)
    assert np.all(a > 0)


def test_stream_assignment():
    # path i runs on stream i % streams, stream s drawing from the s-th spawned generator
    cfg = SimulationConfig(TUBE2, 0.0, 7, 1e-3, seed=5, streams=3)
    times, _ = sample_exit_times(cfg)
    for s, seq in enumerate(np.random.SeedSequence(5).spawn(3)):
        own = np.empty(len(range(s, 7, 3)))
        _kernels.run_stream(np.random.Generator(np.random.PCG64(seq)), False, 2, QUARTER, 0.0,
                            own.size, 1e-3, math.sqrt(2e-3), 1.0, 1.0, False, cfg.max_steps, own)
        np.testing.assert_array_equal(times[s::3], own)


def test_mirrored_start_with_mirrored_noise_gives_identical_samples():
    g = TubeGeometry(4, 0.6)
    plus = SimulationConfig(g, 0.2, 2000, 1e-4, seed=3)
    minus = SimulationConfig(g, -0.2, 2000, 1e-4, seed=3, mirror=True)
    np.testing.assert_array_equal(sample_exit_times(plus)[0], sample_exit_times(minus)[0])


def test_mirrored_start_statistically_symmetric():
    g = TubeGeometry(4, 0.6)
    a = simulate(SimulationConfig(g, 0.2, 4000, 1e-4, seed=11))
    b = simulate(SimulationConfig(g, -0.2, 4000, 1e-4, seed=12))
    assert abs(a.mean - b.mean) <= 3 * math.hypot(a.std_errors[0], b.std_errors[0])


def test_start_on_boundary_exits_immediately():
    st = simulate(SimulationConfig(TUBE2, QUARTER - 1e-12, 500, 1e-5, seed=1))
    assert 0 < st.mean < 10 * 1e-5


def test_tube_mean_and_second_moment_n2():
    st = simulate_exit_tube(SimulationConfig(TUBE2, 0.0, 20000, 1e-4, seed=42), k_max=2)
    assert within(st.mean, st.std_errors[0], exit_time_tube(TUBE2, 0.0))
    assert within(st.raw_moments[1], st.std_errors[1], moment_tube(TUBE2, 2).values[0])


def test_ball_mean_and_second_moment_n2():
    st = simulate_exit_ball(SimulationConfig(BALL2, 0.0, 20000, 1e-4, seed=7), k_max=2)
    assert within(st.mean, st.std_errors[0], exit_time_ball(BALL2, 0.0))
    assert within(st.raw_moments[1], st.std_errors[1], moment_ball(BALL2, 2).values[0])


def test_ball_high_dimension_under_G():
    b = BallGeometry(50, 0.8)
    st = simulate_exit_ball(SimulationConfig(b, 0.1, 4000, 1e-5, seed=2))
    assert st.mean <= upper_bound_G(b) + 3 * st.std_errors[0]
    assert within(st.mean, st.std_errors[0], exit_time_ball(b, 0.1))


def test_half_laplacian_doubles_times():
    st = simulate(SimulationConfig(TUBE2, 0.0, 10000, 1e-4, seed=8, generator="half-laplacian"))
    assert within(st.mean, st.std_errors[0], 2 * exit_time_tube(TUBE2, 0.0))


def test_antithetic_pairs():
    cfg = SimulationConfig(TubeGeometry(3, 0.7), 0.3, 8001, 1e-4, seed=4, antithetic=True, streams=3)
    st = simulate(cfg)
    assert st.count == 8001
    assert within(st.mean, 2 * st.std_errors[0], exit_time_tube(cfg.geometry, 0.3))
    assert simulate(cfg, workers=1) == simulate(cfg, workers=3)


def test_kind_specific_entry_points():
    with pytest.raises(DomainError):
        simulate_exit_tube(SimulationConfig(BALL2, 0.0, 10, 1e-3))
    with pytest.raises(DomainError):
        simulate_exit_ball(SimulationConfig(TUBE2, 0.0, 10, 1e-3))


def test_step_cap_flags_nonconvergence():
    st = simulate(SimulationConfig(TubeGeometry(10, 1.2), 0.0, 20, 1e-4, max_steps=5))
    assert st.nonconverged == 20 and not st.converged
    assert np.isclose(st.mean, 5e-4)
    with pytest.raises(NonConvergenceError):
        st.require_converged()


def test_convergence_sweep():
    cfg = SimulationConfig(TUBE2, 0.0, 3000, 1e-3, seed=21)
    rows = convergence_sweep(cfg, [1e-3])
    direct = simulate_exit_tube(cfg, 1)
    assert len(rows) == 1
    assert rows[0].mean == direct.mean and rows[0].std_error == direct.std_errors[0]
    rows = convergence_sweep(cfg, [1e-2, 1e-3])
    assert [r.dt for r in rows] == [1e-2, 1e-3]
    assert rows[1].seed == sweep_seed(21, 1) != 21
    assert rows == convergence_sweep(cfg, [1e-2, 1e-3])
    for bad in ([], [1e-3, 1e-2], [1e-3, 1e-3], [-1e-3]):
        with pytest.raises(DomainError):
            convergence_sweep(cfg, bad)


def test_bias_shrinks_with_step():
    # the tube target for n = 3 comes from the quadrature oracle
    g = TubeGeometry(3, QUARTER)
    target = exit_time_tube(g, 0.0)
    rows = convergence_sweep(SimulationConfig(g, 0.0, 6000, 1e-2, seed=30), [1e-2, 1e-4])
    assert abs(rows[1].mean - target) <= 3 * rows[1].std_error
    assert abs(rows[1].mean - target) <= abs(rows[0].mean - target) + 3 * rows[1].std_error
