import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from conftest import quad_cos_power
from sphexit.concentration import (levy_lower_bound, rigidity_volume_cap, scan,
                                   sphere_theorem_threshold, tube_tail_fraction,
                                   tube_volume_fraction, volume_fraction_table)
from sphexit.errors import DomainError
from sphexit.exit_solver import exit_time_ball, exit_time_tube, lower_bound_F, upper_bound_G
from sphexit.geometry import HALF_PI, TubeGeometry, log_sphere_volume, sphere_volume


def test_volume_fraction_examples():
    assert tube_volume_fraction(TubeGeometry(2, HALF_PI - 1e-12)) == pytest.approx(1.0, abs=1e-9)
    assert tube_volume_fraction(TubeGeometry(2, math.pi / 6)) == pytest.approx(0.5, rel=1e-14)
    f51 = tube_volume_fraction(TubeGeometry(51, 0.5))
    assert f51 >= 1 - 2 * math.exp(-6.25)
    assert levy_lower_bound(51, 0.5) == pytest.approx(0.9961395, abs=5e-7)


@pytest.mark.parametrize("n", [2, 3, 7, 12])
def test_volume_fraction_against_quadrature(n):
    for d in [0.1, 0.5, 1.0, 1.4]:
        ref = quad_cos_power(n, d) / quad_cos_power(n, HALF_PI)
        assert tube_volume_fraction(TubeGeometry(n, d)) == pytest.approx(ref, rel=1e-12)


def test_fraction_and_tail_against_incomplete_beta():
    for n in [5, 80, 700, 2000]:
        for d in [0.05, 0.3, 0.9]:
            g = TubeGeometry(n, d)
            assert tube_volume_fraction(g) == pytest.approx(
                special.betainc(0.5, 0.5 * n, math.sin(d) ** 2), rel=1e-12)
            assert tube_tail_fraction(g) == pytest.approx(
                special.betaincc(0.5, 0.5 * n, math.sin(d) ** 2), rel=1e-9, abs=1e-300)


def test_fraction_table_matches_pointwise():
    deltas = [0.05, 0.3, 1.2]
    dims, table = volume_fraction_table(300, deltas)
    assert dims[0] == 2 and dims[-1] == 300 and table.shape == (299, 3)
    for n in [2, 3, 50, 299, 300]:
        for j, d in enumerate(deltas):
            assert table[n - 2, j] == tube_volume_fraction(TubeGeometry(n, d))


def test_levy_bound_examples():
    assert abs(levy_lower_bound(2, math.sqrt(2 * math.log(2)))) <= 1e-15
    assert levy_lower_bound(2, 0.1) == pytest.approx(1 - 2 * math.exp(-0.005), rel=1e-15)
    assert levy_lower_bound(2, 0.1) == pytest.approx(-0.9900, abs=1e-4)
    with pytest.raises(DomainError):
        levy_lower_bound(1, 0.3)


def test_rigidity_cap_examples():
    far = rigidity_volume_cap(2, 1.5)
    assert far.defined and far.value == pytest.approx(2 * math.pi / (1 - 2 * math.exp(-1.125)), rel=1e-14)
    assert rigidity_volume_cap(2, 1.5).value > 2 * math.pi
    cap = rigidity_volume_cap(51, 0.5)
    # vol(S^50) = 2 pi^{51/2} / Gamma(51/2), by log-gamma
    ref = math.exp(math.log(2) + 25.5 * math.log(math.pi) - math.lgamma(25.5)) / levy_lower_bound(51, 0.5)
    assert cap.value == pytest.approx(ref, rel=1e-13)
    assert cap.log_value == pytest.approx(math.log(ref), rel=1e-14)
    undefined = rigidity_volume_cap(2, 0.1)
    assert not undefined.defined and math.isnan(undefined.value)
    # huge n: the cap underflows but its logarithm does not
    assert math.isfinite(rigidity_volume_cap(5000, 0.5).log_value)


def test_cap_ratio_range_when_bound_at_least_half():
    for n, d in [(10, 0.8), (51, 0.5), (400, 0.2), (2000, 0.1)]:
        if levy_lower_bound(n, d) >= 0.5:
            ratio = math.exp(rigidity_volume_cap(n, d).log_value - log_sphere_volume(n - 1))
            assert 1 < ratio <= 2


def test_sphere_theorem_threshold():
    vol50 = sphere_volume(50)
    assert sphere_theorem_threshold(51, 0.5, vol50)
    assert not sphere_theorem_threshold(51, 0.5, 0.4 * vol50)
    assert not sphere_theorem_threshold(2, 0.1, 1e300)
    with pytest.raises(DomainError):
        sphere_theorem_threshold(51, 0.5, 0.0)
    # monotone in the volume: switches exactly once
    vols = np.geomspace(0.1 * vol50, 10 * vol50, 200)
    flags = [sphere_theorem_threshold(51, 0.5, v) for v in vols]
    assert sum(a != b for a, b in zip(flags, flags[1:])) == 1 and flags[-1]


@settings(max_examples=80, deadline=None)
@given(n=st.integers(2, 2000), d=st.floats(0.01, 1.55))
def test_levy_inequality_holds_in_model(n, d):
    levy = levy_lower_bound(n, d)
    if levy > 0:
        assert tube_volume_fraction(TubeGeometry(n, d)) >= levy


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 300), a=st.floats(0.01, 1.5), b=st.floats(0.01, 1.5))
def test_fraction_increases_in_delta_and_n(n, a, b):
    lo, hi = sorted((a, b))
    f_lo, f_hi = tube_volume_fraction(TubeGeometry(n, lo)), tube_volume_fraction(TubeGeometry(n, hi))
    assert 0 < f_lo <= f_hi <= 1
    if 1 - f_hi > 1e-12 and hi - lo > 1e-6:
        assert f_lo < f_hi
    g = TubeGeometry(n, hi)
    if 1 - tube_volume_fraction(TubeGeometry(n + 1, hi)) > 1e-12:
        assert tube_volume_fraction(g) < tube_volume_fraction(TubeGeometry(n + 1, hi))


def test_concentration_at_high_dimension():
    assert tube_volume_fraction(TubeGeometry(1000, 0.3)) > 0.999
    assert 1 - tube_volume_fraction(TubeGeometry(100, 0.3)) == pytest.approx(
        tube_tail_fraction(TubeGeometry(100, 0.3)), rel=1e-3)


def test_scan_rows():
    rows = scan([2], [math.pi / 6])
    assert len(rows) == 1
    r = rows[0]
    assert r.tube_volume_fraction == pytest.approx(0.5, rel=1e-14)
    g = TubeGeometry(2, math.pi / 6)
    assert r.F_at_midpoint == lower_bound_F(g, 1, math.pi / 12)
    assert r.G_value == upper_bound_G(g)
    assert r.u_at_center == exit_time_tube(g, 0.0)
    assert r.v_at_center == exit_time_ball(g.complement(), 0.0)
    assert not r.cap_defined and math.isnan(r.volume_cap)


def test_scan_order_and_limits():
    rows = scan([1000, 10, 100], [0.5])
    assert [r.n for r in rows] == [10, 100, 1000]
    assert rows[0].u_at_center < rows[1].u_at_center < rows[2].u_at_center
    assert rows[0].v_at_center > rows[1].v_at_center > rows[2].v_at_center
    rows = scan([3, 2], [0.4, 0.2, 0.4])
    assert [(r.n, r.delta) for r in rows] == [(2, 0.2), (2, 0.4), (3, 0.2), (3, 0.4)]
    with pytest.raises(DomainError):
        scan([2], [])
    with pytest.raises(DomainError):
        scan([], [0.3])
    with pytest.raises(DomainError):
        scan([2], [2.0])


def test_scan_center_exit_time_near_double_range():
    # just below the overflow the wall integrand is not representable but u(0) is
    near = scan([1976], [0.8])[0]
    assert math.isfinite(near.u_at_center) and near.u_at_center > 1e300
    far = scan([1000], [1.2])[0]
    assert far.u_at_center == math.inf and math.isfinite(far.v_at_center)
    assert scan([200], [0.8])[0].u_at_center == exit_time_tube(TubeGeometry(200, 0.8), 0.0)
