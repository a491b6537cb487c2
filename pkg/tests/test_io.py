import json
import math

import numpy as np
import pytest

from sphexit import io
from sphexit.concentration import scan
from sphexit.errors import DomainError
from sphexit.exit_solver import bound_profile, moment_hierarchy
from sphexit.geometry import BallGeometry, TubeGeometry
from sphexit.stochastic import ExitSampleStats, SimulationConfig, simulate


def test_fmt_round_trips_doubles():
    for x in [0.1, math.pi, 1e-300, 5e-324, 1.7976931348623157e308, -2.5]:
        assert float(io.fmt(x)) == x
    assert io.fmt(True) == "true" and io.fmt(np.bool_(False)) == "false"
    assert io.fmt(np.int64(7)) == "7"


@pytest.mark.parametrize("geom", [TubeGeometry(5, 0.9), BallGeometry(3, 0.6)])
def test_profile_json_round_trip_is_byte_exact(geom):
    prof = moment_hierarchy(geom, 2, 65)[-1]
    text = io.profile_to_json(prof)
    back = io.profile_from_json(text)
    assert io.profile_to_json(back) == text
    np.testing.assert_array_equal(back.values, prof.values)
    np.testing.assert_array_equal(back.previous, prof.previous)
    assert back.geometry == prof.geometry and back.k == 2


def test_profile_csv_layout():
    geom = BallGeometry(3, 0.6)
    prof = moment_hierarchy(geom, 1, 17)[0]
    lines = io.profile_to_csv(prof).splitlines()
    assert lines[0] == "radial_coord,value,kind,k,n,delta,method"
    assert len(lines) == 18
    first = lines[1].split(",")
    assert first[2:5] == ["ball", "1", "3"]
    assert float(first[5]) == geom.delta
    assert float(first[1]) == prof.values[0]
    bp = io.profile_to_csv(bound_profile(TubeGeometry(4, 0.5), 1, "lower-F")).splitlines()
    assert bp[1].split(",")[2] == "lower-F" and bp[1].split(",")[6] == "lower-F"


def test_geometry_dict_rejects_unknown_kind():
    with pytest.raises(DomainError):
        io.geometry_from_dict({"kind": "annulus", "n": 2, "delta": 0.3})


def test_stats_serialization():
    st = simulate(SimulationConfig(TubeGeometry(2, 0.5), 0.0, 200, 1e-3, seed=3), k_max=3)
    d = json.loads(io.stats_to_json(st))
    assert d["mean"] == st.mean and d["raw_moments"] == list(st.raw_moments)
    assert d["seed"] == 3 and d["streams"] == 1 and d["dt"] == 1e-3
    header, row = io.stats_to_csv(st).splitlines()
    assert header.split(",") == ["count", "mean", "variance", "moment_1", "moment_2", "moment_3",
                                 "std_error_1", "std_error_2", "std_error_3", "seed", "streams",
                                 "dt", "nonconverged"]
    assert row == io.stats_csv_row(st)
    assert float(row.split(",")[1]) == st.mean


def test_non_finite_values_become_null():
    st = ExitSampleStats(1, 0.5, float("nan"), (0.5,), (float("nan"),), 1, 1, 1e-3)
    d = json.loads(io.stats_to_json(st))
    assert d["variance"] is None and d["std_errors"] == [None]


def test_scan_csv_and_json():
    rows = scan([2, 60], [0.1, 0.7])
    text = io.scan_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == "n,delta,F_mid,G,u_center,v_center,tube_frac,levy_bound,volume_cap,cap_defined"
    assert len(lines) == 5
    assert lines[1].endswith(",nan,false")
    assert text == io.scan_to_csv(scan([2, 60], [0.1, 0.7]))
    objs = json.loads(io.scan_to_json(rows))
    assert objs[0]["volume_cap"] is None and objs[0]["cap_defined"] is False
    assert objs[-1]["tube_frac"] == rows[-1].tube_volume_fraction
