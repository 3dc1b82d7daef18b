import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopisac import scenario as scn
from coopisac.errors import PairwiseError, RangeError, ReachabilityError


def test_paper_default_is_valid():
    s = scn.paper_scenario()
    assert (s.num_bs, s.antenna_count, s.num_uavs, s.num_comm, s.num_slots) == (4, 8, 4, 2, 30)
    assert s.vmax == 20.0 and s.max_power == 10.0
    assert np.allclose(s.altitudes, 100.0)
    assert s.ref_path_gain == pytest.approx(10 ** -4.5, rel=1e-12)
    assert s.noise_power_comm == pytest.approx(1e-10, rel=1e-12)
    assert np.allclose(s.si_coeff, 1e-11)


def test_zero_travel_always_reachable():
    raw = scn.desk_config(vmax=1e-3)
    for u in raw["uav_specs"]:
        u["q_final"] = list(u["q_init"])
    s = scn.validate(raw)
    assert np.allclose(s.q_init, s.q_final)


def test_unreachable_endpoint():
    raw = scn.desk_config(num_slots=2, horizon=2.0, vmax=20.0)
    raw["uav_specs"] = [{"kind": "comm_sensing", "q_init": [0, 0], "q_final": [600, 0], "altitude": 100}]
    raw["weights"] = [1.0]
    with pytest.raises(ReachabilityError):
        scn.validate(raw)


def test_range_errors():
    with pytest.raises(RangeError):
        scn.validate(scn.desk_config(max_power=-1.0))
    with pytest.raises(RangeError):
        scn.validate(scn.desk_config(num_slots=1))


def test_pairwise_start_violation():
    raw = scn.desk_config()
    raw["uav_specs"][1]["q_init"] = [55.0, 150.0]
    with pytest.raises(PairwiseError):
        scn.validate(raw)


def test_default_layout():
    assert scn.default_bs_layout(((0, 600), (0, 600)), 1) == [[300.0, 300.0]]
    four = scn.default_bs_layout(((0, 600), (0, 600)), 4)
    assert four == [[150.0, 150.0], [150.0, 450.0], [450.0, 150.0], [450.0, 450.0]]
    assert scn.default_bs_layout(((0, 600), (0, 600)), 3) == four[:3]


def test_round_trip_bit_exact(tmp_path):
    s = scn.paper_scenario()
    path = tmp_path / "s.json"
    scn.save(s, path)
    t = scn.load(path)
    assert t == s
    assert t.digest() == s.digest()
    assert json.loads(t.to_json()) == json.loads(s.to_json())


def test_replace_changes_digest():
    s = scn.desk_scenario()
    assert s.replace(rng_seed=7).digest() != s.digest()
    assert s.replace(rng_seed=0).digest() == s.digest()


@given(st.floats(min_value=-150, max_value=50, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_db_conversion(db):
    assert scn.db2lin(db) == pytest.approx(10 ** (db / 10), rel=1e-12)
    assert scn.lin2db(scn.db2lin(db)) == pytest.approx(db, abs=1e-9)


def test_step_budget(desk):
    assert desk.step_budget == pytest.approx(desk.vmax * desk.horizon / desk.num_slots)
