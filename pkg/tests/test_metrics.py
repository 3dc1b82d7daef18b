import numpy as np
import pytest

from coopisac import metrics as mt
from coopisac import oracles
from coopisac.channel import gen_static_channels, link_state
from coopisac.scenario import desk_scenario, validate


def _single_link_scenario(**kw):
    raw = dict(bs_positions=[[300.0, 300.0]],
               uav_specs=[{"kind": "comm_sensing", "q_init": [100.0, 300.0],
                           "q_final": [500.0, 300.0], "altitude": 100.0}],
               weights=[1.0])
    raw.update(kw)
    base = desk_scenario().to_dict()
    base.update(si_coeff=[1e-11], inter_bs_coeff=[[0.0]])
    base.update(raw)
    return validate(base)


def test_tx_covariance_examples(desk):
    z = mt.BeamformerSet.zeros(desk)
    assert np.all(mt.tx_covariance(z, 0, 0) == 0)
    w_c = np.zeros((desk.num_slots, 2, 1, 4), complex)
    w_c[0, 0, 0, 0] = np.sqrt(10.0)
    b = mt.BeamformerSet.from_vectors(w_c, np.zeros((desk.num_slots, 2, 2, 4), complex))
    x = mt.tx_covariance(b, 0, 0)
    assert np.allclose(x, np.diag([10.0, 0, 0, 0]))


def test_power_accounting(rng):
    scen, _, _, beams, _ = oracles.random_state(rng)
    tr = np.real(np.trace(beams.tx_cov(), axis1=-2, axis2=-1))
    per = (np.sum(np.abs(beams.w_c) ** 2, axis=(-1, -2)) + np.sum(np.abs(beams.w_r) ** 2, axis=(-1, -2)))
    assert np.allclose(tr, per, rtol=1e-13)
    assert np.allclose(beams.power(), tr)


def test_interference_free_sinr():
    s = _single_link_scenario(antenna_count=2)
    q = np.repeat(np.asarray(s.q_init)[:, None], s.num_slots, 1)
    links = link_state(s, q)
    w = np.array([1.0, 2.0j])
    w_c = np.zeros((s.num_slots, 1, 1, 2), complex)
    w_c[:, 0, 0] = w
    b = mt.BeamformerSet.from_vectors(w_c, np.zeros((s.num_slots, 1, 1, 2), complex))
    h = links.h[0, 0, 0]
    expect = abs(np.vdot(h, w)) ** 2 / s.noise_power_comm
    for form in ("vector", "trace"):
        assert mt.comm_sinr(0, 0, b, links, s, form=form) == pytest.approx(expect, rel=1e-12)


def test_vector_and_trace_forms_agree():
    assert oracles.comm_formula_gap(states=100)["max_rel_err"] <= 1e-10


def test_sinr_homogeneity(rng):
    scen, links, _, beams, _ = oracles.random_state(rng)
    quiet = scen.replace(noise_power_comm=1e-300)
    c = 3.7
    scaled = mt.BeamformerSet.from_vectors(c * beams.w_c, c * beams.w_r)
    a = mt.comm_sinr_all(beams, links, quiet)
    b = mt.comm_sinr_all(scaled, links, quiet)
    assert np.allclose(a, b, rtol=1e-10)
    noisy_a = mt.comm_sinr_all(beams, links, scen)
    noisy_b = mt.comm_sinr_all(beams, links, scen.replace(noise_power_comm=2 * scen.noise_power_comm))
    assert np.all(noisy_b <= noisy_a)


def test_rate_arithmetic():
    assert mt.rate(1.0) == pytest.approx(1.0)
    assert mt.rate(0.0) == 0.0
    assert float(np.array([1.0, 3.0]) @ np.array([2.0, 1.0])) == 5.0


def test_weighted_sum_rate(rng, desk, desk_state):
    _, _, _, beams, _ = oracles.random_state(rng)
    rep = mt.weighted_sum_rate(beams, desk_state["links"], desk, weights=[2.0, 1.0])
    assert np.allclose(rep.rates, np.log2(1 + rep.comm_sinr), rtol=1e-12)
    assert np.all(rep.rates[:, 1] == 0)  # sensing-only UAV
    assert np.allclose(rep.slot_rates, rep.rates @ [2.0, 1.0])
    assert rep.objective == pytest.approx(rep.slot_rates.sum())


def test_scalar_monostatic_sensing_sinr():
    s = _single_link_scenario(antenna_count=1, si_coeff=[0.0], inter_bs_coeff=[[0.0]])
    q = np.repeat(np.asarray(s.q_init)[:, None], s.num_slots, 1)
    links = link_state(s, q)
    st = gen_static_channels(s)
    p = 7.0
    w_c = np.full((s.num_slots, 1, 1, 1), np.sqrt(p), complex)
    b = mt.BeamformerSet.from_vectors(w_c, np.zeros((s.num_slots, 1, 1, 1), complex))
    f = mt.FilterSet(np.ones((s.num_slots, 1, 1, 1), complex))
    got = mt.sensing_sinr(0, 0, b, f, links, st, s)
    assert got == pytest.approx(s.rcs_variance * links.rho[0, 0, 0] * p / s.noise_power_radar, rel=1e-12)


def test_sensing_monotone_in_disturbances(rng):
    scen, links, st, beams, filters = oracles.random_state(rng)
    base, _ = mt.sensing_sinr_all(beams, filters, links, st, scen)
    for change in ({"noise_power_radar": 2 * scen.noise_power_radar},
                   {"si_coeff": list(2 * scen.si_coeff)},
                   {"inter_bs_coeff": (2 * scen.inter_bs_coeff).tolist()}):
        worse, _ = mt.sensing_sinr_all(beams, filters, links, st, scen.replace(**change))
        assert np.all(worse <= base * (1 + 1e-12))
    louder, _ = mt.sensing_sinr_all(beams, filters, links, st,
                                    scen.replace(noise_power_radar=2 * scen.noise_power_radar))
    assert np.all(louder < base)


def test_sensing_filter_scale_invariance(rng):
    scen, links, st, beams, filters = oracles.random_state(rng)
    a, pa = mt.sensing_sinr_all(beams, filters, links, st, scen)
    b, pb = mt.sensing_sinr_all(beams, mt.FilterSet((2 - 1j) * filters.u), links, st, scen)
    assert np.allclose(a, b, rtol=1e-12) and np.allclose(pa, pb, rtol=1e-12)


def test_margin_matches_sinr(rng):
    scen, links, st, beams, filters = oracles.random_state(rng)
    gamma = 0.05
    sf = mt.sensing_functionals(filters, links, st, scen)
    agg, _ = mt.sensing_sinr_all(beams, filters, links, st, scen)
    num, den = mt.sensing_components(beams.tx_cov(), sf)
    margin = mt.sensing_margin(beams, sf, gamma)
    assert np.allclose(margin, num.sum(1) - gamma * den.sum(1), rtol=1e-9, atol=1e-25)
    assert np.array_equal(margin >= 0, agg >= gamma)


def test_monte_carlo_oracles_small():
    assert oracles.tx_cov_monte_carlo(states=3)["max_rel_err"] <= 0.02
    assert oracles.sensing_monte_carlo(states=3)["max_rel_err"] <= 0.02


def test_metrics_csv_and_json(desk, desk_state):
    b = mt.BeamformerSet.zeros(desk)
    b.cov_c[:, 0, 0] = np.eye(4)
    rep = mt.weighted_sum_rate(b, desk_state["links"], desk)
    text = rep.to_csv([True, False])
    lines = text.strip().split("\n")
    assert lines[0] == "slot,uav,comm_sinr_db,rate,sens_sinr_db"
    assert len(lines) == 1 + desk.num_slots * desk.num_uavs
    assert float(lines[1].split(",")[3]) == rep.rates[0, 0]
    assert "objective" in rep.to_json()
