import numpy as np
import pytest

from coopisac import channel as ch
from coopisac.scenario import EchoModel, desk_scenario


def test_aod_examples():
    assert ch.aod([0, 0], [0, 0], 100) == pytest.approx(0.0)
    assert ch.aod([100, 0], [0, 0], 100) == pytest.approx(np.pi / 4)
    assert ch.aod([300, 0], [0, 0], 100) == pytest.approx(np.arccos(1 / np.sqrt(10)), abs=1e-12)
    assert ch.aod([300, 0], [0, 0], 100) == pytest.approx(1.2490, abs=1e-4)


def test_steering_examples():
    assert np.allclose(ch.steering(np.pi / 2, 5, 0.05, 0.1), np.ones(5))
    assert np.allclose(ch.steering(0.3, 1, 0.05, 0.1), [1.0])
    assert np.allclose(ch.steering(0.0, 4, 0.05, 0.1), [1, -1, 1, -1])


def test_path_loss():
    kappa = 10 ** -4.5
    assert ch.path_loss([1, 0], [0, 0], 0.0, kappa) == pytest.approx(kappa)
    assert ch.path_loss([0, 0], [0, 0], 100, kappa) == pytest.approx(kappa * 1e-4, rel=1e-12)
    b1 = ch.path_loss([30, 40], [0, 0], 0.0, kappa)
    b2 = ch.path_loss([60, 80], [0, 0], 0.0, kappa)
    assert b2 == pytest.approx(b1 / 4)


def test_channel_vector_scalar_case():
    s = desk_scenario(antenna_count=1)
    h = ch.channel_vector([150.0, 200.0], s.bs_positions[0], 100.0, s)
    assert np.allclose(h.h, [np.sqrt(10 ** -4.5 * 1e-4)])


def test_channel_norm_identity(rng, desk):
    for _ in range(100):
        q = rng.uniform(0, 600, 2)
        v = rng.uniform(0, 600, 2)
        hv = ch.channel_vector(q, v, rng.uniform(50, 200), desk)
        assert np.vdot(hv.h, hv.h).real == pytest.approx(desk.antenna_count * hv.beta, rel=1e-12)


def test_broadside_channel_is_flat():
    s = desk_scenario()
    # theta = pi/2 needs H -> 0 relative to range; use a far point at tiny altitude
    hv = ch.channel_vector([1e7, 0.0], [0.0, 0.0], 1e-9, s)
    assert np.allclose(hv.h, hv.h[0], rtol=1e-6)


def test_response_matrix_rank_one(rng, desk):
    for _ in range(100):
        r = ch.response_matrix(rng.uniform(0, 600, 2), rng.uniform(0, 600, 2), 100.0, desk)
        a = r.matrix
        assert np.allclose(a, a.conj().T)
        w = np.sort(np.linalg.eigvalsh(a))[::-1]
        assert abs(w[1]) <= 1e-10 * np.linalg.norm(a, 2)


def test_round_trip_echo_gain():
    s = desk_scenario(echo_model="round_trip", antenna_count=1)
    assert s.echo_model is EchoModel.ROUND_TRIP
    r = ch.response_matrix([0, 0], [0, 0], 100.0, s)
    assert r.rho == pytest.approx(1e-17, rel=1e-9)
    assert np.allclose(r.matrix, [[np.sqrt(1e-17)]])
    one = desk_scenario()
    assert ch.response_matrix([0, 0], [0, 0], 100.0, one).rho == pytest.approx(10 ** -4.5 * 1e-4)


def test_static_channels_deterministic():
    s = desk_scenario()
    a, b = ch.gen_static_channels(s), ch.gen_static_channels(s)
    assert np.array_equal(a.h_si, b.h_si) and np.array_equal(a.g, b.g)
    c = ch.gen_static_channels(s.replace(rng_seed=1))
    assert np.linalg.norm(a.h_si - c.h_si) > 0
    assert np.all(a.g[np.arange(2), np.arange(2)] == 0)


def test_static_channel_variance():
    hits = 0
    for seed in range(100):
        s = desk_scenario(antenna_count=64, rng_seed=seed)
        hsi = ch.gen_static_channels(s).h_si
        v = np.var(hsi[0])
        hits += 0.9 <= v <= 1.1
    assert hits >= 99


def test_link_state_shapes(desk, desk_state):
    links = desk_state["links"]
    n, m, k, l = desk.num_slots, desk.num_bs, desk.num_uavs, desk.antenna_count
    assert links.h.shape == (n, m, k, l)
    assert np.allclose(np.abs(links.a), 1.0)
    assert np.all((links.cos_theta > 0) & (links.cos_theta <= 1))
    assert np.allclose(np.sum(np.abs(links.h) ** 2, -1), l * links.beta)
