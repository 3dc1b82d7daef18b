import numpy as np
import pytest

from coopisac import filters as flt
from coopisac import metrics as mt
from coopisac import oracles
from coopisac.errors import SingularError
from conftest import rand_herm


def test_zero_beams(desk, desk_state):
    ef = flt.build_ef(mt.BeamformerSet.zeros(desk), desk_state["links"], desk_state["statics"], desk)
    assert np.all(ef.e == 0)
    assert np.allclose(ef.f, desk.noise_power_radar * np.eye(4))


def test_no_clutter_no_interference(rng):
    raw = oracles.small_real_instance(0)[0].to_dict()
    raw.update(si_coeff=[0.0], antenna_count=3)
    from coopisac.scenario import validate
    from coopisac.channel import gen_static_channels, link_state

    s = validate(raw)
    links = link_state(s, np.repeat(np.asarray(s.q_init)[:, None], s.num_slots, 1))
    w = rng.standard_normal((s.num_slots, 1, 1, 3)) + 0j
    b = mt.BeamformerSet.from_vectors(w, np.zeros_like(w))
    ef = flt.build_ef(b, links, gen_static_channels(s), s)
    assert np.array_equal(ef.f, np.broadcast_to(s.noise_power_radar * np.eye(3), ef.f.shape))


def test_quotient_matches_metrics(rng):
    scen, links, st, beams, filters = oracles.random_state(rng)
    ef = flt.build_ef(beams, links, st, scen)
    u = filters.u
    q = (np.real(np.einsum("njkp,njkpq,njkq->njk", u.conj(), ef.e, u))
         / np.real(np.einsum("njkp,njkpq,njkq->njk", u.conj(), ef.f, u)))
    _, per = mt.sensing_sinr_all(beams, filters, links, st, scen)
    assert np.allclose(q, per, rtol=1e-10)


def test_isotropic_and_matched():
    lam, u = flt.optimal_filter(np.eye(3), np.eye(3))
    assert lam == pytest.approx(1.0)
    assert np.linalg.norm(u) == pytest.approx(1.0)
    e = np.array([1.0, 2.0j, -1.0])
    lam, u = flt.optimal_filter(np.outer(e, e.conj()), np.eye(3))
    assert lam == pytest.approx(6.0)
    assert abs(np.vdot(u, e)) == pytest.approx(np.sqrt(6.0))


def test_optimality_random_search():
    r = oracles.filter_random_search(cells=24, samples=10_000)
    assert r["min_rel_margin"] >= -1e-12
    assert r["max_rel_eig_err"] <= 1e-9


def test_grid_two_antennas(rng):
    e, f = rand_herm(rng, 2, pd=True), rand_herm(rng, 2, pd=True)
    lam, u = flt.optimal_filter(e, f)
    th, ph = np.meshgrid(np.linspace(0, np.pi / 2, 301), np.linspace(0, 2 * np.pi, 601))
    v = np.stack([np.cos(th), np.sin(th) * np.exp(1j * ph)], -1).reshape(-1, 2)
    q = (np.real(np.einsum("sp,pq,sq->s", v.conj(), e, v)) / np.real(np.einsum("sp,pq,sq->s", v.conj(), f, v)))
    assert lam >= q.max() - 1e-12
    assert lam == pytest.approx(q.max(), rel=1e-4)


def test_singular_interference():
    ef = flt.EchoCovariances(e=np.eye(2)[None, None, None], f=np.zeros((1, 1, 1, 2, 2)))
    with pytest.raises(SingularError):
        flt.optimal_filters(ef)


def test_check_p6():
    v = flt.check_p6(np.array([[[0.5], [0.5]]]), 1.0)
    assert v.feasible and v.margin[0, 0] == pytest.approx(0.0)
    v = flt.check_p6(np.array([[[0.1]]]), 1.0)
    assert not v.feasible and v.margin[0, 0] == pytest.approx(-0.9)


def test_check_p6_single_bs_matches_sinr(rng):
    raw = oracles.random_state(rng)
    scen = raw[0]
    from coopisac.scenario import validate

    one = scen.to_dict()
    one.update(bs_positions=one["bs_positions"][:1], si_coeff=one["si_coeff"][:1],
               inter_bs_coeff=[[0.0]])
    s1 = validate(one)
    _, links, st, beams, _ = oracles.random_state(rng, s1)
    upd = flt.update_filters(beams, links, st, s1, mt.FilterSet.matched(links), safeguard=False)
    agg, _ = mt.sensing_sinr_all(beams, upd.filters, links, st, s1)
    verdict = flt.check_p6(upd.quotients, 0.01)
    assert np.allclose(verdict.margin, agg - 0.01, atol=1e-8)


def test_update_filters_safeguard(rng):
    scen, links, st, beams, filters = oracles.random_state(rng)
    gamma = 1e-3
    upd = flt.update_filters(beams, links, st, scen, filters, gamma)
    assert np.all(upd.after >= np.minimum(upd.before, gamma) * (1 - 1e-12))
    agg, _ = mt.sensing_sinr_all(beams, upd.filters, links, st, scen)
    assert np.allclose(agg, upd.after)
    assert np.allclose(np.linalg.norm(upd.filters.u, axis=-1), 1.0, atol=1e-12)


def test_filter_update_leaves_rate_unchanged(rng, desk, desk_state):
    _, _, _, beams, _ = oracles.random_state(rng)
    before = mt.weighted_sum_rate(beams, desk_state["links"], desk).objective
    flt.update_filters(beams, desk_state["links"], desk_state["statics"], desk, desk_state["filters"])
    assert mt.weighted_sum_rate(beams, desk_state["links"], desk).objective == before
