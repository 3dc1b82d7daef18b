import numpy as np
import pytest

from coopisac import beamforming as bf
from coopisac import oracles
from coopisac import trajectory as tj
from coopisac.channel import link_state
from coopisac.errors import InfeasibleError
from coopisac.metrics import comm_sinr_all, sensing_functionals, sensing_margin


@pytest.fixture(scope="module")
def desk_beams(desk, desk_state):
    return bf.solve_p3_sca(desk, desk_state["links"], desk_state["sf"]).beams


def test_straight_line(desk):
    tr = tj.TrajectorySet.straight_line(desk)
    assert np.array_equal(tr.q[:, 0], desk.q_init)
    assert np.allclose(tr.q[:, -1], desk.q_final)
    steps = np.linalg.norm(np.diff(tr.q, axis=1), axis=-1)
    assert np.allclose(steps, steps[:, :1])
    assert tj.audit(tr.q, desk).ok(sensing=False)


def test_rate_matches_metrics(rng):
    scen, links, _, beams, _ = oracles.random_state(rng)
    q = rng.uniform(0, 600, size=(scen.num_uavs, scen.num_slots, 2))
    sinr = comm_sinr_all(beams, link_state(scen, q), scen)
    for k in scen.comm_indices:
        for n in range(scen.num_slots):
            r = tj.exact_rate_of_q(q, beams, scen, int(k), n)
            assert r == pytest.approx(np.log2(1 + sinr[n, k]), rel=1e-10)


def test_sensing_value_matches_margin(rng):
    scen, _, statics, beams, filters = oracles.random_state(rng)
    q = rng.uniform(0, 600, size=(scen.num_uavs, scen.num_slots, 2))
    gamma = scen.sensing_threshold
    sur = tj.build_traj_surrogate(scen, beams, filters, statics, q, 1.0, gamma)
    sf = sensing_functionals(filters, link_state(scen, q), statics, scen)
    margin = sensing_margin(beams, sf, gamma)
    assert np.allclose(sur.sensing_value(), margin, rtol=1e-9, atol=1e-12 * np.abs(margin).max())


def test_linearized_slack_at_expansion(rng):
    scen, _, statics, beams, filters = oracles.random_state(rng)
    q = rng.uniform(0, 600, size=(scen.num_uavs, scen.num_slots, 2))
    sur = tj.build_traj_surrogate(scen, beams, filters, statics, q, 1.0)
    expect = sur.sensing_value() / (sur.gamma * sur.noise)
    assert np.allclose(sur.sensing_slack(q), expect, rtol=1e-12, atol=1e-12)


def test_gradients_against_differences():
    assert oracles.rate_gradient_fd(states=5)["max_rel_err"] <= 1e-4
    assert oracles.trace_gradient_fd(states=5)["max_rel_err"] <= 1e-4


def test_free_parameterization_pins(desk):
    q = tj.TrajectorySet.straight_line(desk).q + 3.0
    p = tj.free_parameterization(desk, q, 2.0)
    a, b = p.pins
    z = np.zeros(p.t.shape[1])
    z[a.indices] = b
    pos = p.positions(z)
    assert np.allclose(pos[:, 0], desk.q_init)
    assert np.allclose(pos[:, -1], desk.q_final)
    assert np.allclose(pos[:, 1:-1], q[:, 1:-1])


def test_line_parameterization(desk):
    p = tj.line_parameterization(desk, desk.num_slots)
    s = np.tile(np.linspace(0, 1, desk.num_slots), desk.num_uavs)
    pos = p.positions(s)
    assert np.allclose(pos, tj.TrajectorySet.straight_line(desk).q)
    assert np.allclose(tj.line_progress(desk, pos), s.reshape(desk.num_uavs, -1))


def test_p8_counts(desk, desk_state, desk_beams):
    q = desk_state["traj"].q
    sur = tj.build_traj_surrogate(desk, desk_beams, desk_state["filters"], desk_state["statics"], q, 5.0)
    model = tj.build_p8(sur, desk)
    k, n = desk.num_uavs, desk.num_slots
    pairs = k * (k - 1) // 2
    assert model.counts == {"speed": k * (n - 1), "trust": k * n, "collision": pairs * n,
                            "sensing": k * n, "pins": 2 * k, "order": 0}
    line = tj.build_p8(sur, desk, tj.line_parameterization(desk, n))
    assert line.counts["order"] == k * (n - 1)


def test_min_separation():
    q = np.zeros((2, 3, 2))
    q[1, :, 0] = [10.0, 5.0, 20.0]
    assert tj.min_separation(q, np.array([100.0, 100.0])) == pytest.approx(5.0)
    assert tj.min_separation(q, np.array([100.0, 112.0])) == pytest.approx(13.0)


def test_audit_flags_violations(desk):
    q = tj.TrajectorySet.straight_line(desk).q.copy()
    q[0, 3] += 3 * desk.step_budget
    a = tj.audit(q, desk)
    assert a.speed > 0 and not a.ok(sensing=False)
    q = tj.TrajectorySet.straight_line(desk).q.copy()
    q[1, 0] += 1.0
    assert tj.audit(q, desk).endpoints == pytest.approx(1.0)


@pytest.mark.parametrize("kind", ["free", "line"])
def test_trust_region_certified(desk, desk_state, desk_beams, kind):
    start = desk_state["traj"]
    filters, statics = desk_state["filters"], desk_state["statics"]
    res = tj.solve_p7_trust_region(desk, desk_beams, filters, statics, start, kind=kind)
    acc = [e["exact"] for e in res.trace if e["accepted"]]
    assert len(acc) == res.accepted
    base = tj.objective_of_q(start.q, desk_beams, desk)
    assert all(b > a for a, b in zip([base] + acc, acc))
    chk = tj.audit(res.trajectory.q, desk, desk_beams, filters, statics)
    assert chk.ok()
    assert chk.endpoints == 0.0
    assert res.objective == pytest.approx(tj.objective_of_q(res.trajectory.q, desk_beams, desk), rel=1e-12)
    if kind == "line":
        s = tj.line_progress(desk, res.trajectory.q)
        on_line = desk.q_init[:, None] + s[..., None] * (desk.q_final - desk.q_init)[:, None]
        assert np.allclose(res.trajectory.q, on_line, atol=1e-9)
        assert np.all(np.diff(s, axis=1) >= -1e-12)


def test_trust_region_slack_floor(desk, desk_state, desk_beams):
    args = (desk, desk_beams, desk_state["filters"], desk_state["statics"], desk_state["traj"])
    a = tj.solve_p7_trust_region(*args, gamma=1e-9, max_outer=3)
    b = tj.solve_p7_trust_region(*args, gamma=2e-9, max_outer=3)
    assert a.accepted > 0
    assert np.array_equal(a.trajectory.q, b.trajectory.q)


def test_trust_region_tiny_radius(desk, desk_state, desk_beams):
    res = tj.solve_p7_trust_region(desk, desk_beams, desk_state["filters"], desk_state["statics"],
                                   desk_state["traj"], eps0=1e-4, eps_min=1e-3)
    assert res.status == "radius_below_minimum"
    assert np.array_equal(res.trajectory.q, desk_state["traj"].q)


def test_trust_region_rejects_infeasible_start(desk, desk_state, desk_beams):
    with pytest.raises(InfeasibleError):
        tj.solve_p7_trust_region(desk, desk_beams, desk_state["filters"], desk_state["statics"],
                                 desk_state["traj"], gamma=1e6)
