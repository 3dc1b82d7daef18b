"""Independent reference computations used to pin library results.

Each oracle recomputes a quantity along a different route (vector vs
covariance algebra, Monte Carlo sampling of the signal model, exhaustive
search, finite differences) and returns a small dict of numbers.  The test
suite and ``coopisac oracle <name>`` both call these.
"""
from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np

from .channel import StaticChannels, gen_static_channels, link_state
from .metrics import (BeamformerSet, FilterSet, _outer, comm_sinr, sensing_sinr_all)
from .scenario import Scenario, desk_scenario, validate


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_state(rng: np.random.Generator, scenario: Scenario | None = None):
    """Random positions, beam vectors and unit filters on a desk-like layout.

    Returns ``(scenario, links, statics, beams, filters)`` where ``beams``
    carries both vectors and covariances.
    """
    base = scenario or desk_scenario()
    scen = base.replace(rng_seed=int(rng.integers(2**31)))
    k_uav, m, l = scen.num_uavs, scen.num_bs, scen.antenna_count
    q = rng.uniform(0.0, 600.0, size=(k_uav, scen.num_slots, 2))
    links = link_state(scen, q)
    statics = gen_static_channels(scen)
    beams = random_beams(rng, scen)
    u = _cn(rng, (scen.num_slots, m, k_uav, l))
    filters = FilterSet(u / np.linalg.norm(u, axis=-1, keepdims=True))
    return scen, links, statics, beams, filters


def random_beams(rng: np.random.Generator, scen: Scenario, scale: float = 1.0) -> BeamformerSet:
    """Gaussian beam vectors with expected BS power ``scale * P_max``."""
    k_uav, m, l = scen.num_uavs, scen.num_bs, scen.antenna_count
    amp = np.sqrt(scale * scen.max_power / (l * (scen.num_comm + k_uav)))
    w_c = amp * _cn(rng, (scen.num_slots, m, scen.num_comm, l))
    w_r = amp * _cn(rng, (scen.num_slots, m, k_uav, l))
    return BeamformerSet.from_vectors(w_c, w_r)


def comm_formula_gap(states: int = 100, seed: int = 0) -> dict:
    """Largest relative gap between the vector and trace SINR forms."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(states):
        scen, links, _, beams, _ = random_state(rng)
        for k in scen.comm_indices:
            a = comm_sinr(int(k), 0, beams, links, scen, form="vector")
            b = comm_sinr(int(k), 0, beams, links, scen, form="trace")
            worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    return {"states": states, "max_rel_err": worst}


def _sample_received(rng, scen: Scenario, links, statics: StaticChannels, beams: BeamformerSet,
                     filters: FilterSet, draws: int):
    """Filtered echo and disturbance samples ``[draws, j, k]`` for slot 0.

    Symbols, RCS coefficients and receiver noise are drawn from the signal
    model itself; nothing is taken from the closed-form powers.
    """
    m, k_uav, l = scen.num_bs, scen.num_uavs, scen.antenna_count
    w = np.concatenate([beams.w_c[0], beams.w_r[0]], axis=1)  # [m, s, L]
    s = _cn(rng, (draws, m, w.shape[1]))
    x = np.einsum("msp,dms->dmp", w, s, optimize=True)  # transmitted [d, m, L]
    xi = np.sqrt(scen.rcs_variance) * _cn(rng, (draws, m, k_uav))  # RCS per BS and target
    a = links.a[0]  # [j, l, L]
    rho = links.rho[0]
    u = filters.u[0]  # [j, k, L]
    # u^H A_jl x_j = sqrt(rho) (u^H a)(a^H x)
    ua = np.einsum("jkp,jlp->jkl", np.conj(u), a, optimize=True)
    ax = np.einsum("jlp,djp->djl", np.conj(a), x, optimize=True)
    refl = xi[:, :, None, :] * (np.sqrt(rho)[None, :, None, :] * ua[None] * ax[:, :, None, :])  # [d,j,k,l]
    k_idx = np.arange(k_uav)
    echo = refl[:, :, k_idx, k_idx]
    clutter = refl.sum(axis=-1) - echo
    zeta = np.asarray(scen.si_coeff)
    wib = scen.inter_bs_coeff * statics.g_gain * (1 - np.eye(m))
    # row vectors u^H H_SI and u^H G_ij folded once, then applied to every draw
    b_si = np.sqrt(zeta)[:, None, None] * np.einsum("jkp,jpq->jkq", np.conj(u), statics.h_si, optimize=True)
    b_ib = np.sqrt(wib)[:, :, None, None] * np.einsum("jkp,ijpq->ijkq", np.conj(u), statics.g, optimize=True)
    si = np.einsum("jkq,djq->djk", b_si, x, optimize=True)
    ib = np.einsum("ijkq,diq->djk", b_ib, x, optimize=True)
    noise = np.sqrt(scen.noise_power_radar) * _cn(rng, (draws, m, l))
    nz = np.einsum("jkp,djp->djk", np.conj(u), noise, optimize=True)
    return echo, clutter + si + ib + nz


def sensing_monte_carlo(states: int = 100, draws: int = 100_000, seed: int = 0) -> dict:
    """Sampled aggregate sensing SINR vs the closed-form quadratic forms."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    chunk = 20_000
    for _ in range(states):
        scen, links, statics, beams, filters = random_state(rng)
        num = np.zeros((scen.num_bs, scen.num_uavs))
        den = np.zeros_like(num)
        for start in range(0, draws, chunk):
            e, d = _sample_received(rng, scen, links, statics, beams, filters, min(chunk, draws - start))
            num += np.sum(np.abs(e) ** 2, axis=0)
            den += np.sum(np.abs(d) ** 2, axis=0)
        mc = num.sum(axis=0) / den.sum(axis=0)
        exact, _ = sensing_sinr_all(beams.slot(0), FilterSet(filters.u[:1]),
                                    _first_slot(links), statics, scen)
        worst = max(worst, float(np.max(np.abs(mc - exact[0]) / exact[0])))
    return {"states": states, "draws": draws, "max_rel_err": worst}


def _first_slot(links):
    return dataclasses.replace(links, **{f.name: getattr(links, f.name)[:1]
                                          for f in dataclasses.fields(links)})


def tx_cov_monte_carlo(states: int = 20, draws: int = 100_000, seed: int = 0) -> dict:
    """Sample covariance of the transmitted signal vs ``X``, Frobenius-relative."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(states):
        scen, _, _, beams, _ = random_state(rng)
        w = np.concatenate([beams.w_c[0], beams.w_r[0]], axis=1)
        x = np.einsum("msp,dms->dmp", w, _cn(rng, (draws, w.shape[0], w.shape[1])))
        emp = np.einsum("dmp,dmq->mpq", x, np.conj(x)) / draws
        ref = beams.tx_cov()[0]
        err = np.linalg.norm(emp - ref, axis=(1, 2)) / np.linalg.norm(ref, axis=(1, 2))
        worst = max(worst, float(err.max()))
    return {"states": states, "draws": draws, "max_rel_err": worst}


def small_real_instance(seed: int = 0, gamma_db: float = 0.0):
    """Single BS, two antennas, one comm+sensing UAV, real-valued channels.

    Returns ``(scenario, links, statics, filters)`` restricted to one slot.
    """
    rng = np.random.default_rng(seed)
    raw = desk_scenario().to_dict()
    raw.update(bs_positions=[[300.0, 300.0]], antenna_count=2, si_coeff=[1e-7],
               inter_bs_coeff=[[0.0]], weights=[1.0], rng_seed=seed,
               sensing_threshold=float(10 ** (gamma_db / 10)),
               uav_specs=[{"kind": "comm_sensing", "q_init": [100.0, 300.0],
                           "q_final": [500.0, 300.0], "altitude": 100.0}])
    scen = validate(raw)
    links = _first_slot(link_state(scen, np.asarray(scen.q_init)[:, None, :].repeat(scen.num_slots, 1)))
    # real steering vector with a random direction, same geometry otherwise
    a = rng.standard_normal(2)
    a = np.sqrt(2.0) * a / np.linalg.norm(a)
    a = a.astype(complex)[None, None, None, :]
    links = dataclasses.replace(links, a=a, h=np.sqrt(links.beta)[..., None] * a)
    st = gen_static_channels(scen)
    statics = dataclasses.replace(st, h_si=np.real(st.h_si).astype(complex))
    u = np.ones((1, 1, 1, 2), complex) / np.sqrt(2.0)
    u[..., 1] = rng.choice([-1.0, 1.0]) / np.sqrt(2.0)
    filters = FilterSet(u)
    return scen, links, statics, filters


def grid_search_real(scen, links, statics, filters, step: float = 0.01, block: int = 64) -> dict:
    """Exhaustive search over real ``(w_c, w_r)`` on a grid of pitch ``step * sqrt(P)``.

    Both streams are 2-vectors; the four-dimensional ball of radius
    ``sqrt(P)`` is scanned in blocks of ``w_c`` candidates against all
    ``w_r`` candidates.  Every power involved is a quadratic form of
    ``w w^T`` with no cross terms, so each candidate needs only a few
    inner products.
    """
    p = scen.max_power
    r = np.sqrt(p)
    ax = np.arange(-1.0, 1.0 + step / 2, step) * r
    g = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)
    g = g[np.sum(g * g, axis=1) <= p * (1 + 1e-12)]
    pw = np.sum(g * g, axis=1)
    h = np.real(links.h[0, 0, 0])
    a = np.real(links.a[0, 0, 0])
    u = np.real(filters.u[0, 0, 0])
    rho = float(links.rho[0, 0, 0])
    hsi = np.real(statics.h_si[0])
    s2 = scen.noise_power_comm
    gamma = scen.sensing_threshold
    # per-candidate features
    fh = (g @ h) ** 2
    fe = scen.rcs_variance * rho * (u @ a) ** 2 * (g @ a) ** 2  # echo power
    fs = float(scen.si_coeff[0]) * (g @ (hsi.T @ u)) ** 2  # self-interference power
    noise = scen.noise_power_radar * float(u @ u)
    best = -np.inf
    arg = None
    for s in range(0, len(g), block):
        c = slice(s, s + block)
        ok_p = pw[c, None] + pw[None, :] <= p * (1 + 1e-12)
        margin = (fe[c, None] + fe[None, :]) - gamma * (fs[c, None] + fs[None, :] + noise)
        ok = ok_p & (margin >= 0)
        val = np.where(ok, np.log2(1 + fh[c, None] / (fh[None, :] + s2)), -np.inf)
        i = np.unravel_index(np.argmax(val), val.shape)
        if val[i] > best:
            best = float(val[i])
            arg = (g[s + i[0]].copy(), g[i[1]].copy())
    return {"objective": best, "w_c": None if arg is None else arg[0].tolist(),
            "w_r": None if arg is None else arg[1].tolist(), "candidates": int(len(g))}


def grid_vs_sdr(seed: int = 0, gamma_db: float = 0.0, step: float = 0.01) -> dict:
    """Brute-force optimum vs the SCA/SDR beamformer on :func:`small_real_instance`."""
    from .beamforming import solve_p3_sca
    from .metrics import sensing_functionals, weighted_sum_rate

    scen, links, statics, filters = small_real_instance(seed, gamma_db)
    grid = grid_search_real(scen, links, statics, filters, step)
    sf = sensing_functionals(filters, links, statics, scen)
    res = solve_p3_sca(scen, links, sf, tol_sca=1e-7, max_outer=60)
    sdr = weighted_sum_rate(res.beams, links, scen).objective
    return {"grid": grid["objective"], "sdr": sdr,
            "rel_gap": (grid["objective"] - sdr) / max(abs(grid["objective"]), 1e-300)}


def filter_random_search(cells: int = 50, samples: int = 10_000, seed: int = 0) -> dict:
    """Optimal-filter quotient vs the best of many random unit filters."""
    from .filters import build_ef, optimal_filters

    rng = np.random.default_rng(seed)
    worst_margin = np.inf
    worst_eig = 0.0
    done = 0
    while done < cells:
        scen, links, statics, beams, _ = random_state(rng)
        ef = build_ef(beams, links, statics, scen)
        fset, quot = optimal_filters(ef)
        for j in range(scen.num_bs):
            for k in range(scen.num_uavs):
                e, f = ef.e[0, j, k], ef.f[0, j, k]
                v = _cn(rng, (samples, e.shape[0]))
                v /= np.linalg.norm(v, axis=1, keepdims=True)
                qr = (np.real(np.einsum("sp,pq,sq->s", np.conj(v), e, v))
                      / np.real(np.einsum("sp,pq,sq->s", np.conj(v), f, v)))
                uu = fset.u[0, j, k]
                qu = np.real(np.conj(uu) @ e @ uu) / np.real(np.conj(uu) @ f @ uu)
                lam = np.max(np.real(np.linalg.eigvals(np.linalg.solve(f, e))))
                worst_margin = min(worst_margin, (qu - qr.max()) / max(qu, 1e-300))
                worst_eig = max(worst_eig, abs(qu - lam) / max(abs(lam), 1e-300),
                                abs(quot[0, j, k] - lam) / max(abs(lam), 1e-300))
                done += 1
    return {"cells": done, "samples": samples, "min_rel_margin": float(worst_margin),
            "max_rel_eig_err": float(worst_eig)}


def rate_gradient_fd(states: int = 50, step: float = 1e-3, seed: int = 0) -> dict:
    """Analytic rate gradients in position vs central differences."""
    from .trajectory import rate_and_grad

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(states):
        scen, _, _, beams, _ = random_state(rng)
        for k in scen.comm_indices:
            pos = rng.uniform(0.0, 600.0, 2)
            _, g = rate_and_grad(pos, beams, scen, int(k), 0)
            fd = np.zeros(2)
            for d in range(2):
                e = np.zeros(2)
                e[d] = step
                fd[d] = (_rate_at(scen, beams, k, pos + e) - _rate_at(scen, beams, k, pos - e)) / (2 * step)
            worst = max(worst, float(np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-300)))
    return {"states": states, "max_rel_err": worst}


def _rate_at(scen, beams, k, pos):
    from .trajectory import exact_rate_of_q

    q = np.repeat(np.asarray(scen.q_init, float)[:, None, :], beams.num_slots, axis=1)
    q[k, 0] = pos
    return exact_rate_of_q(q, beams, scen, int(k), 0)


def trace_gradient_fd(states: int = 50, step: float = 1e-3, seed: int = 0) -> dict:
    """Analytic sensing-trace gradients vs central differences."""
    from .trajectory import sensing_traces

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(states):
        scen, _, _, beams, filters = random_state(rng)
        q = rng.uniform(0.0, 600.0, size=(scen.num_uavs, beams.num_slots, 2))
        t, g = sensing_traces(q, beams, filters, scen)  # t [n, j, l, k], g [..., 2]
        l = int(rng.integers(scen.num_uavs))
        fd = np.zeros(t.shape[:1] + t.shape[1:] + (2,))
        for d in range(2):
            qp, qm = q.copy(), q.copy()
            qp[l, :, d] += step
            qm[l, :, d] -= step
            fd[..., d] = (sensing_traces(qp, beams, filters, scen)[0]
                          - sensing_traces(qm, beams, filters, scen)[0]) / (2 * step)
        an = g[:, :, l]
        num = fd[:, :, l]
        den = np.maximum(np.linalg.norm(num, axis=-1), 1e-12 * np.abs(t[:, :, l]).max())
        worst = max(worst, float(np.max(np.linalg.norm(an - num, axis=-1) / den)))
    return {"states": states, "max_rel_err": worst}


def random_slot_problem(rng: np.random.Generator, scenario: Scenario | None = None):
    """A feasible one-slot beamforming subproblem at random positions.

    Returns ``(scenario, links, sf)`` restricted to slot 0, with matched
    filters, redrawn until the isotropic start meets the sensing floor.
    """
    from .beamforming import initial_beams, sensing_violation
    from .metrics import sensing_functionals

    while True:
        scen, links, statics, _, _ = random_state(rng, scenario)
        links = _first_slot(links)
        sf = sensing_functionals(FilterSet.matched(links), links, statics, scen)
        start = initial_beams(scen, links, sf)
        if sensing_violation(start, sf, scen.sensing_threshold).max() <= 0:
            return scen, links, sf


def sdr_recovery(instances: int = 20, seed: int = 0) -> dict:
    """Relaxed SCA solution vs its rank-one recovery on random desk slots."""
    from .beamforming import initial_beams, rank_one_recovery, sensing_violation, solve_slot_sca
    from .metrics import weighted_sum_rate

    rng = np.random.default_rng(seed)
    err_x = err_obj = viol = power = 0.0
    for _ in range(instances):
        scen, links, sf = random_slot_problem(rng)
        relaxed = solve_slot_sca(scen, links, sf, 0, initial_beams(scen, links, sf)).beams
        rec = rank_one_recovery(relaxed, links, scen)
        x0, x1 = relaxed.tx_cov(), rec.tx_cov()
        err_x = max(err_x, float(np.max(np.linalg.norm(x1 - x0, axis=(-2, -1))
                                        / np.linalg.norm(x0, axis=(-2, -1)))))
        o0 = weighted_sum_rate(relaxed, links, scen).objective
        o1 = weighted_sum_rate(rec, links, scen).objective
        err_obj = max(err_obj, abs(o1 - o0) / max(abs(o0), 1e-300))
        viol = max(viol, float(sensing_violation(rec, sf, scen.sensing_threshold).max()))
        power = max(power, float(rec.power().max() - scen.max_power))
    return {"instances": instances, "max_rel_x_err": err_x, "max_rel_obj_err": err_obj,
            "max_sensing_violation": viol, "max_power_excess": power}


def surrogate_bound(expansions: int = 10, points: int = 100, seed: int = 0) -> dict:
    """Rate surrogate vs the exact rate around random expansion points.

    For each expansion point the surrogate must be exact there and below
    the exact rate at ``points`` random covariances, half of them drawn
    close to the expansion point.
    """
    from .beamforming import rate_surrogate, surrogate_rate
    from .metrics import comm_sinr_all

    rng = np.random.default_rng(seed)
    worst_gap = -np.inf  # max of surrogate - exact at random points
    worst_at = 0.0
    for _ in range(expansions):
        scen, links, _, at, _ = random_state(rng)
        sur = rate_surrogate(at, links, scen, 0)
        for c, k in enumerate(scen.comm_indices):
            exact = np.log2(1 + comm_sinr_all(at, links, scen)[0, k])
            worst_at = max(worst_at, abs(surrogate_rate(at, sur, int(k), 0, links, scen) - exact))
        for i in range(points):
            b = random_beams(rng, scen, rng.uniform(0.0, 2.0))
            if i % 2:  # a point close to the expansion point
                t = 10.0 ** rng.uniform(-6, -1)
                b = BeamformerSet(cov_c=at.cov_c + t * (b.cov_c - at.cov_c),
                                  cov_r=at.cov_r + t * (b.cov_r - at.cov_r))
            rates = np.log2(1 + comm_sinr_all(b, links, scen)[0])
            for k in scen.comm_indices:
                val = surrogate_rate(b, sur, int(k), 0, links, scen)
                worst_gap = max(worst_gap, val - rates[k])
    return {"expansions": expansions, "points": points, "max_excess": float(worst_gap),
            "max_expansion_err": float(worst_at)}


def linalg_suite(matrices: int = 500, max_dim: int = 16, seed: int = 0) -> dict:
    """Eigen residuals of both eigensolvers and ``inv_sqrt`` congruence on
    random Hermitian matrices of size 1..``max_dim``.

    Residuals are ``|M V - V diag(w)| / |M|`` (spectral norm) and
    ``|S F S - I|`` for a positive definite ``F``.
    """
    from .linalg import herm_eig, inv_sqrt

    rng = np.random.default_rng(seed)
    eig_res = {"lapack": 0.0, "jacobi": 0.0}
    cong = 0.0
    for i in range(matrices):
        n = 1 + i % max_dim
        a = _cn(rng, (n, n)) * np.exp(rng.uniform(-3, 3))
        m = 0.5 * (a + a.conj().T)
        nrm = max(np.linalg.norm(m, 2), 1e-300)
        for method in eig_res:
            d = herm_eig(m, method)
            r = np.linalg.norm(m @ d.vectors - d.vectors * d.values, 2) / nrm
            eig_res[method] = max(eig_res[method], float(r))
        f = a @ a.conj().T + 0.1 * np.linalg.norm(a, 2) ** 2 * np.eye(n)
        s = inv_sqrt(f)
        cong = max(cong, float(np.linalg.norm(s @ f @ s - np.eye(n), 2)))
    return {"matrices": matrices, "max_eig_residual_lapack": eig_res["lapack"],
            "max_eig_residual_jacobi": eig_res["jacobi"], "max_congruence_err": cong}


def canonical_problems():
    """Five hand-checkable cone programs: ``(name, problem, status, x*, objective*)``."""
    import scipy.sparse as sp

    from .conic import Cone, ConicProblem, Status, svec

    lp = ConicProblem([1.0], sp.csr_matrix([[-1.0]]), [-1.0], [Cone("nonneg", 1)])
    sdp = ConicProblem(svec(np.eye(2)), -sp.eye(3), -svec(np.eye(2)), [Cone("psd", 2)])
    exp = ConicProblem([-1.0], sp.csr_matrix([[-1.0], [0.0], [0.0]]), [0.0, 1.0, 5.0], [Cone("exp", 3)])
    # min x1 s.t. ||(x1, x2) - (3, 4)|| <= 5, x2 = 0 -> x1 in [0, 6], optimum 0
    soc = ConicProblem([1.0, 0.0], sp.csr_matrix([[0, 1.0], [0, 0], [-1.0, 0], [0, -1.0]]),
                       [0, 5.0, -3.0, -4.0], [Cone("zero", 1), Cone("soc", 3)])
    infeas = ConicProblem([1.0], sp.csr_matrix([[-1.0], [1.0]]), [-1.0, 0.0], [Cone("nonneg", 2)])
    return [
        ("lp", lp, Status.OPTIMAL, [1.0], 1.0),
        ("sdp", sdp, Status.OPTIMAL, svec(np.eye(2)), 2.0),
        ("exp", exp, Status.OPTIMAL, [np.log(5.0)], -np.log(5.0)),
        ("soc", soc, Status.OPTIMAL, [0.0, 0.0], 0.0),
        ("infeasible", infeas, Status.INFEASIBLE, None, None),
    ]


def conic_canonical() -> dict:
    """Status and error to the known optimum for each canonical program."""
    from .conic import solve

    out = {}
    for name, p, status, x, obj in canonical_problems():
        sol = solve(p)
        row = {"status": sol.status.value, "expected": status.value}
        if x is not None:
            row["x_err"] = float(np.max(np.abs(sol.x - np.asarray(x))))
            row["objective_err"] = float(abs(sol.objective - obj))
        out[name] = row
    return out


def projection_checks(count: int = 1000, seed: int = 0) -> dict:
    """Idempotence and non-expansiveness of every cone projection on random
    pairs of points, cycling over the cone types."""
    from .conic import Cone, project_cone

    rng = np.random.default_rng(seed)
    cones = [Cone("nonneg", 5), Cone("soc", 5), Cone("psd", 3), Cone("exp", 3), Cone("zero", 2)]
    idem = expand = 0.0
    for i in range(count):
        k = cones[i % len(cones)]
        for dual in (False, True):
            a = rng.standard_normal(k.size) * np.exp(rng.uniform(-3, 3))
            b = rng.standard_normal(k.size) * np.exp(rng.uniform(-3, 3))
            pa, pb = project_cone(a, k, dual=dual), project_cone(b, k, dual=dual)
            idem = max(idem, float(np.linalg.norm(project_cone(pa, k, dual=dual) - pa)
                                   / (1 + np.linalg.norm(pa))))
            expand = max(expand, float((np.linalg.norm(pa - pb) - np.linalg.norm(a - b))
                                       / (1 + np.linalg.norm(a - b))))
    return {"checks": count, "max_idempotence_err": idem, "max_expansion": expand}


ORACLES: dict[str, Callable[[], dict]] = {
    "linalg": linalg_suite,
    "conic-canonical": conic_canonical,
    "projections": projection_checks,
    "comm-formula": comm_formula_gap,
    "sensing-mc": sensing_monte_carlo,
    "txcov-mc": tx_cov_monte_carlo,
    "grid-sdr": grid_vs_sdr,
    "filter-search": filter_random_search,
    "sdr-recovery": sdr_recovery,
    "surrogate-bound": surrogate_bound,
    "rate-gradient": rate_gradient_fd,
    "trace-gradient": trace_gradient_fd,
}
