"""Beamforming block: SCA on the weighted sum rate with semidefinite
relaxation, solved slot by slot through the conic solver, followed by
rank-one recovery of the communication beams.

For every communication UAV the rate splits as
``log2(sigma^2 + total) - log2(sigma^2 + interference)``.  The first term is
concave in the covariances and is kept exactly through an exponential-cone
epigraph; the second is replaced by its tangent plane at the expansion
point, which makes the surrogate a global lower bound of the rate.

Inside the solver covariances are normalized by the power budget and
channel gains by the UAV noise power, so all problem data are O(1)-O(1e3).
Sensing covariances of one BS enter every expression only through their
sum, so the conic model carries one aggregate sensing block per BS; the
aggregate is split evenly over the sensing streams when decoded.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import conic
from .channel import LinkState
from .errors import DegenerateError, InfeasibleError, ShapeError
from .linalg import hermitian, psd_project
from .metrics import (BeamformerSet, SensingFunctionals, _outer, comm_sinr_all,
                      sensing_constraint_matrices, _slot_links)
from .conic.problem import embedding_map, herm_coeffs, herm_from_params, herm_params
from .scenario import Scenario

log = logging.getLogger(__name__)

LN2 = np.log(2.0)
SENSING_TIGHTEN = 1e-6  # relative tightening of sensing rows inside the solver
POWER_TIGHTEN = 1e-9
SCA_NOISE = 1e-6  # relative objective noise of an inexact conic solve
# Plain Douglas-Rachford with a small dual scale: on these problems
# acceleration oscillates once the filters are max-SINR, and scale 0.03
# balanced primal and dual progress on every instance we profiled.
SOLVER_SETTINGS = conic.Settings(scale=0.03, anderson=0)


# -- surrogate ------------------------------------------------------------------

@dataclass
class RateSurrogate:
    """Tangent data of the interference log at an expansion point.

    ``a[c] = log2(sigma^2 + I_c)`` and ``b[c, m] = h h^H / ((sigma^2 + I_c) ln 2)``
    for the c-th communication UAV, with ``I_c`` its interference power at
    the expansion point (slot ``slot`` of ``at``).
    """

    slot: int
    at: BeamformerSet  # single-slot expansion point
    a: np.ndarray  # [c]
    b: np.ndarray  # [c, m, L, L]
    interference: np.ndarray  # [c]


def _interference(cov_c, cov_r, h, c):
    """Interference at comm stream ``c`` for one slot: cov_c [m, c, L, L],
    cov_r [m, i, L, L], h [m, L] channel of that UAV."""
    hh = _outer(h)
    tc = np.real(np.einsum("mpq,miqp->mi", hh, cov_c))
    tr = np.real(np.einsum("mpq,miqp->mi", hh, cov_r))
    return tc.sum() - tc[:, c].sum() + tr.sum()


def rate_surrogate(beams: BeamformerSet, links: LinkState, scenario: Scenario, n: int) -> RateSurrogate:
    """Expansion data at slot ``n`` of ``beams``."""
    sig2 = scenario.noise_power_comm
    cs = scenario.comm_indices
    at = beams.slot(n).copy()
    a = np.zeros(len(cs))
    b = np.zeros((len(cs), scenario.num_bs, scenario.antenna_count, scenario.antenna_count), complex)
    inter = np.zeros(len(cs))
    for c, k in enumerate(cs):
        h = links.h[n, :, k]
        inter[c] = _interference(at.cov_c[0], at.cov_r[0], h, c)
        a[c] = np.log2(sig2 + inter[c])
        b[c] = _outer(h) / ((sig2 + inter[c]) * LN2)
    return RateSurrogate(slot=n, at=at, a=a, b=b, interference=inter)


def surrogate_rate(beams: BeamformerSet, at: RateSurrogate, k: int, n: int,
                   links: LinkState, scenario: Scenario) -> float:
    """Concave lower bound of the rate of comm UAV ``k`` at slot ``n``;
    exact at the expansion point."""
    cs = list(scenario.comm_indices)
    c = cs.index(k)
    h = links.h[n, :, k]
    hh = _outer(h)
    cov_c, cov_r = beams.cov_c[n], beams.cov_r[n]
    total = np.real(np.einsum("mpq,miqp->", hh, cov_c)) + np.real(np.einsum("mpq,miqp->", hh, cov_r))
    lin = 0.0
    dc = cov_c - at.at.cov_c[0]
    dr = cov_r - at.at.cov_r[0]
    bmat = at.b[c]  # [m, L, L]
    tc = np.real(np.einsum("mpq,miqp->mi", bmat, dc))
    lin = tc.sum() - tc[:, c].sum() + np.real(np.einsum("mpq,miqp->", bmat, dr))
    return float(np.log2(scenario.noise_power_comm + total) - at.a[c] - lin)


def slot_objective(beams: BeamformerSet, links: LinkState, scenario: Scenario, n: int) -> float:
    """Exact weighted sum rate of slot ``n``."""
    sinr = comm_sinr_all(beams.slot(n), _slot_links(links, n), scenario)
    return float(np.log2(1.0 + sinr[0]) @ scenario.weights)


# -- P4 model ---------------------------------------------------------------------

@dataclass
class P4Model:
    problem: conic.ConicProblem
    structure: str
    power: float  # normalization: W = power * W_hat
    num_bs: int
    num_comm: int
    num_uavs: int
    l: int
    block_cols: np.ndarray  # [m, c+1] start column of each block
    block_width: int
    t_cols: np.ndarray  # [c]
    basis: np.ndarray  # [L^2, block_width] map from block variables to Hermitian params
    sensing_rows: int = 0
    info: dict = field(default_factory=dict)

    def decode(self, x: np.ndarray) -> BeamformerSet:
        """Covariances (single slot) from a solver vector; the aggregate
        sensing block is split evenly over the sensing streams."""
        m, kc, l = self.num_bs, self.num_comm, self.l
        cov_c = np.zeros((1, m, kc, l, l), complex)
        cov_r = np.zeros((1, m, self.num_uavs, l, l), complex)
        for j in range(m):
            for t in range(kc + 1):
                c0 = self.block_cols[j, t]
                theta = self.basis @ x[c0:c0 + self.block_width]
                w = self.power * herm_from_params(theta, l)
                if t < kc:
                    cov_c[0, j, t] = w
                elif self.num_uavs:
                    cov_r[0, j, :] = w / self.num_uavs
        return BeamformerSet(cov_c=cov_c, cov_r=cov_r)

    def encode(self, beams: BeamformerSet) -> np.ndarray:
        """Solver vector for a single-slot BeamformerSet (full structure)."""
        x = np.zeros(self.problem.num_vars)
        for j in range(self.num_bs):
            for t in range(self.num_comm + 1):
                w = beams.cov_c[0, j, t] if t < self.num_comm else beams.cov_r[0, j].sum(axis=0)
                theta = herm_params(w / self.power)
                c0 = self.block_cols[j, t]
                x[c0:c0 + self.block_width] = np.linalg.lstsq(self.basis, theta, rcond=None)[0]
        return x


def _block_basis(l: int, structure: str) -> np.ndarray:
    if structure == "full":
        return np.eye(l * l)
    if structure == "scaled_identity":
        return herm_params(np.eye(l) / l)[:, None]
    raise ValueError(f"unknown structure {structure!r}")


def build_p4(scenario: Scenario, links: LinkState, sf: SensingFunctionals, n: int,
             surrogate: RateSurrogate, gamma: float | None = None, structure: str = "full",
             max_power: float | None = None) -> P4Model:
    """Convex surrogate problem of slot ``n`` (``links`` and ``sf`` cover all
    slots; slot ``n`` is used).

    Variables per BS: one covariance block per comm UAV plus one aggregate
    sensing block, then one epigraph scalar per comm UAV.  Rows: power
    budget per BS, sensing inequality per UAV (omitted when ``gamma == 0``),
    PSD cone per block (``full``) or nonnegativity of the block power
    (``scaled_identity``), and one exponential cone per comm UAV.
    """
    m, l, k_uav = scenario.num_bs, scenario.antenna_count, scenario.num_uavs
    cs = scenario.comm_indices
    kc = len(cs)
    gamma = scenario.sensing_threshold if gamma is None else gamma
    pmax = scenario.max_power if max_power is None else max_power
    power = pmax if pmax > 0 else 1.0
    if links.h.shape[1:] != (m, k_uav, l) or sf.echo.shape[1:] != (m, k_uav, l):
        raise ShapeError("link or sensing arrays do not match the scenario")
    if surrogate.b.shape != (kc, m, l, l):
        raise ShapeError(f"surrogate shape {surrogate.b.shape} does not match ({kc}, {m}, {l}, {l})")

    basis = _block_basis(l, structure)
    bw = basis.shape[1]
    bld = conic.ProblemBuilder()
    block_cols = np.zeros((m, kc + 1), int)
    for j in range(m):
        for t in range(kc + 1):
            block_cols[j, t] = bld.var(f"W[{j},{t}]", bw).start
    t_cols = np.array([bld.var(f"t[{c}]", 1).start for c in range(kc)], int)
    nv = bld.n

    def coeff_row(entries):
        """entries: list of (col_start, coefficient vector over params)."""
        cols, vals = [], []
        for c0, g in entries:
            cols.append(np.arange(c0, c0 + bw))
            vals.append(g @ basis)
        return sp.csr_matrix((np.concatenate(vals), (np.zeros(sum(len(v) for v in vals), int),
                                                     np.concatenate(cols))), shape=(1, nv))

    sig2 = scenario.noise_power_comm
    gains = (power / sig2) * _outer(links.h[n])  # [m, k, L, L]
    obj = np.zeros(nv)
    # normalized received power h^H X_j h / P at the expansion point, [m, k]
    x_at = np.real(np.einsum("mkp,mpq,mkq->mk", np.conj(links.h[n]),
                             surrogate.at.tx_cov()[0], links.h[n])) / power
    for c, k in enumerate(cs):
        w_k = scenario.weights[k]
        obj[t_cols[c]] = -w_k / LN2
        bh = power * herm_coeffs(surrogate.b[c])  # [m, L^2]
        for j in range(m):
            for t in range(kc + 1):
                if t != c:
                    c0 = block_cols[j, t]
                    obj[c0:c0 + bw] += w_k * (bh[j] @ basis)
        # t <= ln(1 + z) written as (t - ln S, 1, (1 + z) / S) in K_exp, with S
        # the value of 1 + z at the expansion point so all three rows are O(1)
        big = 1.0 + x_at[:, k].sum() * power / sig2
        g = herm_coeffs(gains[:, k]) / big  # [m, L^2]
        row_z = coeff_row([(block_cols[j, t], g[j]) for j in range(m) for t in range(kc + 1)])
        row_t = sp.csr_matrix(([1.0], ([0], [t_cols[c]])), shape=(1, nv))
        bld.add_exp(sp.vstack([-row_t, sp.csr_matrix((1, nv)), -row_z]),
                    np.array([-np.log(big), 1.0, 1.0 / big]))
    bld.set_objective(obj)

    # power budget per BS
    tr_g = herm_coeffs(np.eye(l))
    prow = [coeff_row([(block_cols[j, t], tr_g) for t in range(kc + 1)]) for j in range(m)]
    bld.add_ge0(sp.vstack(prow), np.full(m, pmax / power * (1.0 - POWER_TIGHTEN)))

    # sensing: sum_j tr(Q_jk X_j) >= gamma * noise_k
    n_sens = 0
    if gamma > 0 and k_uav:
        sf_n = SensingFunctionals(*(getattr(sf, f)[n:n + 1] for f in
                                    ("echo", "clutter", "si", "ib", "noise_bs")),
                                  ib_weight=sf.ib_weight, si_weight=sf.si_weight, rcs=sf.rcs)
        q, rhs = sensing_constraint_matrices(sf_n, gamma)
        rows = []
        for k in range(k_uav):
            qk = herm_coeffs(q[0, :, k]) * (power / rhs[0, k])  # [m, L^2]
            rows.append(coeff_row([(block_cols[j, t], qk[j]) for j in range(m) for t in range(kc + 1)]))
        bld.add_ge0(-sp.vstack(rows), np.full(k_uav, -(1.0 + SENSING_TIGHTEN)))
        n_sens = k_uav

    # cone membership of each block
    if structure == "full":
        emb = embedding_map(l)
        for j in range(m):
            for t in range(kc + 1):
                c0 = block_cols[j, t]
                a_blk = sp.hstack([sp.csr_matrix((emb.shape[0], c0)), -emb,
                                   sp.csr_matrix((emb.shape[0], nv - c0 - bw))])
                bld.add_psd(a_blk, np.zeros(emb.shape[0]), 2 * l)
    else:
        cols = block_cols.ravel()
        a_blk = sp.csr_matrix((-np.ones(cols.size), (np.arange(cols.size), cols)), shape=(cols.size, nv))
        bld.add_ge0(a_blk, np.zeros(cols.size))

    prob = bld.build()
    return P4Model(problem=prob, structure=structure, power=power, num_bs=m, num_comm=kc,
                   num_uavs=k_uav, l=l, block_cols=block_cols, block_width=bw, t_cols=t_cols,
                   basis=basis, sensing_rows=n_sens)


# -- cleaning and feasibility ---------------------------------------------------------

def _clean(beams: BeamformerSet, max_power: float) -> BeamformerSet:
    """Hermitian PSD covariances within the power budget."""
    out = BeamformerSet(psd_project(beams.cov_c), psd_project(beams.cov_r))
    p = out.power()  # [n, m]
    over = p > max_power
    if np.any(over):
        f = np.where(over, max_power / np.where(p > 0, p, 1.0), 1.0)
        out.cov_c = out.cov_c * f[:, :, None, None, None]
        out.cov_r = out.cov_r * f[:, :, None, None, None]
    return out


def sensing_violation(beams: BeamformerSet, sf: SensingFunctionals, gamma: float) -> np.ndarray:
    """Relative shortfall ``max(0, 1 - lhs / rhs)`` per ``[n, k]``."""
    if gamma <= 0:
        return np.zeros(sf.echo.shape[0:1] + sf.echo.shape[2:3])
    q, rhs = sensing_constraint_matrices(sf, gamma)
    lhs = np.real(np.einsum("njkpq,njqp->nk", q, beams.tx_cov()))
    return np.maximum(0.0, 1.0 - lhs / rhs)


def sensing_slack(beams: BeamformerSet, sf: SensingFunctionals, gamma: float) -> np.ndarray:
    """Relative margin ``lhs / rhs - 1`` per ``[n, k]`` (``gamma > 0``)."""
    q, rhs = sensing_constraint_matrices(sf, gamma)
    lhs = np.real(np.einsum("njkpq,njqp->nk", q, beams.tx_cov()))
    return lhs / rhs - 1.0


def _slot_sf(sf: SensingFunctionals, n: int) -> SensingFunctionals:
    return SensingFunctionals(*(getattr(sf, f)[n:n + 1] for f in ("echo", "clutter", "si", "ib", "noise_bs")),
                              ib_weight=sf.ib_weight, si_weight=sf.si_weight, rcs=sf.rcs)


# -- initialization ------------------------------------------------------------------

def initial_beams(scenario: Scenario, links: LinkState, sf: SensingFunctionals | None = None,
                  gamma: float | None = None, structure: str = "full") -> BeamformerSet:
    """Matched-filter communication beams plus isotropic sensing power.

    With sensing share ``s`` (1/2 by default) each comm stream gets
    ``(1 - s) P / (K_cs L)`` along ``h / |h|`` and each sensing stream
    ``s P / (K L) I``.  When the default share misses the sensing floor and
    ``s = 1`` meets it, the smallest feasible share is found by bisection,
    slot by slot.  With ``structure="scaled_identity"`` the comm streams are
    isotropic as well.
    """
    gamma = scenario.sensing_threshold if gamma is None else gamma
    n_slots, m, k_uav, l = links.h.shape
    cs = scenario.comm_indices
    kc = len(cs)
    p = scenario.max_power
    hh = links.h[:, :, cs]  # [n, m, c, L]
    hn = hh / np.linalg.norm(hh, axis=-1, keepdims=True)
    comm_unit = _outer(hn) if structure == "full" else np.broadcast_to(
        np.eye(l), (n_slots, m, kc, l, l))  # [n, m, c, L, L]
    eye = np.broadcast_to(np.eye(l), (n_slots, m, k_uav, l, l))

    def make(share):
        share = np.asarray(share, float).reshape(-1, 1, 1, 1, 1)
        cov_c = (1 - share) * p / (max(kc, 1) * l) * comm_unit
        cov_r = share * p / (max(k_uav, 1) * l) * eye
        return BeamformerSet(cov_c=np.array(cov_c, complex), cov_r=np.array(cov_r, complex))

    share = np.full(n_slots, 0.5)
    beams = make(share)
    if sf is None or gamma <= 0 or k_uav == 0:
        return beams
    bad = sensing_violation(beams, sf, gamma).max(axis=1) > 0
    if not bad.any():
        return beams
    full_ok = sensing_violation(make(np.ones(n_slots)), sf, gamma).max(axis=1) <= 0
    lo = np.full(n_slots, 0.5)
    hi = np.ones(n_slots)
    todo = bad & full_ok
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        ok = sensing_violation(make(np.where(todo, mid, hi)), sf, gamma).max(axis=1) <= 0
        hi = np.where(todo & ok, mid, hi)
        lo = np.where(todo & ~ok, mid, lo)
    share = np.where(todo, hi, np.where(bad, 1.0, 0.5))
    return make(share)


# -- SCA --------------------------------------------------------------------------------

@dataclass
class SlotResult:
    beams: BeamformerSet  # single slot
    trace: list
    status: str
    solver_iters: int = 0
    warm: dict | None = None  # last conic solutions, reusable as warm starts


def solve_slot_sca(scenario: Scenario, links: LinkState, sf: SensingFunctionals, n: int,
                   start: BeamformerSet, gamma: float | None = None, structure: str = "full",
                   tol_sca: float = 1e-4, max_outer: int = 30, solver_tol: float = 1e-7,
                   solver_max_iter: int = 50000, warm=None) -> SlotResult:
    """SCA iterations for one slot starting from ``start`` (single slot).

    ``warm`` is the ``warm`` of an earlier result for the same slot, e.g.
    from the previous AO iteration; it only changes the solver's starting
    point.

    Each step first solves the model without sensing rows and keeps that
    optimum when it clears the tightened sensing rows; otherwise the slot
    switches to the full model for its remaining steps.

    Stops when the exact slot objective improves by less than ``tol_sca``.
    A step that lowers the exact objective of an already feasible point is
    discarded (it can only come from solver inexactness).
    """
    gamma = scenario.sensing_threshold if gamma is None else gamma
    sf_n = _slot_sf(sf, n)
    links_n = _slot_links(links, n)
    cur = start.copy()
    cur_feasible = sensing_violation(cur, sf_n, gamma).max() <= 1e-7 and \
        cur.power().max() <= scenario.max_power * (1 + 1e-9)
    cur_obj = slot_objective(cur, links_n, scenario, 0)
    trace = []
    total_iters = 0
    status = "optimal"
    warm = dict(warm) if isinstance(warm, dict) else {"screened": None, "full": None}
    screen = gamma > 0

    def solve(g, key):
        nonlocal total_iters
        model = build_p4(scenario, links_n, sf_n, 0, sur, gamma=g, structure=structure)
        sol = conic.solve(model.problem, tol=solver_tol, max_iter=solver_max_iter,
                          settings=SOLVER_SETTINGS, warm=warm[key])
        total_iters += sol.iterations
        warm[key] = sol if np.all(np.isfinite(sol.info["state"]["w"])) else None
        return model, sol

    for it in range(max_outer):
        sur = rate_surrogate(cur, links_n, scenario, 0)
        sol = None
        if screen:
            # without the sensing rows; an optimum that clears them anyway is
            # optimal for the full model, so slack floors never reach the solver
            model, sol = solve(0.0, "screened")
            ok = sol.status is conic.Status.OPTIMAL
            if ok:
                cand = _clean(model.decode(sol.x), scenario.max_power)
                ok = sensing_slack(cand, sf_n, gamma).min() >= SENSING_TIGHTEN
            if not ok:
                log.debug("slot %d step %d: sensing rows active, solving the full model", n, it)
                screen, sol = False, None
        if sol is None:
            model, sol = solve(gamma, "full")
        if sol.status is conic.Status.INFEASIBLE:
            if it == 0 and not cur_feasible:
                raise InfeasibleError(f"slot {n}: beamforming subproblem infeasible "
                                      f"(sensing threshold {gamma:.3g} unattainable)")
            status = "solver_infeasible"
            break
        if sol.status is not conic.Status.OPTIMAL and not np.all(np.isfinite(sol.x)):
            status = sol.status.value
            break
        cand = _clean(model.decode(sol.x), scenario.max_power)
        viol = sensing_violation(cand, sf_n, gamma).max()
        if viol > 1e-7:
            if it == 0 and not cur_feasible and sol.status is not conic.Status.OPTIMAL:
                raise InfeasibleError(f"slot {n}: no sensing-feasible beamformer found")
            if cur_feasible:
                status = "inexact_step_rejected"
                break
        obj = slot_objective(cand, links_n, scenario, 0)
        if cur_feasible and obj < cur_obj:
            # drops below the solver accuracy just mean the iteration has settled
            if obj < cur_obj - SCA_NOISE * max(1.0, abs(cur_obj)):
                status = "nonmonotone_step_rejected"
            break
        gain = obj - cur_obj if cur_feasible else np.inf
        cur, cur_obj, cur_feasible = cand, obj, viol <= 1e-7
        trace.append(obj)
        if gain < tol_sca:
            break
    return SlotResult(beams=cur, trace=trace, status=status, solver_iters=total_iters, warm=warm)


@dataclass
class BeamformingResult:
    beams: BeamformerSet
    relaxed: BeamformerSet
    traces: list  # per slot
    objective: float
    status: list
    warm: list | None = None  # per-slot solver states for the next call


def solve_p3_sca(scenario: Scenario, links: LinkState, sf: SensingFunctionals,
                 start: BeamformerSet | None = None, gamma: float | None = None,
                 structure: str = "full", tol_sca: float = 1e-4, max_outer: int = 30,
                 solver_tol: float = 1e-7, solver_max_iter: int = 50000,
                 recover: bool = True, warm: list | None = None) -> BeamformingResult:
    """Beamforming block over every slot (slots are independent given the
    trajectory and filters).

    ``warm`` is the ``warm`` list of an earlier result on the same scenario.
    """
    gamma = scenario.sensing_threshold if gamma is None else gamma
    if start is None:
        start = initial_beams(scenario, links, sf, gamma, structure=structure)
    slots, traces, status, states = [], [], [], []
    for n in range(links.h.shape[0]):
        res = solve_slot_sca(scenario, links, sf, n, start.slot(n), gamma=gamma, structure=structure,
                             tol_sca=tol_sca, max_outer=max_outer, solver_tol=solver_tol,
                             solver_max_iter=solver_max_iter,
                             warm=None if warm is None else warm[n])
        states.append(res.warm)
        slots.append(res.beams)
        traces.append(res.trace)
        status.append(res.status)
    relaxed = BeamformerSet(cov_c=np.concatenate([b.cov_c for b in slots]),
                            cov_r=np.concatenate([b.cov_r for b in slots]))
    beams = rank_one_recovery(relaxed, links, scenario, strict=False) if (
        recover and structure == "full") else relaxed
    sinr = comm_sinr_all(beams, links, scenario)
    obj = float((np.log2(1 + sinr) @ scenario.weights).sum())
    return BeamformingResult(beams=beams, relaxed=relaxed, traces=traces, objective=obj, status=status,
                             warm=states)


# -- rank-one recovery ---------------------------------------------------------------

def rank_one_recovery(relaxed: BeamformerSet, links: LinkState, scenario: Scenario,
                      strict: bool = True) -> BeamformerSet:
    """Rank-one communication beams that keep every ``X_j`` and every
    useful-signal power.

    ``w = W h / sqrt(h^H W h)`` reproduces ``h^H W h``; the remainder
    ``W - w w^H`` (PSD) is shared evenly among the sensing streams of the
    same BS.  Since total received power and useful power are unchanged,
    every SINR is unchanged too.

    Raises
    ------
    DegenerateError
        ``strict`` and some stream with nonzero power has
        ``h^H W h <= 1e-14 P_max``.  With ``strict=False`` such a stream's
        covariance is folded into the sensing streams instead.
    """
    cs = scenario.comm_indices
    n_slots, m = relaxed.cov_c.shape[:2]
    k_uav = relaxed.cov_r.shape[2]
    l = relaxed.cov_c.shape[-1]
    w_c = np.zeros((n_slots, m, len(cs), l), complex)
    cov_r = relaxed.cov_r.copy()
    resid = np.zeros((n_slots, m, l, l), complex)
    floor = 1e-14 * scenario.max_power
    for n in range(n_slots):
        for j in range(m):
            for c, k in enumerate(cs):
                wmat = hermitian(relaxed.cov_c[n, j, c], warn=False)
                h = links.h[n, j, k]
                wh = wmat @ h
                val = float(np.real(np.vdot(h, wh)))
                if val <= floor:
                    if np.real(np.trace(wmat)) > floor and strict:
                        raise DegenerateError(f"slot {n}, BS {j}, UAV {k}: no signal along the channel")
                    resid[n, j] += wmat
                    continue
                w = wh / np.sqrt(val)
                w_c[n, j, c] = w
                resid[n, j] += wmat - np.outer(w, np.conj(w))
    if k_uav:
        cov_r = cov_r + resid[:, :, None] / k_uav
    cov_r = hermitian(cov_r, warn=False)
    neg = np.linalg.eigvalsh(cov_r).min(axis=-1) if cov_r.size else np.zeros(0)
    # judge negativity against the BS's whole transmit power, not the stream's
    scale = np.maximum(np.real(np.trace(relaxed.tx_cov(), axis1=-2, axis2=-1)), floor)[..., None]
    if np.any(neg < -1e-9 * scale):
        log.warning("recovered sensing covariance indefinite (min eig %.3e); projecting", float(neg.min()))
    if np.any(neg < 0):
        cov_r = psd_project(cov_r)
    return BeamformerSet(cov_c=_outer(w_c), cov_r=cov_r, w_c=w_c, w_r=None)
