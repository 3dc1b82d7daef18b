"""Trajectory block: trust-region SCA over horizontal UAV positions.

With beams and filters fixed, the rate of a communication UAV in a slot
depends only on its own position, and the sensing constraint of target k
depends on every UAV's position through echo and clutter powers.  Both are
linearized around the current trajectory, the collision constraint is
replaced by its (conservative) tangent half-space, and the resulting
convex problem is solved inside a trust region.  A step is accepted only
if the exact objective improves and every exact constraint still holds;
otherwise the radius is halved.

Quadratic forms ``a^H W a`` of a ULA steering vector are evaluated in the
cosine form::

    a^H W a = sum_p W_pp + 2 sum_{p<q} |W_pq| cos(2 pi (d/lambda) (q - p) cos(theta) + arg W_pq)

which gives their derivative in ``cos(theta)`` in closed form.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from . import conic
from .channel import LinkState, StaticChannels, link_state
from .errors import InfeasibleError, ShapeError
from .metrics import (BeamformerSet, FilterSet, comm_sinr_all, sensing_components,
                      sensing_functionals, sensing_margin)
from .scenario import EchoModel, Scenario

log = logging.getLogger(__name__)

LN2 = np.log(2.0)
SPEED_TIGHTEN = 1e-6  # relative, inside the solver
COLLISION_TIGHTEN = 1e-6
SENSING_TIGHTEN = 1e-6
SPEED_TOL = 1e-9  # absolute slack allowed when certifying, meters
COLLISION_TOL = 1e-6
SENSING_TOL = 1e-7  # relative


@dataclass
class TrajectorySet:
    q: np.ndarray  # [K, N, 2]
    altitudes: np.ndarray  # [K]

    @classmethod
    def straight_line(cls, scenario: Scenario, num_slots: int | None = None) -> "TrajectorySet":
        """Uniform-speed straight lines between the endpoints."""
        n = scenario.num_slots if num_slots is None else num_slots
        t = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
        qi, qf = scenario.q_init, scenario.q_final
        q = qi[:, None, :] + t[None, :, None] * (qf - qi)[:, None, :]
        return cls(q=q, altitudes=scenario.altitudes.copy())

    @property
    def num_slots(self) -> int:
        return self.q.shape[1]

    def copy(self) -> "TrajectorySet":
        return TrajectorySet(self.q.copy(), self.altitudes.copy())


# -- geometry and quadratic forms ------------------------------------------------------

@lru_cache(maxsize=None)
def _pairs(l: int):
    iu = np.triu_indices(l, 1)
    return iu, (iu[1] - iu[0]).astype(float)


def qform_cos(cos_t, w, d_over_lambda: float):
    """``a^H W a`` and its derivative in ``cos(theta)``.

    ``cos_t`` has shape ``S`` and ``w`` shape ``S + (L, L)`` (broadcasting).
    """
    w = np.asarray(w)
    l = w.shape[-1]
    (ip, iq), lag = _pairs(l)
    diag = np.real(np.trace(w, axis1=-2, axis2=-1))
    if l == 1:
        return diag + 0.0 * cos_t, 0.0 * (diag + cos_t)
    off = w[..., ip, iq]
    mag, ang = np.abs(off), np.angle(off)
    k = 2.0 * np.pi * d_over_lambda * lag
    phase = k * np.asarray(cos_t)[..., None] + ang
    val = diag + 2.0 * np.sum(mag * np.cos(phase), axis=-1)
    dval = -2.0 * np.sum(mag * k * np.sin(phase), axis=-1)
    return val, dval


def _geom(q, v, h):
    """Slant range squared ``D``, ``cos(theta)`` and their gradients in q.

    q [..., 2], v [..., 2], h [...]; gradients have a trailing 2-axis.
    """
    diff = q - v
    d = np.sum(diff * diff, axis=-1) + h * h
    c = h / np.sqrt(d)
    dd = 2.0 * diff
    dc = (-h * d ** -1.5)[..., None] * diff
    return d, c, dd, dc


def _echo_and_slope(d, scenario: Scenario):
    kappa = scenario.ref_path_gain
    if scenario.echo_model is EchoModel.ROUND_TRIP:
        rho = kappa ** 2 / d ** 2
        return rho, -2.0 * rho / d
    rho = kappa / d
    return rho, -rho / d


# -- exact rate and its gradient -------------------------------------------------------

def rate_and_grad(pos, beams: BeamformerSet, scenario: Scenario, k: int, n: int):
    """Rate of comm UAV ``k`` in slot ``n`` at horizontal position ``pos`` and
    its gradient in ``pos``."""
    cs = list(scenario.comm_indices)
    c_idx = cs.index(k)
    pos = np.asarray(pos, dtype=float)
    v = scenario.bs_positions
    h = scenario.altitudes[k]
    d, c, dd, dc = _geom(pos[None, :], v, h)
    beta = scenario.ref_path_gain / d
    dbeta = (-beta / d)[:, None] * dd
    delta = scenario.antenna_spacing / scenario.carrier_wavelength
    x = beams.tx_cov()[n]  # [m, L, L]
    p_all, dp_all = qform_cos(c, x, delta)
    p_int, dp_int = qform_cos(c, x - beams.cov_c[n, :, c_idx], delta)
    tot = np.sum(beta * p_all)
    inter = np.sum(beta * p_int)
    g_tot = np.sum(dbeta * p_all[:, None] + (beta * dp_all)[:, None] * dc, axis=0)
    g_int = np.sum(dbeta * p_int[:, None] + (beta * dp_int)[:, None] * dc, axis=0)
    s2 = scenario.noise_power_comm
    r = np.log2(s2 + tot) - np.log2(s2 + inter)
    grad = (g_tot / (s2 + tot) - g_int / (s2 + inter)) / LN2
    return float(r), grad


def exact_rate_of_q(q, beams: BeamformerSet, scenario: Scenario, k: int, n: int) -> float:
    """Rate of comm UAV ``k`` in slot ``n``; ``q`` is a full trajectory
    ``[K, N, 2]`` or the UAV's position."""
    q = np.asarray(q, dtype=float)
    pos = q[k, n] if q.ndim == 3 else q
    return rate_and_grad(pos, beams, scenario, k, n)[0]


def objective_of_q(q, beams: BeamformerSet, scenario: Scenario) -> float:
    """Exact weighted sum rate over the horizon for trajectory ``q``."""
    sinr = comm_sinr_all(beams, link_state(scenario, q), scenario)
    return float((np.log2(1.0 + sinr) @ scenario.weights).sum())


# -- sensing traces ----------------------------------------------------------------

def sensing_traces(q, beams: BeamformerSet, filters: FilterSet, scenario: Scenario):
    """``T[n, j, l, k] = rho_jl |a_jl^H u_jk|^2 a_jl^H X_j a_jl`` and its
    gradient in ``q_l[n]`` (trailing 2-axis)."""
    q = np.asarray(q, dtype=float)
    k_uav, n_slots = q.shape[:2]
    v = scenario.bs_positions
    delta = scenario.antenna_spacing / scenario.carrier_wavelength
    x = beams.tx_cov()  # [n, j, L, L]
    u = filters.u  # [n, j, k, L]
    uu = u[..., :, None] * np.conj(u[..., None, :])  # [n, j, k, L, L]
    qn = q.transpose(1, 0, 2)  # [n, l, 2]
    d, c, dd, dc = _geom(qn[:, None, :, :], v[None, :, None, :], scenario.altitudes[None, None, :])
    rho, drho = _echo_and_slope(d, scenario)  # [n, j, l]
    b, db = qform_cos(c, x[:, :, None], delta)  # [n, j, l]
    a, da = qform_cos(c[:, :, :, None], uu[:, :, None], delta)  # [n, j, l, k]
    t = rho[..., None] * a * b[..., None]
    dt_dc = rho[..., None] * (da * b[..., None] + a * db[..., None])
    grad = ((drho[..., None] * a * b[..., None])[..., None] * dd[:, :, :, None, :]
            + dt_dc[..., None] * dc[:, :, :, None, :])
    return t, grad


def _sensing_constant(beams, filters, links, statics, scenario):
    """Trajectory-independent part of the interference: self-interference,
    inter-BS leakage and receiver noise, ``[n, j, k]``."""
    sf = sensing_functionals(filters, links, statics, scenario)
    sf0 = dataclasses.replace(sf, echo=np.zeros_like(sf.echo), clutter=np.zeros_like(sf.clutter))
    _, den = sensing_components(beams.tx_cov(), sf0)
    return den, sf.noise


def sensing_violation_of_q(q, beams, filters, statics, scenario, gamma) -> float:
    """Largest relative shortfall of the exact sensing constraint."""
    if gamma <= 0:
        return 0.0
    sf = sensing_functionals(filters, link_state(scenario, q), statics, scenario)
    margin = sensing_margin(beams, sf, gamma)
    return float(np.max(np.maximum(0.0, -margin / (gamma * sf.noise))))


# -- surrogate ---------------------------------------------------------------------------

@dataclass
class TrajSurrogate:
    q: np.ndarray  # expansion trajectory [K, N, 2]
    rate: np.ndarray  # [n, k] exact rate at q (0 for sensing-only UAVs)
    rate_grad: np.ndarray  # [n, k, 2]
    trace: np.ndarray  # T[n, j, l, k]
    trace_grad: np.ndarray  # [n, j, l, k, 2]
    constant: np.ndarray  # [n, j, k]
    noise: np.ndarray  # [n, k]
    gamma: float
    rcs: float
    radius: float
    pairs: list = field(default_factory=list)

    def sensing_value(self) -> np.ndarray:
        """Exact constraint function ``num - gamma * den`` at the expansion
        point, ``[n, k]``."""
        k_uav = self.trace.shape[2]
        eye = np.eye(k_uav, dtype=bool)
        own = self.rcs * np.einsum("njkk->nk", self.trace)
        clut = self.rcs * np.where(eye[None, None], 0.0, self.trace).sum(axis=(1, 2))
        return own - self.gamma * (clut + self.constant.sum(axis=1))

    def sensing_gradient(self) -> np.ndarray:
        """``G[n, k, l, 2]``: gradient of the constraint of target k in q_l."""
        k_uav = self.trace.shape[2]
        eye = np.eye(k_uav, dtype=bool)
        g = self.rcs * self.trace_grad.sum(axis=1)  # [n, l, k, 2]
        w = np.where(eye, 1.0, -self.gamma)  # [l, k]
        return np.einsum("lk,nlkx->nklx", w, g)

    def sensing_slack(self, q) -> np.ndarray:
        """Relative margin of the linearized sensing constraints at ``q``,
        ``[n, k]`` (``gamma > 0``)."""
        dq = np.asarray(q).transpose(1, 0, 2) - self.q.transpose(1, 0, 2)  # [n, l, 2]
        lin = self.sensing_value() + np.einsum("nklx,nlx->nk", self.sensing_gradient(), dq)
        return lin / (self.gamma * self.noise)

    def rate_value(self, q, weights) -> float:
        """Linearized weighted sum rate at ``q``."""
        dq = np.asarray(q).transpose(1, 0, 2) - self.q.transpose(1, 0, 2)
        return float(np.sum(weights * (self.rate + np.sum(self.rate_grad * dq, axis=-1))))


def build_traj_surrogate(scenario: Scenario, beams: BeamformerSet, filters: FilterSet,
                         statics: StaticChannels, q, radius: float,
                         gamma: float | None = None) -> TrajSurrogate:
    gamma = scenario.sensing_threshold if gamma is None else gamma
    q = np.asarray(q, dtype=float)
    k_uav, n_slots = q.shape[:2]
    rate = np.zeros((n_slots, k_uav))
    grad = np.zeros((n_slots, k_uav, 2))
    for k in scenario.comm_indices:
        for n in range(n_slots):
            rate[n, k], grad[n, k] = rate_and_grad(q[k, n], beams, scenario, k, n)
    t, tg = sensing_traces(q, beams, filters, scenario)
    links = link_state(scenario, q)
    const, noise = _sensing_constant(beams, filters, links, statics, scenario)
    return TrajSurrogate(q=q.copy(), rate=rate, rate_grad=grad, trace=t, trace_grad=tg,
                         constant=const, noise=noise, gamma=gamma, rcs=scenario.rcs_variance,
                         radius=radius, pairs=list(combinations(range(k_uav), 2)))


# -- parameterizations -------------------------------------------------------------------

@dataclass
class Parameterization:
    """Affine map ``vec(q) = q0 + T z`` with extra linear rows on ``z``.

    ``pins`` are ``(A, b)`` with ``A z = b``; ``ineq`` are ``(A, b)`` with
    ``A z <= b``.  ``vec`` flattens ``[K, N, 2]`` in C order.
    """

    q0: np.ndarray
    t: sp.csr_matrix
    pins: tuple
    ineq: tuple | None
    kind: str
    shape: tuple

    def positions(self, z) -> np.ndarray:
        return (self.q0 + self.t @ z).reshape(self.shape)


def free_parameterization(scenario: Scenario, q_ref, scale: float) -> Parameterization:
    """Every position free, ``q = q_ref + scale * z``, endpoints pinned."""
    q_ref = np.asarray(q_ref, dtype=float)
    k_uav, n_slots = q_ref.shape[:2]
    size = k_uav * n_slots * 2
    t = sp.identity(size, format="csr") * scale
    rows, rhs = [], []
    for k in range(k_uav):
        for n, target in ((0, scenario.q_init[k]), (n_slots - 1, scenario.q_final[k])):
            for x in range(2):
                rows.append((k * n_slots + n) * 2 + x)
                rhs.append((target[x] - q_ref[k, n, x]) / scale)
    a = sp.csr_matrix((np.ones(len(rows)), (np.arange(len(rows)), rows)), shape=(len(rows), size))
    return Parameterization(q0=q_ref.ravel().copy(), t=t, pins=(a, np.array(rhs)), ineq=None,
                            kind="free", shape=q_ref.shape)


def line_parameterization(scenario: Scenario, num_slots: int) -> Parameterization:
    """Positions on the straight segments, ``q = q_I + s (q_F - q_I)``,
    with ``0 = s_0 <= s_1 <= ... <= s_{N-1} = 1``."""
    qi, qf = scenario.q_init, scenario.q_final
    k_uav = qi.shape[0]
    n_slots = num_slots
    q0 = np.repeat(qi[:, None, :], n_slots, axis=1).ravel()
    rows, cols, vals = [], [], []
    for k in range(k_uav):
        for n in range(n_slots):
            for x in range(2):
                rows.append((k * n_slots + n) * 2 + x)
                cols.append(k * n_slots + n)
                vals.append(qf[k, x] - qi[k, x])
    t = sp.csr_matrix((vals, (rows, cols)), shape=(k_uav * n_slots * 2, k_uav * n_slots))
    pin_cols = [k * n_slots for k in range(k_uav)] + [k * n_slots + n_slots - 1 for k in range(k_uav)]
    pins = (sp.csr_matrix((np.ones(2 * k_uav), (np.arange(2 * k_uav), pin_cols)),
                          shape=(2 * k_uav, k_uav * n_slots)),
            np.r_[np.zeros(k_uav), np.ones(k_uav)])
    # s_n - s_{n+1} <= 0
    r, c, v = [], [], []
    i = 0
    for k in range(k_uav):
        for n in range(n_slots - 1):
            r += [i, i]
            c += [k * n_slots + n, k * n_slots + n + 1]
            v += [1.0, -1.0]
            i += 1
    ineq = (sp.csr_matrix((v, (r, c)), shape=(i, k_uav * n_slots)), np.zeros(i))
    return Parameterization(q0=q0, t=t, pins=pins, ineq=ineq, kind="line",
                            shape=(k_uav, n_slots, 2))


def line_progress(scenario: Scenario, q) -> np.ndarray:
    """Progress ``s[k, n]`` of positions along their segments."""
    qi, qf = scenario.q_init, scenario.q_final
    seg = qf - qi
    den = np.sum(seg * seg, axis=-1)
    s = np.einsum("knx,kx->kn", np.asarray(q) - qi[:, None, :], seg) / np.where(den > 0, den, 1.0)[:, None]
    return np.where(den[:, None] > 0, s, 0.0)


# -- P8 -------------------------------------------------------------------------------

@dataclass
class P8Model:
    problem: conic.ConicProblem
    param: Parameterization
    counts: dict

    def decode(self, z) -> np.ndarray:
        return self.param.positions(z)


def _rows(t: sp.csr_matrix, k: int, n: int, n_slots: int) -> sp.csr_matrix:
    i = (k * n_slots + n) * 2
    return t[i:i + 2]


def build_p8(sur: TrajSurrogate, scenario: Scenario, param: Parameterization | None = None,
             weights=None, sensing: bool = True) -> P8Model:
    """Convex trajectory subproblem around ``sur.q`` (without the sensing
    rows when ``sensing`` is false)."""
    q_f = sur.q
    k_uav, n_slots = q_f.shape[:2]
    if sur.rate.shape != (n_slots, k_uav):
        raise ShapeError(f"surrogate covers {sur.rate.shape}, trajectory is ({n_slots}, {k_uav})")
    step = scenario.step_budget
    scale = max(step, 1e-9)
    if param is None:
        param = free_parameterization(scenario, q_f, scale)
    weights = scenario.weights if weights is None else np.asarray(weights, float)
    t = param.t
    nz = t.shape[1]
    base = param.q0.reshape(k_uav, n_slots, 2)  # position at z = 0
    bld = conic.ProblemBuilder()
    bld.var("z", nz)
    counts = {"speed": 0, "trust": 0, "collision": 0, "sensing": 0, "pins": 0, "order": 0}

    # objective: maximize sum_w d . q
    obj = np.zeros(nz)
    for k in scenario.comm_indices:
        for n in range(n_slots):
            obj -= weights[k] * (_rows(t, k, n, n_slots).T @ sur.rate_grad[n, k])
    bld.set_objective(obj / max(1.0, np.abs(obj).max()))

    # endpoint pins
    a_pin, b_pin = param.pins
    bld.add_eq(a_pin, b_pin)
    counts["pins"] = 2 * k_uav
    if param.ineq is not None:
        bld.add_ge0(param.ineq[0], param.ineq[1])
        counts["order"] = param.ineq[0].shape[0]

    # speed: |q_{n+1} - q_n| <= step, rows scaled by 1 / scale
    for k in range(k_uav):
        for n in range(n_slots - 1):
            tk = (_rows(t, k, n + 1, n_slots) - _rows(t, k, n, n_slots)) / scale
            off = (base[k, n + 1] - base[k, n]) / scale
            bld.add_soc(sp.vstack([sp.csr_matrix((1, nz)), -tk]),
                        np.r_[step / scale * (1.0 - SPEED_TIGHTEN), off])
            counts["speed"] += 1

    # trust region: |q_k[n] - q_f| <= radius
    for k in range(k_uav):
        for n in range(n_slots):
            tk = _rows(t, k, n, n_slots) / scale
            off = (base[k, n] - q_f[k, n]) / scale
            bld.add_soc(sp.vstack([sp.csr_matrix((1, nz)), -tk]), np.r_[sur.radius / scale, off])
            counts["trust"] += 1

    # collision: |dq_f|^2 + 2 dq_f . (dq - dq_f) + dH^2 >= Dmin^2
    dmin2 = scenario.dmin ** 2 * (1.0 + COLLISION_TIGHTEN)
    alt = scenario.altitudes
    rows, rhs = [], []
    for k, kk in sur.pairs:
        dh2 = (alt[k] - alt[kk]) ** 2
        for n in range(n_slots):
            df = q_f[k, n] - q_f[kk, n]
            tk = _rows(t, k, n, n_slots) - _rows(t, kk, n, n_slots)
            need = 0.5 * (dmin2 - dh2 + df @ df)  # df . dq >= need
            norm = max(scenario.dmin ** 2, 1.0)
            rows.append(sp.csr_matrix(-(df @ tk) / norm))
            rhs.append((df @ (base[k, n] - base[kk, n]) - need) / norm)
            counts["collision"] += 1
    if rows:
        bld.add_ge0(sp.vstack(rows), np.array(rhs))

    # sensing: g0 + sum_l G_l . (q_l - q_f,l) >= tighten * rhs, scaled by rhs
    if sensing and sur.gamma > 0:
        g0 = sur.sensing_value()  # [n, k]
        g = sur.sensing_gradient()  # [n, k, l, 2]
        rows, rhs = [], []
        for k in range(k_uav):
            for n in range(n_slots):
                norm = sur.gamma * sur.noise[n, k]
                row = sp.csr_matrix((1, nz))
                const = g0[n, k]
                for l in range(k_uav):
                    row = row + sp.csr_matrix(g[n, k, l] @ _rows(t, l, n, n_slots))
                    const += g[n, k, l] @ (base[l, n] - q_f[l, n])
                rows.append(-row / norm)
                rhs.append((const - SENSING_TIGHTEN * norm) / norm)
                counts["sensing"] += 1
        bld.add_ge0(sp.vstack(rows), np.array(rhs))

    return P8Model(problem=bld.build(), param=param, counts=counts)


# -- certification -----------------------------------------------------------------------

@dataclass
class ConstraintAudit:
    speed: float  # max |dq| - V dt (<= 0 when feasible)
    collision: float  # Dmin - min separation (<= 0 when feasible)
    endpoints: float  # max endpoint deviation
    sensing: float  # largest relative sensing shortfall

    def ok(self, sensing: bool = True) -> bool:
        return (self.speed <= SPEED_TOL and self.collision <= COLLISION_TOL
                and self.endpoints <= 1e-9 and (not sensing or self.sensing <= SENSING_TOL))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def min_separation(q, altitudes) -> float:
    q = np.asarray(q, dtype=float)
    k_uav = q.shape[0]
    best = np.inf
    for k, kk in combinations(range(k_uav), 2):
        d = np.sqrt(np.sum((q[k] - q[kk]) ** 2, axis=-1) + (altitudes[k] - altitudes[kk]) ** 2)
        best = min(best, float(d.min()))
    return best


def audit(q, scenario: Scenario, beams=None, filters=None, statics=None, gamma=None) -> ConstraintAudit:
    q = np.asarray(q, dtype=float)
    step = np.linalg.norm(np.diff(q, axis=1), axis=-1)
    speed = float(step.max() - scenario.step_budget) if step.size else -scenario.step_budget
    sep = min_separation(q, scenario.altitudes)
    coll = float(scenario.dmin - sep) if np.isfinite(sep) else -np.inf
    ends = float(max(np.abs(q[:, 0] - scenario.q_init).max(), np.abs(q[:, -1] - scenario.q_final).max()))
    sens = 0.0
    if beams is not None and filters is not None and statics is not None:
        gamma = scenario.sensing_threshold if gamma is None else gamma
        sens = sensing_violation_of_q(q, beams, filters, statics, scenario, gamma)
    return ConstraintAudit(speed=speed, collision=coll, endpoints=ends, sensing=sens)


# -- Algorithm: trust-region SCA -------------------------------------------------------------

@dataclass
class TrajectoryResult:
    trajectory: TrajectorySet
    objective: float
    trace: list  # one dict per inner attempt
    status: str
    accepted: int = 0


def _snap(q, param: Parameterization, scenario: Scenario) -> np.ndarray:
    """Put endpoints exactly on their pins (solver output is accurate to
    round-off only)."""
    q = q.copy()
    if param.kind == "line":
        s = np.clip(line_progress(scenario, q), 0.0, 1.0)
        s[:, 0], s[:, -1] = 0.0, 1.0
        s = np.maximum.accumulate(s, axis=1)
        qi, qf = scenario.q_init, scenario.q_final
        return qi[:, None, :] + s[..., None] * (qf - qi)[:, None, :]
    q[:, 0] = scenario.q_init
    q[:, -1] = scenario.q_final
    return q


def solve_p7_trust_region(scenario: Scenario, beams: BeamformerSet, filters: FilterSet,
                          statics: StaticChannels, start: TrajectorySet, gamma: float | None = None,
                          eps0: float | None = None, eps_min: float = 1e-3, tol_outer: float = 1e-4,
                          max_outer: int = 50, kind: str = "free", solver_tol: float = 1e-7,
                          solver_max_iter: int = 20000) -> TrajectoryResult:
    """Trust-region SCA from ``start``.

    Each outer iteration re-linearizes at the current trajectory and starts
    from radius ``min(eps0, 2 * last accepted radius)``; a candidate is
    accepted when its exact objective is higher and the exact speed,
    collision, endpoint and sensing constraints hold, otherwise the radius
    is halved.  Each subproblem is first solved without the sensing rows;
    the linearized rows are added only when that candidate is rejected and
    violates them or the exact sensing constraint.  The outer loop stops
    when an accepted step gains less than ``tol_outer`` or the radius drops
    below ``eps_min``.

    Raises
    ------
    InfeasibleError
        The starting trajectory already violates the sensing constraint.
    """
    gamma = scenario.sensing_threshold if gamma is None else gamma
    eps0 = scenario.step_budget if eps0 is None else eps0
    q = start.q.copy()
    start_sens = sensing_violation_of_q(q, beams, filters, statics, scenario, gamma)
    if start_sens > SENSING_TOL:
        raise InfeasibleError(f"starting trajectory violates the sensing constraint "
                              f"(relative shortfall {start_sens:.3e})")
    obj = objective_of_q(q, beams, scenario)
    trace: list = []
    accepted = 0
    status = "converged"
    if eps0 < eps_min:
        return TrajectoryResult(start.copy(), obj, trace, "radius_below_minimum", 0)
    scale = max(scenario.step_budget, 1e-9)
    eps_next = eps0
    warm = {True: None, False: None}

    def attempt(sur, param, sensing, outer):
        model = build_p8(sur, scenario, param, sensing=sensing)
        sol = conic.solve(model.problem, tol=solver_tol, max_iter=solver_max_iter, warm=warm[sensing])
        warm[sensing] = sol if np.all(np.isfinite(sol.info["state"]["w"])) else None
        entry = {"outer": outer, "radius": sur.radius, "solver": sol.status.value, "sensing_rows": sensing,
                 "surrogate": float("nan"), "exact": float("nan"), "accepted": False}
        cand, linear_ok, chk = None, False, None
        if np.all(np.isfinite(sol.x)) and sol.status in (conic.Status.OPTIMAL, conic.Status.MAX_ITER):
            z = model.decode(sol.x)
            linear_ok = gamma <= 0 or sur.sensing_slack(z).min() >= SENSING_TIGHTEN
            cand = _snap(z, param, scenario)
            cand_obj = objective_of_q(cand, beams, scenario)
            chk = audit(cand, scenario, beams, filters, statics, gamma)
            entry.update(surrogate=sur.rate_value(cand, scenario.weights), exact=cand_obj,
                         audit=chk.to_dict())
            entry["accepted"] = bool(cand_obj > obj and chk.ok(sensing=gamma > 0))
        trace.append(entry)
        return entry, cand, linear_ok and (chk is None or chk.sensing <= SENSING_TOL)

    for outer in range(max_outer):
        eps = eps_next
        moved = False
        while eps >= eps_min:
            sur = build_traj_surrogate(scenario, beams, filters, statics, q, eps, gamma)
            param = (free_parameterization(scenario, q, scale) if kind == "free"
                     else line_parameterization(scenario, q.shape[1]))
            # Without the sensing rows first: a step that passes the exact
            # audit is valid whatever the linearization says, and a rejected
            # step that clears the rows is also the full model's optimum.
            entry, cand, clear = attempt(sur, param, gamma <= 0, outer)
            if not entry["accepted"] and not clear:
                log.debug("radius %.3g: sensing rows active, solving the full model", eps)
                entry, cand, _ = attempt(sur, param, True, outer)
            if entry["accepted"]:
                gain = entry["exact"] - obj
                q, obj = cand, entry["exact"]
                accepted += 1
                moved = True
                eps_next = min(eps0, 2.0 * eps)
                break
            eps /= 2.0
        if not moved:
            status = "radius_below_minimum"
            break
        if gain < tol_outer:
            status = "converged"
            break
    else:
        status = "max_outer"
    return TrajectoryResult(TrajectorySet(q, start.altitudes.copy()), obj, trace, status, accepted)
