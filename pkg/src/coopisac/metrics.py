"""Closed-form performance expressions.

Beamformer and filter arrays are slot-major: covariances are stored as
``cov_c[n, m, i]`` / ``cov_r[n, m, i]`` (L x L each) and filters as
``u[n, j, k]``.  Communication streams are indexed by position in
``scenario.comm_indices``; sensing streams and filters by UAV index.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .channel import LinkState, StaticChannels
from .errors import DegenerateError, ShapeError
from .linalg import hermitian
from .scenario import Scenario

LOG2E = 1.0 / np.log(2.0)


def _outer(w):
    return w[..., :, None] * np.conj(w[..., None, :])


@dataclass
class BeamformerSet:
    """Transmit covariances (and, when known, the beamforming vectors)."""

    cov_c: np.ndarray
    cov_r: np.ndarray
    w_c: np.ndarray | None = None
    w_r: np.ndarray | None = None

    @classmethod
    def from_vectors(cls, w_c, w_r) -> "BeamformerSet":
        w_c = np.asarray(w_c, dtype=complex)
        w_r = np.asarray(w_r, dtype=complex)
        return cls(cov_c=_outer(w_c), cov_r=_outer(w_r), w_c=w_c, w_r=w_r)

    @classmethod
    def zeros(cls, scenario: Scenario, num_slots: int | None = None) -> "BeamformerSet":
        n = scenario.num_slots if num_slots is None else num_slots
        m, l = scenario.num_bs, scenario.antenna_count
        return cls(
            cov_c=np.zeros((n, m, scenario.num_comm, l, l), complex),
            cov_r=np.zeros((n, m, scenario.num_uavs, l, l), complex),
        )

    @property
    def num_slots(self) -> int:
        return self.cov_c.shape[0]

    def tx_cov(self) -> np.ndarray:
        """``X[n, m]`` for every slot and BS."""
        return self.cov_c.sum(axis=2) + self.cov_r.sum(axis=2)

    def power(self) -> np.ndarray:
        """Per-BS, per-slot transmit power ``[n, m]``."""
        return np.real(np.trace(self.tx_cov(), axis1=-2, axis2=-1))

    def slot(self, n: int) -> "BeamformerSet":
        pick = lambda a: None if a is None else a[n:n + 1]
        return BeamformerSet(self.cov_c[n:n + 1], self.cov_r[n:n + 1],
                             pick(self.w_c), pick(self.w_r))

    def copy(self) -> "BeamformerSet":
        cp = lambda a: None if a is None else a.copy()
        return BeamformerSet(self.cov_c.copy(), self.cov_r.copy(), cp(self.w_c), cp(self.w_r))


@dataclass
class FilterSet:
    u: np.ndarray  # [n, j, k, L], unit norm

    @classmethod
    def matched(cls, links: LinkState) -> "FilterSet":
        """Steering-matched unit filters ``a_{j,k} / sqrt(L)``."""
        l = links.a.shape[-1]
        return cls(u=links.a / np.sqrt(l))

    def copy(self) -> "FilterSet":
        return FilterSet(self.u.copy())


@dataclass
class MetricsReport:
    comm_sinr: np.ndarray  # [n, k], 0 for sensing-only UAVs
    rates: np.ndarray  # [n, k] bits/s/Hz
    slot_rates: np.ndarray  # [n]
    objective: float
    sens_sinr: np.ndarray = field(default=None)  # [n, k], aggregate echo SINR
    sens_sinr_per_bs: np.ndarray = field(default=None)  # [n, j, k]

    def to_dict(self) -> dict:
        d = {
            "objective": self.objective,
            "slot_rates": self.slot_rates.tolist(),
            "rates": self.rates.tolist(),
            "comm_sinr": self.comm_sinr.tolist(),
        }
        if self.sens_sinr is not None:
            d["sens_sinr"] = self.sens_sinr.tolist()
            d["sens_sinr_per_bs"] = self.sens_sinr_per_bs.tolist()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self, comm_mask=None) -> str:
        """Rows ``slot,uav,comm_sinr_db,rate,sens_sinr_db`` (slots 1-based)."""
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["slot", "uav", "comm_sinr_db", "rate", "sens_sinr_db"])
        n_slots, n_uav = self.rates.shape
        for n in range(n_slots):
            for k in range(n_uav):
                is_comm = True if comm_mask is None else bool(comm_mask[k])
                c = 10 * np.log10(self.comm_sinr[n, k]) if is_comm and self.comm_sinr[n, k] > 0 else float("nan")
                s = (10 * np.log10(self.sens_sinr[n, k])
                     if self.sens_sinr is not None and self.sens_sinr[n, k] > 0 else float("nan"))
                wr.writerow([n + 1, k, repr(float(c)), repr(float(self.rates[n, k])), repr(float(s))])
        return buf.getvalue()


# -- covariance ---------------------------------------------------------------

def tx_covariance(beams: BeamformerSet, m: int, n: int) -> np.ndarray:
    """``X_m[n] = sum_t W^c_{m,t} + sum_t W^r_{m,t}``."""
    return beams.cov_c[n, m].sum(axis=0) + beams.cov_r[n, m].sum(axis=0)


# -- communication -------------------------------------------------------------

def received_powers(cov: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``h_{n,m,k}^H W_{n,m,i} h_{n,m,k}`` as an array ``[n, k, m, i]``."""
    return np.real(np.einsum("nmkp,nmipq,nmkq->nkmi", np.conj(h), cov, h))


def comm_sinr_all(beams: BeamformerSet, links: LinkState, scenario: Scenario) -> np.ndarray:
    """Communication SINR ``[n, k]`` in trace form; 0 for sensing-only UAVs."""
    cs = scenario.comm_indices
    n_slots = beams.num_slots
    out = np.zeros((n_slots, scenario.num_uavs))
    if len(cs) == 0:
        return out
    pc = received_powers(beams.cov_c, links.h)  # [n, k, m, i]
    pr = received_powers(beams.cov_r, links.h)
    total_c = pc.sum(axis=(2, 3))
    total_r = pr.sum(axis=(2, 3))
    for c, k in enumerate(cs):
        sig = pc[:, k, :, c].sum(axis=1)
        interf = total_c[:, k] - sig + total_r[:, k]
        out[:, k] = sig / (interf + scenario.noise_power_comm)
    return out


def comm_sinr(k: int, n: int, beams: BeamformerSet, links: LinkState,
              scenario: Scenario, form: str = "trace") -> float:
    """SINR of comm UAV ``k`` (a UAV index) in slot ``n``.

    ``form="vector"`` evaluates ``|h^H w|^2`` sums from the stored vectors;
    ``form="trace"`` uses ``tr(H W)`` on the covariances.
    """
    cs = list(scenario.comm_indices)
    if k not in cs:
        raise ValueError(f"UAV {k} is sensing-only")
    c = cs.index(k)
    h = links.h[n, :, k]  # [m, L]
    sigma2 = scenario.noise_power_comm
    if form == "vector":
        if beams.w_c is None or beams.w_r is None:
            raise ValueError("beamforming vectors not available")
        gc = np.abs(np.einsum("mp,mip->mi", np.conj(h), beams.w_c[n])) ** 2
        gr = np.abs(np.einsum("mp,mip->mi", np.conj(h), beams.w_r[n])) ** 2
        sig = gc[:, c].sum()
        interf = gc.sum() - sig + gr.sum()
        return float(sig / (interf + sigma2))
    if form == "trace":
        hh = _outer(h)  # H_{m,k}
        tc = np.real(np.einsum("mpq,miqp->mi", hh, beams.cov_c[n]))
        tr = np.real(np.einsum("mpq,miqp->mi", hh, beams.cov_r[n]))
        sig = tc[:, c].sum()
        interf = tc.sum() - sig + tr.sum()
        return float(sig / (interf + sigma2))
    raise ValueError(f"unknown form {form!r}")


def rate(sinr):
    return np.log2(1.0 + np.asarray(sinr))


def weighted_sum_rate(beams: BeamformerSet, links: LinkState, scenario: Scenario,
                      weights=None) -> MetricsReport:
    w = scenario.weights if weights is None else np.asarray(weights, dtype=float)
    sinr = comm_sinr_all(beams, links, scenario)
    r = rate(sinr)
    slot = r @ w
    return MetricsReport(comm_sinr=sinr, rates=r, slot_rates=slot, objective=float(slot.sum()))


def objective_value(beams: BeamformerSet, links: LinkState, scenario: Scenario) -> float:
    return weighted_sum_rate(beams, links, scenario).objective


# -- sensing -------------------------------------------------------------------

@dataclass(frozen=True)
class SensingFunctionals:
    """Filter-projected vectors that make every sensing power a quadratic
    form ``b^H X b`` of some BS's transmit covariance.

    Arrays are indexed ``[n, j, k]`` for receiving BS j and target UAV k:

    - ``echo``: ``A_{j,k}^H u_{j,k}`` (weight sigma_t^2, acts on X_j)
    - ``clutter[n, j, k, l]``: ``A_{j,l}^H u_{j,k}`` (weight sigma_t^2, X_j, l != k)
    - ``si``: ``H_SI,j^H u_{j,k}`` (weight zeta_j, X_j)
    - ``ib[n, i, j, k]``: ``G_{i,j}^H u_{j,k}`` (weight alpha_ij * gain_ij, X_i)
    - ``noise_bs[n, j, k]``: ``sigma_r^2 |u_{j,k}|^2``; ``noise`` sums it over j
    """

    echo: np.ndarray
    clutter: np.ndarray
    si: np.ndarray
    ib: np.ndarray
    noise_bs: np.ndarray
    ib_weight: np.ndarray  # [i, j]
    si_weight: np.ndarray  # [j]
    rcs: float

    @property
    def noise(self) -> np.ndarray:
        return self.noise_bs.sum(axis=1)


def sensing_functionals(filters: FilterSet, links: LinkState, statics: StaticChannels,
                        scenario: Scenario) -> SensingFunctionals:
    u = filters.u  # [n, j, k, L]
    a = links.a  # [n, j, l, L]
    sqrt_rho = np.sqrt(links.rho)  # [n, j, l]
    # A_{j,l}^H u_{j,k} = sqrt(rho_jl) a_jl (a_jl^H u_jk)
    proj = np.einsum("njlp,njkp->njkl", np.conj(a), u)  # a_jl^H u_jk
    clutter = (sqrt_rho[:, :, None, :] * proj)[..., None] * a[:, :, None, :, :]
    k_idx = np.arange(scenario.num_uavs)
    echo = clutter[:, :, k_idx, k_idx, :]
    si = np.einsum("jqp,njkq->njkp", np.conj(statics.h_si), u)
    ib = np.einsum("ijqp,njkq->nijkp", np.conj(statics.g), u)
    noise_bs = scenario.noise_power_radar * np.sum(np.abs(u) ** 2, axis=-1)
    alpha = scenario.inter_bs_coeff * statics.g_gain
    return SensingFunctionals(echo=echo, clutter=clutter, si=si, ib=ib, noise_bs=noise_bs,
                              ib_weight=alpha, si_weight=np.asarray(scenario.si_coeff),
                              rcs=scenario.rcs_variance)


def _qf(b, x):
    """``b^H X b`` with broadcasting; b [..., L], X [..., L, L]."""
    return np.real(np.einsum("...p,...pq,...q->...", np.conj(b), x, b))


def sensing_components(x: np.ndarray, sf: SensingFunctionals) -> tuple[np.ndarray, np.ndarray]:
    """Per-BS echo power and interference-plus-noise power, both ``[n, j, k]``.

    ``x`` holds the transmit covariances ``X[n, m]``.
    """
    n_slots, m, k_uav = sf.echo.shape[:3]
    xj = x[:, :, None]  # [n, j, 1, L, L]
    num = sf.rcs * _qf(sf.echo, xj)
    clut = sf.rcs * _qf(sf.clutter, x[:, :, None, None])  # [n, j, k, l]
    k_idx = np.arange(k_uav)
    clut[:, :, k_idx, k_idx] = 0.0
    den = clut.sum(axis=-1)
    den += sf.si_weight[None, :, None] * _qf(sf.si, xj)
    ibp = _qf(sf.ib, x[:, :, None, None])  # [n, i, j, k]
    den += np.einsum("ij,nijk->njk", sf.ib_weight * (1 - np.eye(m)), ibp)
    den += sf.noise_bs
    return num, den


def sensing_sinr_all(beams: BeamformerSet, filters: FilterSet, links: LinkState,
                     statics: StaticChannels, scenario: Scenario):
    """Aggregate sensing SINR ``[n, k]`` and per-BS quotients ``[n, j, k]``.

    The aggregate is total filtered echo power over total filtered
    interference-plus-noise power across BSs; the per-BS quotient is the
    generalized Rayleigh quotient of each BS's filter on its own.
    """
    sf = sensing_functionals(filters, links, statics, scenario)
    x = beams.tx_cov()
    num, den = sensing_components(x, sf)
    if np.any(den <= 0):
        raise DegenerateError("non-positive sensing denominator")
    return num.sum(axis=1) / den.sum(axis=1), num / den


def sensing_sinr(k: int, n: int, beams: BeamformerSet, filters: FilterSet,
                 links: LinkState, statics: StaticChannels, scenario: Scenario) -> float:
    agg, _ = sensing_sinr_all(beams.slot(n), FilterSet(filters.u[n:n + 1]),
                              _slot_links(links, n), statics, scenario)
    return float(agg[0, k])


def sensing_sinr_terms(k: int, n: int, beams, filters, links, statics, scenario) -> np.ndarray:
    """Per-BS quotients ``u^H E u / u^H F u`` for UAV ``k`` in slot ``n``."""
    _, per = sensing_sinr_all(beams.slot(n), FilterSet(filters.u[n:n + 1]),
                              _slot_links(links, n), statics, scenario)
    return per[0, :, k]


def _slot_links(links: LinkState, n: int) -> LinkState:
    return LinkState(*(getattr(links, f)[n:n + 1] for f in
                       ("cos_theta", "sq_dist", "beta", "rho", "a", "h")))


def sensing_constraint_matrices(sf: SensingFunctionals, gamma: float):
    """Hermitian ``Q[n, j, k]`` and right-hand side ``rhs[n, k]`` such that
    the aggregate sensing constraint reads ``sum_j tr(Q_jk X_j) >= rhs_k``.
    """
    m = sf.echo.shape[1]
    k_uav = sf.echo.shape[2]
    q = sf.rcs * _outer(sf.echo)
    clut = _outer(sf.clutter)  # [n, j, k, l, L, L]
    k_idx = np.arange(k_uav)
    clut[:, :, k_idx, k_idx] = 0.0
    q = q - gamma * sf.rcs * clut.sum(axis=3)
    q = q - gamma * sf.si_weight[None, :, None, None, None] * _outer(sf.si)
    # leakage of X_i into receiver j: coefficient lands on BS i's covariance
    w = sf.ib_weight * (1 - np.eye(m))
    q = q - gamma * np.einsum("ij,nijkpq->nikpq", w, _outer(sf.ib))
    return hermitian(q, warn=False), gamma * sf.noise


def sensing_margin(beams: BeamformerSet, sf: SensingFunctionals, gamma: float) -> np.ndarray:
    """``sum_j tr(Q_jk X_j) - rhs_k`` per ``[n, k]`` (>= 0 means feasible)."""
    q, rhs = sensing_constraint_matrices(sf, gamma)
    x = beams.tx_cov()
    val = np.real(np.einsum("njkpq,njqp->nk", q, x))
    return val - rhs


def check_shapes(beams: BeamformerSet, scenario: Scenario):
    l, m = scenario.antenna_count, scenario.num_bs
    if beams.cov_c.shape[1:] != (m, scenario.num_comm, l, l):
        raise ShapeError(f"cov_c shape {beams.cov_c.shape} does not fit scenario")
    if beams.cov_r.shape[1:] != (m, scenario.num_uavs, l, l):
        raise ShapeError(f"cov_r shape {beams.cov_r.shape} does not fit scenario")
