"""Receive-filter block.

With the transmit covariances fixed, each BS's filter for each target only
changes that BS's own echo and interference powers, so the per-BS
quotient ``u^H E u / u^H F u`` is maximized independently by the dominant
generalized eigenvector of ``(E, F)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LinkState, StaticChannels
from .errors import SingularError
from .linalg import hermitian, max_generalized_eig
from .metrics import BeamformerSet, FilterSet, _outer, sensing_components, sensing_functionals
from .scenario import Scenario


@dataclass
class EchoCovariances:
    """Echo covariance ``e`` and interference-plus-noise covariance ``f`` of
    every receiving BS j and target k, both ``[n, j, k, L, L]``."""

    e: np.ndarray
    f: np.ndarray


def build_ef(beams: BeamformerSet, links: LinkState, statics: StaticChannels,
             scenario: Scenario) -> EchoCovariances:
    """Echo and interference covariances for all slots, BSs and targets."""
    x = beams.tx_cov()  # [n, m, L, L]
    a = links.a  # [n, j, l, L]
    rcs = scenario.rcs_variance
    l_ant = a.shape[-1]
    k_uav = a.shape[2]
    # sigma_t^2 A_jl X_j A_jl^H = sigma_t^2 rho_jl (a^H X_j a) a a^H
    gain = rcs * links.rho * np.real(np.einsum("njlp,njpq,njlq->njl", np.conj(a), x, a))
    refl = gain[..., None, None] * _outer(a)  # [n, j, l, L, L]
    e = refl
    si = np.einsum("jpq,njqr,jsr->njps", statics.h_si, x, np.conj(statics.h_si))
    si = np.asarray(scenario.si_coeff)[None, :, None, None] * si
    w = scenario.inter_bs_coeff * statics.g_gain * (1 - np.eye(scenario.num_bs))
    ib = np.einsum("ij,ijpq,niqr,ijsr->njps", w, statics.g, x, np.conj(statics.g))
    base = si + ib + scenario.noise_power_radar * np.eye(l_ant)
    clutter_all = refl.sum(axis=2)  # [n, j, L, L]
    f = base[:, :, None] + (clutter_all[:, :, None] - refl)  # drop l == k
    if k_uav == 0:
        f = np.zeros_like(e)
    return EchoCovariances(e=hermitian(e, warn=False), f=hermitian(f, warn=False))


def optimal_filter(e: np.ndarray, f: np.ndarray) -> tuple[float, np.ndarray]:
    """Maximizing unit filter and the attained quotient for one cell."""
    return max_generalized_eig(e, f)


def optimal_filters(ef: EchoCovariances) -> tuple[FilterSet, np.ndarray]:
    """Batched :func:`optimal_filter`: filters ``[n, j, k, L]`` and optimal
    per-BS quotients ``[n, j, k]``.

    Raises
    ------
    SingularError
        Some interference covariance is not positive definite.
    """
    wf, vf = np.linalg.eigh(ef.f)
    tr = np.real(np.trace(ef.f, axis1=-2, axis2=-1))
    if np.any(wf[..., 0] <= 1e-12 * np.maximum(tr, 0.0)) or np.any(wf[..., 0] <= 0):
        raise SingularError("interference-plus-noise covariance not positive definite")
    s = (vf / np.sqrt(wf)[..., None, :]) @ np.conj(np.swapaxes(vf, -1, -2))
    c = hermitian(s @ ef.e @ s, warn=False)
    wc, vc = np.linalg.eigh(c)
    u = np.einsum("...pq,...q->...p", s, vc[..., :, -1])
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    return FilterSet(u=u), wc[..., -1]


@dataclass
class P6Verdict:
    """Sensing feasibility with per-BS optimal filters, ``[n, k]`` arrays.

    ``value`` is the sum over BSs of the optimal per-BS quotients.
    """

    value: np.ndarray
    threshold: float

    @property
    def margin(self) -> np.ndarray:
        return self.value - self.threshold

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.margin >= 0))


def check_p6(quotients: np.ndarray, gamma: float) -> P6Verdict:
    """Feasibility verdict from per-BS optimal quotients ``[n, j, k]``."""
    return P6Verdict(value=np.asarray(quotients).sum(axis=1), threshold=gamma)


@dataclass
class FilterUpdate:
    filters: FilterSet
    quotients: np.ndarray  # optimal per-BS quotients [n, j, k]
    kept: np.ndarray  # [n, k] cells where the old filters were kept
    before: np.ndarray  # aggregate sensing SINR with the old filters [n, k]
    after: np.ndarray  # aggregate sensing SINR with the returned filters [n, k]


def aggregate_sinr(beams: BeamformerSet, filters: FilterSet, links: LinkState,
                   statics: StaticChannels, scenario: Scenario) -> np.ndarray:
    sf = sensing_functionals(filters, links, statics, scenario)
    num, den = sensing_components(beams.tx_cov(), sf)
    return num.sum(axis=1) / den.sum(axis=1)


def update_filters(beams: BeamformerSet, links: LinkState, statics: StaticChannels,
                   scenario: Scenario, current: FilterSet, gamma: float | None = None,
                   safeguard: bool = True) -> FilterUpdate:
    """Per-BS optimal filters, kept only where they do not hurt.

    Per-BS optimal filters maximize each BS's own quotient, not the ratio of
    sums that the sensing constraint uses.  With ``safeguard`` the new
    filters of target k in slot n are accepted only if the aggregate SINR
    stays at least ``min(old, gamma)``, so a feasible beamformer stays
    feasible.
    """
    gamma = scenario.sensing_threshold if gamma is None else gamma
    ef = build_ef(beams, links, statics, scenario)
    new, quot = optimal_filters(ef)
    before = aggregate_sinr(beams, current, links, statics, scenario)
    after = aggregate_sinr(beams, new, links, statics, scenario)
    kept = np.zeros_like(before, dtype=bool)
    if safeguard:
        kept = after < np.minimum(before, gamma)
        u = np.where(kept[:, None, :, None], current.u, new.u)
        new = FilterSet(u=u)
        after = np.where(kept, before, after)
    return FilterUpdate(filters=new, quotients=quot, kept=kept, before=before, after=after)


__all__ = ["EchoCovariances", "FilterUpdate", "P6Verdict", "aggregate_sinr", "build_ef",
           "check_p6", "optimal_filter", "optimal_filters", "update_filters"]
