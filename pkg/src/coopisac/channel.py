"""Line-of-sight geometry: angles of departure, ULA steering vectors, path
gains, channel vectors, target response matrices and the static
self-interference / inter-BS channels.

Scalar helpers take a single BS/UAV pair; :func:`link_state` evaluates every
(slot, BS, UAV) triple of a trajectory at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import EchoModel, Scenario

ROLE_SELF_INTERFERENCE = 1
ROLE_INTER_BS = 2


@dataclass(frozen=True)
class ChannelVector:
    h: np.ndarray
    beta: float


@dataclass(frozen=True)
class ResponseMatrix:
    a: np.ndarray
    rho: float

    @property
    def matrix(self) -> np.ndarray:
        return np.sqrt(self.rho) * np.outer(self.a, self.a.conj())


@dataclass(frozen=True)
class StaticChannels:
    """Slot-independent hardware channels.

    ``h_si[j]`` is the self-interference matrix of BS j and ``g[i, j]`` the
    direct channel from BS i to BS j (``g[j, j]`` is zero).  ``g_gain[i, j]``
    is the large-scale power gain applied on top of ``inter_bs_coeff``.
    """

    h_si: np.ndarray
    g: np.ndarray
    g_gain: np.ndarray


def _sq_dist(q, v, h_alt):
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.sum((q - v) ** 2, axis=-1) + np.asarray(h_alt, dtype=float) ** 2


def aod(q, v, h_alt):
    """Angle of departure ``arccos(H / sqrt(|q - v|^2 + H^2))`` in radians."""
    return np.arccos(np.asarray(h_alt, dtype=float) / np.sqrt(_sq_dist(q, v, h_alt)))


def steering_from_cos(cos_theta, l: int, d_over_lambda: float) -> np.ndarray:
    """ULA response ``exp(j 2 pi (d/lambda) l cos(theta))``, l = 0..L-1, on a
    trailing axis."""
    phase = 2.0 * np.pi * d_over_lambda * np.asarray(cos_theta, dtype=float)[..., None]
    return np.exp(1j * phase * np.arange(l))


def steering(theta, l: int, d: float, lam: float) -> np.ndarray:
    return steering_from_cos(np.cos(theta), l, d / lam)


def path_loss(q, v, h_alt, kappa):
    """Free-space power gain ``kappa / (|q - v|^2 + H^2)``."""
    return kappa / _sq_dist(q, v, h_alt)


def echo_gain(sq_dist, scenario: Scenario):
    """Gain ``rho`` of the echo path for squared slant range(s) ``sq_dist``."""
    kappa = scenario.ref_path_gain
    if scenario.echo_model is EchoModel.ROUND_TRIP:
        return kappa**2 / np.asarray(sq_dist, dtype=float) ** 2
    return kappa / np.asarray(sq_dist, dtype=float)


def channel_vector(q, v, h_alt, scenario: Scenario) -> ChannelVector:
    beta = float(path_loss(q, v, h_alt, scenario.ref_path_gain))
    a = steering(aod(q, v, h_alt), scenario.antenna_count,
                 scenario.antenna_spacing, scenario.carrier_wavelength)
    return ChannelVector(h=np.sqrt(beta) * a, beta=beta)


def response_matrix(q, v, h_alt, scenario: Scenario) -> ResponseMatrix:
    rho = float(echo_gain(_sq_dist(q, v, h_alt), scenario))
    a = steering(aod(q, v, h_alt), scenario.antenna_count,
                 scenario.antenna_spacing, scenario.carrier_wavelength)
    return ResponseMatrix(a=a, rho=rho)


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def gen_static_channels(scenario: Scenario) -> StaticChannels:
    """Draw ``H_SI`` and ``G`` as i.i.d. CN(0, 1) matrices.

    Every matrix has its own stream keyed on ``(rng_seed, role, i, j)``, so
    the draw does not depend on evaluation order or on the number of BSs.
    """
    m, l = scenario.num_bs, scenario.antenna_count
    seed = scenario.rng_seed
    h_si = np.stack([
        _cn(np.random.default_rng([seed, ROLE_SELF_INTERFERENCE, j, j]), (l, l))
        for j in range(m)
    ])
    g = np.zeros((m, m, l, l), dtype=complex)
    g_gain = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            g[i, j] = _cn(np.random.default_rng([seed, ROLE_INTER_BS, i, j]), (l, l))
            if scenario.inter_bs_path_loss:
                d2 = float(np.sum((scenario.bs_positions[i] - scenario.bs_positions[j]) ** 2))
                g_gain[i, j] = scenario.ref_path_gain / d2
            else:
                g_gain[i, j] = 1.0
    return StaticChannels(h_si=h_si, g=g, g_gain=g_gain)


@dataclass(frozen=True)
class LinkState:
    """Every BS-UAV link over the horizon, arrays indexed ``[n, m, k]``.

    ``a`` carries the steering vectors on a trailing antenna axis, ``h`` the
    channel vectors ``sqrt(beta) a``.
    """

    cos_theta: np.ndarray
    sq_dist: np.ndarray
    beta: np.ndarray
    rho: np.ndarray
    a: np.ndarray
    h: np.ndarray


def link_state(scenario: Scenario, q: np.ndarray) -> LinkState:
    """Links for a trajectory ``q`` of shape ``(K, N, 2)`` (or ``(K, 2)`` for a
    single slot, returned with N = 1)."""
    q = np.asarray(q, dtype=float)
    if q.ndim == 2:
        q = q[:, None, :]
    # (N, M, K, 2)
    diff = q.transpose(1, 0, 2)[:, None, :, :] - scenario.bs_positions[None, :, None, :]
    alt = scenario.altitudes[None, None, :]
    sq = np.sum(diff**2, axis=-1) + alt**2
    cos_t = alt / np.sqrt(sq)
    beta = scenario.ref_path_gain / sq
    rho = echo_gain(sq, scenario)
    a = steering_from_cos(cos_t, scenario.antenna_count,
                          scenario.antenna_spacing / scenario.carrier_wavelength)
    return LinkState(cos_theta=cos_t, sq_dist=sq, beta=beta, rho=rho, a=a,
                     h=np.sqrt(beta)[..., None] * a)
