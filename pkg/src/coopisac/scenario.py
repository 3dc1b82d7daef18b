"""Experiment configuration: base stations, UAVs, time grid and link budget.

All power-like quantities are stored in linear scale.  Configuration files may
give any of them in dB through a ``<field>_db`` key; the conversion happens
once, in :func:`validate`.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import PairwiseError, RangeError, ReachabilityError, ScenarioError

H_MIN_DEFAULT = 50.0
H_MAX_DEFAULT = 200.0

# fields that accept a "<name>_db" alternative in config files
DB_FIELDS = (
    "ref_path_gain",
    "noise_power_comm",
    "noise_power_radar",
    "rcs_variance",
    "si_coeff",
    "inter_bs_coeff",
    "sensing_threshold",
    "max_power",
)


def db2lin(x):
    """``10 ** (x / 10)`` elementwise."""
    return np.power(10.0, np.asarray(x, dtype=float) / 10.0)


def lin2db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


class UavKind(str, enum.Enum):
    COMM_SENSING = "comm_sensing"
    SENSING_ONLY = "sensing_only"


class EchoModel(str, enum.Enum):
    ONE_WAY = "one_way"
    ROUND_TRIP = "round_trip"


@dataclass(frozen=True)
class UavSpec:
    kind: UavKind
    q_init: tuple[float, float]
    q_final: tuple[float, float]
    altitude: float

    @property
    def travel(self) -> float:
        return math.dist(self.q_init, self.q_final)


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable world description.

    Array-valued fields are read-only numpy arrays; ``si_coeff`` has one entry
    per BS and ``inter_bs_coeff[i, j]`` scales the leakage from BS ``i`` into
    the receiver of BS ``j`` (the diagonal is unused).
    """

    bs_positions: np.ndarray
    uav_specs: tuple[UavSpec, ...]
    num_slots: int
    horizon: float
    carrier_wavelength: float
    antenna_count: int
    antenna_spacing: float
    ref_path_gain: float
    noise_power_comm: float
    noise_power_radar: float
    rcs_variance: float
    si_coeff: np.ndarray
    inter_bs_coeff: np.ndarray
    max_power: float
    vmax: float
    dmin: float
    sensing_threshold: float
    weights: np.ndarray
    rng_seed: int = 0
    h_min: float = H_MIN_DEFAULT
    h_max: float = H_MAX_DEFAULT
    echo_model: EchoModel = EchoModel.ONE_WAY
    inter_bs_path_loss: bool = True
    slot_duration: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "slot_duration", self.horizon / self.num_slots)

    # -- sizes ---------------------------------------------------------------
    @property
    def num_bs(self) -> int:
        return self.bs_positions.shape[0]

    @property
    def num_uavs(self) -> int:
        return len(self.uav_specs)

    @property
    def comm_indices(self) -> np.ndarray:
        """Indices of communication-and-sensing UAVs, in UAV order."""
        return np.array(
            [k for k, u in enumerate(self.uav_specs) if u.kind is UavKind.COMM_SENSING],
            dtype=int,
        )

    @property
    def num_comm(self) -> int:
        return len(self.comm_indices)

    @property
    def altitudes(self) -> np.ndarray:
        return np.array([u.altitude for u in self.uav_specs])

    @property
    def q_init(self) -> np.ndarray:
        return np.array([u.q_init for u in self.uav_specs], dtype=float)

    @property
    def q_final(self) -> np.ndarray:
        return np.array([u.q_final for u in self.uav_specs], dtype=float)

    @property
    def step_budget(self) -> float:
        """Maximum horizontal displacement per slot, ``V_max * dt``."""
        return self.vmax * self.slot_duration

    def replace(self, **changes) -> "Scenario":
        """Validated copy with some fields changed."""
        raw = self.to_dict()
        raw.update(changes)
        return validate(raw)

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        return {
            "bs_positions": self.bs_positions.tolist(),
            "uav_specs": [
                {
                    "kind": u.kind.value,
                    "q_init": list(u.q_init),
                    "q_final": list(u.q_final),
                    "altitude": u.altitude,
                }
                for u in self.uav_specs
            ],
            "num_slots": self.num_slots,
            "horizon": self.horizon,
            "carrier_wavelength": self.carrier_wavelength,
            "antenna_count": self.antenna_count,
            "antenna_spacing": self.antenna_spacing,
            "ref_path_gain": self.ref_path_gain,
            "noise_power_comm": self.noise_power_comm,
            "noise_power_radar": self.noise_power_radar,
            "rcs_variance": self.rcs_variance,
            "si_coeff": self.si_coeff.tolist(),
            "inter_bs_coeff": self.inter_bs_coeff.tolist(),
            "max_power": self.max_power,
            "vmax": self.vmax,
            "dmin": self.dmin,
            "sensing_threshold": self.sensing_threshold,
            "weights": self.weights.tolist(),
            "rng_seed": self.rng_seed,
            "h_min": self.h_min,
            "h_max": self.h_max,
            "echo_model": self.echo_model.value,
            "inter_bs_path_loss": self.inter_bs_path_loss,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def digest(self) -> str:
        """Short content hash used to tag emitted tables."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None


def default_bs_layout(
    area: Sequence[Sequence[float]] = ((0.0, 600.0), (0.0, 600.0)), m: int = 4
) -> list[list[float]]:
    """Deterministic BS placement inside ``area = ((x0, x1), (y0, y1))``.

    One BS sits at the centroid.  Otherwise the quadrant centres come first,
    in x-major order, followed by the centroid and the midpoints of the
    quadrant-centre square's edges; ``m`` BSs take the first ``m`` entries.
    """
    if not 1 <= m <= 8:
        raise RangeError(f"default layout supports 1..8 BSs, got {m}")
    (x0, x1), (y0, y1) = area
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    if m == 1:
        return [[cx, cy]]
    xa, xb = x0 + (x1 - x0) / 4, x0 + 3 * (x1 - x0) / 4
    ya, yb = y0 + (y1 - y0) / 4, y0 + 3 * (y1 - y0) / 4
    order = [
        [xa, ya], [xa, yb], [xb, ya], [xb, yb],
        [cx, cy], [cx, ya], [cx, yb], [xa, cy],
    ]
    return order[:m]


def _take(raw: Mapping[str, Any], name: str, default=None, required=False):
    db_key = f"{name}_db"
    if name in raw and db_key in raw:
        raise ScenarioError(f"give either {name!r} or {db_key!r}, not both")
    if db_key in raw:
        return db2lin(raw[db_key])
    if name in raw:
        return raw[name]
    if required:
        raise ScenarioError(f"missing required field {name!r}")
    return default


def _positive(name, value):
    v = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise RangeError(f"{name} must be finite and > 0, got {value!r}")
    return v


def _nonneg(name, value):
    v = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise RangeError(f"{name} must be finite and >= 0, got {value!r}")
    return v


def _parse_uav(d: Mapping[str, Any]) -> UavSpec:
    try:
        kind = UavKind(d["kind"])
    except ValueError:
        raise ScenarioError(f"unknown UAV kind {d['kind']!r}") from None
    qi = tuple(float(x) for x in d["q_init"])
    qf = tuple(float(x) for x in d["q_final"])
    if len(qi) != 2 or len(qf) != 2:
        raise ScenarioError("q_init and q_final must be 2-D")
    return UavSpec(kind=kind, q_init=qi, q_final=qf, altitude=float(d["altitude"]))


def validate(raw: Mapping[str, Any]) -> Scenario:
    """Build a :class:`Scenario` from a parsed configuration mapping.

    Raises
    ------
    RangeError
        A scalar is out of range (non-positive power, too few slots, ...).
    ReachabilityError
        Some UAV cannot reach its final position at ``vmax``.
    PairwiseError
        Two UAVs start (or end) closer than ``dmin``.
    """
    raw = dict(raw)
    uavs = tuple(_parse_uav(d) for d in raw.get("uav_specs", ()))
    if not uavs:
        raise ScenarioError("at least one UAV is required")

    bs = raw.get("bs_positions")
    if bs is None or isinstance(bs, str):
        area = raw.get("area", ((0.0, 600.0), (0.0, 600.0)))
        bs = default_bs_layout(area, int(raw.get("num_bs", 4)))
    bs = np.array(bs, dtype=float)
    if bs.ndim != 2 or bs.shape[1] != 2 or bs.shape[0] < 1:
        raise ScenarioError("bs_positions must be a non-empty list of 2-D points")
    m = bs.shape[0]

    n_slots = int(_take(raw, "num_slots", required=True))
    if n_slots < 2:
        raise RangeError(f"num_slots must be >= 2, got {n_slots}")
    horizon = float(_positive("horizon", _take(raw, "horizon", required=True)))
    if abs(horizon / n_slots * n_slots - horizon) > 1e-12 * horizon:
        raise RangeError("horizon / num_slots does not tile the horizon exactly")

    wavelength = float(_positive("carrier_wavelength", _take(raw, "carrier_wavelength", 0.1)))
    n_ant = int(_take(raw, "antenna_count", required=True))
    if n_ant < 1:
        raise RangeError(f"antenna_count must be >= 1, got {n_ant}")
    spacing = float(_positive("antenna_spacing", _take(raw, "antenna_spacing", wavelength / 2)))

    kappa = float(_positive("ref_path_gain", _take(raw, "ref_path_gain", required=True)))
    sigma2 = float(_positive("noise_power_comm", _take(raw, "noise_power_comm", required=True)))
    sigma2_r = float(_positive("noise_power_radar", _take(raw, "noise_power_radar", sigma2)))
    rcs = float(_positive("rcs_variance", _take(raw, "rcs_variance", 1.0)))

    si = np.broadcast_to(
        np.asarray(_take(raw, "si_coeff", required=True), dtype=float), (m,)
    ).copy()
    _nonneg("si_coeff", si)
    alpha = np.asarray(_take(raw, "inter_bs_coeff", required=True), dtype=float)
    alpha = np.broadcast_to(alpha, (m, m)).copy()
    off = ~np.eye(m, dtype=bool)
    _nonneg("inter_bs_coeff", alpha[off] if m > 1 else 1.0)

    p_max = float(_take(raw, "max_power", required=True))
    if not (np.isfinite(p_max) and p_max >= 0):
        raise RangeError(f"max_power must be >= 0, got {p_max}")
    vmax = float(_positive("vmax", _take(raw, "vmax", required=True)))
    dmin = float(_take(raw, "dmin", 0.0))
    if not (np.isfinite(dmin) and dmin >= 0):
        raise RangeError(f"dmin must be >= 0, got {dmin}")
    gamma = float(_take(raw, "sensing_threshold", required=True))
    if not (np.isfinite(gamma) and gamma >= 0):
        raise RangeError(f"sensing_threshold must be >= 0, got {gamma}")

    weights = np.asarray(_take(raw, "weights", np.ones(len(uavs))), dtype=float)
    weights = np.broadcast_to(weights, (len(uavs),)).copy()
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise RangeError("weights must be finite and >= 0")

    h_min = float(raw.get("h_min", H_MIN_DEFAULT))
    h_max = float(raw.get("h_max", H_MAX_DEFAULT))
    if not 0 < h_min <= h_max:
        raise RangeError(f"need 0 < h_min <= h_max, got {h_min}, {h_max}")
    for k, u in enumerate(uavs):
        if not h_min <= u.altitude <= h_max:
            raise RangeError(
                f"UAV {k} altitude {u.altitude} outside [{h_min}, {h_max}]"
            )

    dt = horizon / n_slots
    budget = vmax * dt * (n_slots - 1)
    for k, u in enumerate(uavs):
        if u.travel > budget * (1 + 1e-12):
            raise ReachabilityError(
                f"UAV {k} must travel {u.travel:.6g} m but can cover at most "
                f"{budget:.6g} m (vmax={vmax}, dt={dt}, N={n_slots})"
            )
    for label, attr in (("initial", "q_init"), ("final", "q_final")):
        for a in range(len(uavs)):
            for b in range(a + 1, len(uavs)):
                ua, ub = uavs[a], uavs[b]
                d2 = math.dist(getattr(ua, attr), getattr(ub, attr)) ** 2
                d2 += (ua.altitude - ub.altitude) ** 2
                if d2 < dmin**2 * (1 - 1e-12):
                    raise PairwiseError(
                        f"UAVs {a} and {b} {label} separation {math.sqrt(d2):.6g} m "
                        f"< dmin={dmin}"
                    )

    try:
        echo = EchoModel(raw.get("echo_model", EchoModel.ONE_WAY.value))
    except ValueError:
        raise ScenarioError(f"unknown echo_model {raw.get('echo_model')!r}") from None

    return Scenario(
        bs_positions=_frozen(bs),
        uav_specs=uavs,
        num_slots=n_slots,
        horizon=horizon,
        carrier_wavelength=wavelength,
        antenna_count=n_ant,
        antenna_spacing=spacing,
        ref_path_gain=kappa,
        noise_power_comm=sigma2,
        noise_power_radar=sigma2_r,
        rcs_variance=rcs,
        si_coeff=_frozen(si),
        inter_bs_coeff=_frozen(alpha),
        max_power=p_max,
        vmax=vmax,
        dmin=dmin,
        sensing_threshold=gamma,
        weights=_frozen(weights),
        rng_seed=int(raw.get("rng_seed", 0)),
        h_min=h_min,
        h_max=h_max,
        echo_model=echo,
        inter_bs_path_loss=bool(raw.get("inter_bs_path_loss", True)),
    )


def load(path: str | Path) -> Scenario:
    with open(path) as fh:
        return validate(json.load(fh))


def save(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(scenario.to_json())


# -- reference configurations -------------------------------------------------

PAPER_UAVS = (
    ("comm_sensing", (50.0, 150.0), (550.0, 150.0)),
    ("comm_sensing", (50.0, 450.0), (550.0, 450.0)),
    ("sensing_only", (50.0, 250.0), (550.0, 250.0)),
    ("sensing_only", (50.0, 350.0), (550.0, 350.0)),
)


def paper_config(
    num_slots: int = 30,
    horizon: float | None = None,
    altitude: float = 100.0,
    num_bs: int = 4,
    gamma_db: float = -12.0,
    max_power: float = 10.0,
    **overrides,
) -> dict[str, Any]:
    """Raw config for the four-UAV, four-BS setup with the reference link budget.

    BS positions, horizon, wavelength, ``dmin`` and the radar noise power are
    not part of the reference parameter list; the defaults chosen here are a
    corners-first BS grid over [0, 600]^2, 2 s slots, 0.1 m carrier, 20 m
    separation and radar noise equal to the UAV noise.
    """
    if horizon is None:
        horizon = 2.0 * num_slots if num_slots >= 30 else 4.0 * num_slots
    raw = {
        "bs_positions": default_bs_layout(((0.0, 600.0), (0.0, 600.0)), 4)[:num_bs],
        "uav_specs": [
            {"kind": kind, "q_init": list(qi), "q_final": list(qf), "altitude": altitude}
            for kind, qi, qf in PAPER_UAVS
        ],
        "num_slots": num_slots,
        "horizon": horizon,
        "carrier_wavelength": 0.1,
        "antenna_count": 8,
        "antenna_spacing": 0.05,
        "ref_path_gain_db": -45.0,
        "noise_power_comm_db": -100.0,
        "noise_power_radar_db": -100.0,
        "rcs_variance": 1.0,
        "si_coeff_db": -110.0,
        "inter_bs_coeff_db": -30.0,
        "max_power": max_power,
        "vmax": 20.0,
        "dmin": 20.0,
        "sensing_threshold_db": gamma_db,
        "weights": [1.0, 1.0, 1.0, 1.0],
        "rng_seed": 0,
    }
    raw.update(overrides)
    return raw


def paper_scenario(**kwargs) -> Scenario:
    return validate(paper_config(**kwargs))


def desk_config(**overrides) -> dict[str, Any]:
    """Two BSs, four antennas, one comm+sensing and one sensing-only UAV, N=8."""
    raw = {
        "bs_positions": [[150.0, 200.0], [450.0, 400.0]],
        "uav_specs": [
            {"kind": "comm_sensing", "q_init": [50.0, 150.0], "q_final": [550.0, 150.0],
             "altitude": 100.0},
            {"kind": "sensing_only", "q_init": [50.0, 450.0], "q_final": [550.0, 450.0],
             "altitude": 100.0},
        ],
        "num_slots": 8,
        "horizon": 40.0,
        "carrier_wavelength": 0.1,
        "antenna_count": 4,
        "antenna_spacing": 0.05,
        "ref_path_gain_db": -45.0,
        "noise_power_comm_db": -100.0,
        "noise_power_radar_db": -100.0,
        "rcs_variance": 1.0,
        "si_coeff_db": -110.0,
        "inter_bs_coeff_db": -30.0,
        "max_power": 10.0,
        "vmax": 20.0,
        "dmin": 20.0,
        "sensing_threshold_db": -12.0,
        "weights": [1.0, 1.0],
        "rng_seed": 0,
    }
    raw.update(overrides)
    return raw


def desk_scenario(**overrides) -> Scenario:
    return validate(desk_config(**overrides))
