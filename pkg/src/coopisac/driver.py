"""Alternating optimization over beamformers, receive filters and
trajectories, plus the three benchmark strategies and parameter sweeps."""
from __future__ import annotations

import csv
import enum
import io
import json
import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import beamforming as bf
from . import filters as flt
from . import trajectory as tj
from .channel import gen_static_channels, link_state
from .errors import InfeasibleError
from .metrics import (BeamformerSet, FilterSet, MetricsReport, sensing_functionals,
                      sensing_sinr_all, weighted_sum_rate)
from .scenario import Scenario, db2lin

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    JOINT = "joint"
    FIXED_LINE_UNIFORM = "fixed-line-uniform"
    FIXED_LINE_SPEED_OPT = "fixed-line-speed-opt"
    EQUAL_POWER_TRAJ_OPT = "equal-power-traj-opt"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        key = text.strip().lower().replace("_", "-")
        aliases = {"fixedlineuniform": cls.FIXED_LINE_UNIFORM, "fixedlinespeedopt": cls.FIXED_LINE_SPEED_OPT,
                   "equalpowertrajopt": cls.EQUAL_POWER_TRAJ_OPT}
        for m in cls:
            if m.value == key:
                return m
        if key.replace("-", "") in aliases:
            return aliases[key.replace("-", "")]
        raise ValueError(f"unknown mode {text!r}; choose from {[m.value for m in cls]}")


ALL_MODES = tuple(Mode)


@dataclass
class RunConfig:
    mode: Mode = Mode.JOINT
    tol_ao: float = 1e-3
    max_ao_iters: int = 15
    tol_sca: float = 1e-4
    max_sca: int = 30
    eps0: float | None = None  # trust radius; None means V_max * dt
    eps_min: float = 1e-3
    tol_outer: float = 1e-4
    max_traj_outer: int = 50
    solver_tol: float = 1e-7
    seed: int | None = None  # overrides the scenario's seed

    def __post_init__(self):
        self.mode = Mode.parse(self.mode) if isinstance(self.mode, str) else Mode(self.mode)
        for name in ("tol_ao", "tol_sca", "eps_min", "tol_outer", "solver_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_ao_iters < 1 or self.max_sca < 1:
            raise ValueError("iteration limits must be >= 1")

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["mode"] = self.mode.value
        return d


@dataclass
class RunReport:
    mode: Mode
    objective: float
    trace: list  # one dict per AO iteration (iteration 0 is the starting point)
    beams: BeamformerSet
    filters: FilterSet
    trajectory: tj.TrajectorySet
    metrics: MetricsReport
    status: str
    wall_clock: float
    scenario_hash: str
    seed: int
    audit: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self, full: bool = True) -> dict:
        d = {
            "mode": self.mode.value,
            "status": self.status,
            "objective": self.objective,
            "wall_clock": self.wall_clock,
            "scenario_hash": self.scenario_hash,
            "seed": self.seed,
            "config": self.config,
            "audit": self.audit,
            "trace": self.trace,
            "trajectory": self.trajectory.q.tolist(),
            "altitudes": self.trajectory.altitudes.tolist(),
            "metrics": self.metrics.to_dict(),
        }
        if full:
            d["beams"] = {"cov_c_real": self.beams.cov_c.real.tolist(),
                          "cov_c_imag": self.beams.cov_c.imag.tolist(),
                          "cov_r_real": self.beams.cov_r.real.tolist(),
                          "cov_r_imag": self.beams.cov_r.imag.tolist()}
            d["filters"] = {"real": self.filters.u.real.tolist(), "imag": self.filters.u.imag.tolist()}
        return d

    def to_json(self, full: bool = True) -> str:
        return json.dumps(self.to_dict(full), indent=1)

    def trace_csv(self) -> str:
        """Rows ``iteration,objective,bf_objective,traj_status,traj_accepted``.

        Timings stay in the JSON report so that reruns give identical tables.
        """
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["iteration", "objective", "bf_objective", "traj_status", "traj_accepted"])
        for t in self.trace:
            wr.writerow([t["iteration"], repr(float(t["objective"])), repr(float(t.get("bf_objective", np.nan))),
                         t.get("traj_status", ""), t.get("traj_accepted", 0)])
        return buf.getvalue()

    def trajectories_csv(self) -> str:
        """Rows ``uav,slot,x,y,H`` (slots 1-based)."""
        return trajectories_csv(self.trajectory, self.scenario_hash, self.seed)


def trajectories_csv(traj: tj.TrajectorySet, scenario_hash: str, seed: int) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["uav", "slot", "x", "y", "H", "scenario_hash", "seed"])
    k_uav, n_slots = traj.q.shape[:2]
    for k in range(k_uav):
        for n in range(n_slots):
            wr.writerow([k, n + 1, repr(float(traj.q[k, n, 0])), repr(float(traj.q[k, n, 1])),
                         repr(float(traj.altitudes[k])), scenario_hash, seed])
    return buf.getvalue()


def _metrics(beams, filters, links, statics, scenario) -> MetricsReport:
    rep = weighted_sum_rate(beams, links, scenario)
    agg, per = sensing_sinr_all(beams, filters, links, statics, scenario)
    rep.sens_sinr, rep.sens_sinr_per_bs = agg, per
    return rep


def run(scenario: Scenario, cfg: RunConfig | None = None) -> RunReport:
    """Alternate beamforming, filter and trajectory updates per ``cfg.mode``.

    Each AO iteration runs the beamforming block (started from the previous
    beams), installs the max-SINR filters and, unless the mode pins the
    trajectory, runs the trust-region trajectory block.  Every block keeps
    its input when it cannot improve it, so the objective trace is
    non-decreasing up to solver accuracy.

    Raises
    ------
    InfeasibleError
        The sensing threshold cannot be met.
    """
    cfg = cfg or RunConfig()
    if cfg.seed is not None and cfg.seed != scenario.rng_seed:
        scenario = scenario.replace(rng_seed=int(cfg.seed))
    t0 = time.perf_counter()
    statics = gen_static_channels(scenario)
    gamma = scenario.sensing_threshold
    structure = "scaled_identity" if cfg.mode is Mode.EQUAL_POWER_TRAJ_OPT else "full"
    traj_kind = {Mode.JOINT: "free", Mode.EQUAL_POWER_TRAJ_OPT: "free",
                 Mode.FIXED_LINE_SPEED_OPT: "line", Mode.FIXED_LINE_UNIFORM: None}[cfg.mode]

    traj = tj.TrajectorySet.straight_line(scenario)
    links = link_state(scenario, traj.q)
    filters = FilterSet.matched(links)
    sf = sensing_functionals(filters, links, statics, scenario)
    beams = bf.initial_beams(scenario, links, sf, gamma, structure=structure)
    obj0 = weighted_sum_rate(beams, links, scenario).objective
    start_feasible = bool(bf.sensing_violation(beams, sf, gamma).max() <= 1e-7)
    trace = [{"iteration": 0, "objective": obj0, "feasible": start_feasible, "seconds": 0.0}]
    status = "max_iter"
    bf_warm = None
    for it in range(1, cfg.max_ao_iters + 1):
        ti = time.perf_counter()
        res = bf.solve_p3_sca(scenario, links, sf, start=beams, gamma=gamma, structure=structure,
                              tol_sca=cfg.tol_sca, max_outer=cfg.max_sca, solver_tol=cfg.solver_tol,
                              warm=bf_warm)
        beams, bf_warm = res.beams, res.warm
        bf_obj = res.objective
        t_bf = time.perf_counter() - ti
        upd = flt.update_filters(beams, links, statics, scenario, filters, gamma)
        filters = upd.filters
        entry = {"iteration": it, "bf_objective": bf_obj, "bf_status": sorted(set(res.status)),
                 "filters_kept": int(upd.kept.sum())}
        if traj_kind is not None:
            tr = tj.solve_p7_trust_region(scenario, beams, filters, statics, traj, gamma=gamma,
                                          eps0=cfg.eps0, eps_min=cfg.eps_min, tol_outer=cfg.tol_outer,
                                          max_outer=cfg.max_traj_outer, kind=traj_kind,
                                          solver_tol=cfg.solver_tol)
            traj = tr.trajectory
            log.info("AO %d: trajectory block %s, %d accepted steps, %d solves, %.1f s", it, tr.status,
                     tr.accepted, len(tr.trace), time.perf_counter() - ti - t_bf)
            links = link_state(scenario, traj.q)
            entry.update(traj_status=tr.status, traj_accepted=tr.accepted)
            # the trajectory moved: refresh filters for the new geometry (safeguarded)
            upd = flt.update_filters(beams, links, statics, scenario, filters, gamma)
            filters = upd.filters
        sf = sensing_functionals(filters, links, statics, scenario)
        obj = weighted_sum_rate(beams, links, scenario).objective
        entry.update(objective=obj, seconds=time.perf_counter() - ti)
        trace.append(entry)
        log.info("AO %d (%s): objective %.6f, beamforming %.1f s (%d SCA steps)", it, cfg.mode.value, obj,
                 t_bf, sum(len(t) for t in res.traces))
        prev = trace[-2]["objective"]
        if it > 1 or start_feasible:
            if abs(obj - prev) < cfg.tol_ao:
                status = "converged"
                break
    metrics = _metrics(beams, filters, links, statics, scenario)
    chk = tj.audit(traj.q, scenario, beams, filters, statics, gamma)
    audit = chk.to_dict()
    audit["power"] = float(beams.power().max() - scenario.max_power)
    return RunReport(mode=cfg.mode, objective=metrics.objective, trace=trace, beams=beams,
                     filters=filters, trajectory=traj, metrics=metrics, status=status,
                     wall_clock=time.perf_counter() - t0, scenario_hash=scenario.digest(),
                     seed=scenario.rng_seed, audit=audit, config=cfg.to_dict())


# -- sweeps ---------------------------------------------------------------------------

class Axis(str, enum.Enum):
    GAMMA = "gamma"
    ALTITUDE = "altitude"
    POWER = "power"
    NUM_BS = "num-bs"

    @classmethod
    def parse(cls, text: str) -> "Axis":
        key = text.strip().lower().replace("_", "-")
        if key in ("numbs", "num-bs", "m"):
            return cls.NUM_BS
        return cls(key)


def apply_axis(scenario: Scenario, axis: Axis, value: float) -> Scenario:
    """Scenario with one parameter changed.

    ``gamma`` is in dB, ``altitude`` in meters (all UAVs), ``power`` in W and
    ``num-bs`` keeps the first ``value`` BSs of the layout.
    """
    axis = Axis.parse(axis) if isinstance(axis, str) else axis
    if axis is Axis.GAMMA:
        return scenario.replace(sensing_threshold=float(db2lin(value)))
    if axis is Axis.POWER:
        return scenario.replace(max_power=float(value))
    if axis is Axis.ALTITUDE:
        raw = scenario.to_dict()
        for u in raw["uav_specs"]:
            u["altitude"] = float(value)
        return scenario.replace(uav_specs=raw["uav_specs"])
    m = int(value)
    if not 1 <= m <= scenario.num_bs:
        raise ValueError(f"num-bs {m} outside 1..{scenario.num_bs}")
    raw = scenario.to_dict()
    changes = {"bs_positions": raw["bs_positions"][:m], "si_coeff": raw["si_coeff"][:m],
               "inter_bs_coeff": [row[:m] for row in raw["inter_bs_coeff"][:m]]}
    return scenario.replace(**changes)


@dataclass
class SweepPoint:
    axis: Axis
    value: float
    mode: Mode
    objective: float
    status: str
    report: RunReport | None = None
    error: str = ""


def sweep(scenario: Scenario, cfg: RunConfig, axis, values, modes=None) -> list[SweepPoint]:
    """One run per (value, mode); infeasible points are recorded and skipped."""
    axis = Axis.parse(axis) if isinstance(axis, str) else axis
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    modes = [cfg.mode] if modes is None else [Mode.parse(m) if isinstance(m, str) else m for m in modes]
    out = []
    for v in values:
        scen = apply_axis(scenario, axis, v)
        for mode in modes:
            try:
                rep = run(scen, replace(cfg, mode=mode))
                out.append(SweepPoint(axis, float(v), mode, rep.objective, rep.status, rep))
            except InfeasibleError as exc:
                log.warning("sweep %s=%s (%s): infeasible: %s", axis.value, v, mode.value, exc)
                out.append(SweepPoint(axis, float(v), mode, float("nan"), "infeasible", None, str(exc)))
    return out


def sweep_csv(points: list[SweepPoint], scenario_hash: str, seed: int) -> str:
    """Rows ``value,mode,objective,status,scenario_hash,seed``."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["value", "mode", "objective", "status", "scenario_hash", "seed"])
    for p in points:
        wr.writerow([repr(p.value), p.mode.value, repr(float(p.objective)), p.status, scenario_hash, seed])
    return buf.getvalue()
