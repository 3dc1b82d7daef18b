"""Acceptance criteria, one test each, at their stated tolerances and time
budgets.  Every test prints a single PASS/FAIL line with its key numbers."""
import json
import time

import numpy as np
import pytest

from coopisac import beamforming as bf
from coopisac import cli, oracles
from coopisac import trajectory as tj
from coopisac.driver import ALL_MODES, Mode, RunConfig, apply_axis, run
from coopisac.scenario import desk_scenario, paper_scenario

# criterion 9: AO iterations per run, chosen so six runs fit the hour
TREND_AO_ITERS = 5


@pytest.fixture
def verdict(capsys):
    """``verdict(n, ok, detail)`` prints one line past pytest's capture."""
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def desk_runs():
    """All four modes on the desk scenario, with the wall time they took."""
    s = desk_scenario()
    t0 = time.perf_counter()
    reports = {m: run(s, RunConfig(mode=m)) for m in ALL_MODES}
    return reports, time.perf_counter() - t0


def test_c01_formula_equivalence(verdict):
    t0 = time.perf_counter()
    comm = oracles.comm_formula_gap(states=100)
    sens = oracles.sensing_monte_carlo(states=100, draws=100_000)
    secs = time.perf_counter() - t0
    ok = comm["max_rel_err"] <= 1e-8 and sens["max_rel_err"] <= 0.02 and secs < 60
    assert verdict(1, ok, f"comm rel err {comm['max_rel_err']:.2e} (<=1e-8), sensing MC rel err "
                          f"{sens['max_rel_err']:.2e} (<=2e-2), {secs:.1f} s (<60)")


def test_c02_linear_algebra(verdict):
    t0 = time.perf_counter()
    r = oracles.linalg_suite(matrices=500, max_dim=16)
    secs = time.perf_counter() - t0
    eig = max(r["max_eig_residual_lapack"], r["max_eig_residual_jacobi"])
    ok = eig <= 1e-9 and r["max_congruence_err"] <= 1e-8 and secs < 60
    assert verdict(2, ok, f"eigen residual {eig:.2e}*|M| (<=1e-9), inv_sqrt congruence "
                          f"{r['max_congruence_err']:.2e} (<=1e-8), {secs:.1f} s (<60)")


def test_c03_conic_solver(verdict):
    t0 = time.perf_counter()
    canon = oracles.conic_canonical()
    proj = oracles.projection_checks(count=1000)
    secs = time.perf_counter() - t0
    status_ok = all(r["status"] == r["expected"] for r in canon.values())
    err = max(max(r.get("x_err", 0.0), r.get("objective_err", 0.0)) for r in canon.values())
    ok = (status_ok and err <= 1e-6 and proj["max_idempotence_err"] <= 1e-9
          and proj["max_expansion"] <= 1e-9 and secs < 120)
    assert verdict(3, ok, f"statuses {'ok' if status_ok else 'WRONG'}, optimum err {err:.2e} (<=1e-6), "
                          f"projection idempotence {proj['max_idempotence_err']:.2e}, expansion "
                          f"{proj['max_expansion']:.2e}, {secs:.1f} s (<120)")


def test_c04_sdr_tightness(verdict):
    t0 = time.perf_counter()
    r = oracles.sdr_recovery(instances=20)
    secs = time.perf_counter() - t0
    ok = (r["max_rel_x_err"] <= 1e-8 and r["max_rel_obj_err"] <= 1e-6
          and r["max_sensing_violation"] <= 1e-7 and secs < 300)
    assert verdict(4, ok, f"X err {r['max_rel_x_err']:.2e} (<=1e-8), objective err {r['max_rel_obj_err']:.2e} "
                          f"(<=1e-6), sensing violation {r['max_sensing_violation']:.2e} (<=1e-7), "
                          f"{secs:.1f} s (<300)")


def test_c05_surrogate_validity(verdict):
    t0 = time.perf_counter()
    sur = oracles.surrogate_bound(expansions=10, points=100)
    rate = oracles.rate_gradient_fd(states=50)
    trace = oracles.trace_gradient_fd(states=50)
    secs = time.perf_counter() - t0
    grad = max(rate["max_rel_err"], trace["max_rel_err"])
    ok = sur["max_excess"] <= 1e-8 and sur["max_expansion_err"] <= 1e-9 and grad <= 1e-4 and secs < 180
    assert verdict(5, ok, f"surrogate excess {sur['max_excess']:.2e} (<=1e-8), exactness "
                          f"{sur['max_expansion_err']:.2e} (<=1e-9), gradient rel err {grad:.2e} (<=1e-4), "
                          f"{secs:.1f} s (<180)")


def test_c06_filter_optimality(verdict):
    t0 = time.perf_counter()
    r = oracles.filter_random_search(cells=50, samples=10_000)
    secs = time.perf_counter() - t0
    ok = r["min_rel_margin"] >= 0 and r["max_rel_eig_err"] <= 1e-9 and secs < 60
    assert verdict(6, ok, f"{r['cells']} cells, min margin over random filters {r['min_rel_margin']:.2e} (>=0), "
                          f"lambda_max err {r['max_rel_eig_err']:.2e} (<=1e-9), {secs:.1f} s (<60)")


def test_c07_trust_region(verdict):
    t0 = time.perf_counter()
    s = desk_scenario()
    from coopisac.channel import gen_static_channels, link_state
    from coopisac.filters import update_filters
    from coopisac.metrics import FilterSet, sensing_functionals

    statics = gen_static_channels(s)
    start = tj.TrajectorySet.straight_line(s)
    links = link_state(s, start.q)
    filters = FilterSet.matched(links)
    beams = bf.solve_p3_sca(s, links, sensing_functionals(filters, links, statics, s)).beams
    filters = update_filters(beams, links, statics, s, filters, s.sensing_threshold).filters
    worst = {"monotone": True, "speed": -np.inf, "collision": -np.inf, "endpoints": 0.0, "power": -np.inf,
             "sensing": 0.0}
    steps = 0
    for kind in ("free", "line"):
        res = tj.solve_p7_trust_region(s, beams, filters, statics, start, kind=kind)
        objs = [tj.objective_of_q(start.q, beams, s)] + [e["exact"] for e in res.trace if e["accepted"]]
        worst["monotone"] &= all(b > a for a, b in zip(objs, objs[1:]))
        steps += len(objs) - 1
        a = tj.audit(res.trajectory.q, s, beams, filters, statics)
        for key in ("speed", "collision", "endpoints", "sensing"):
            worst[key] = max(worst[key], getattr(a, key))
    worst["power"] = float(beams.power().max() - s.max_power)
    secs = time.perf_counter() - t0
    ok = (worst["monotone"] and steps > 0 and worst["speed"] <= 0 and worst["collision"] <= 1e-6
          and worst["endpoints"] == 0.0 and worst["power"] <= 1e-9 and worst["sensing"] <= 1e-7
          and secs < 300)
    assert verdict(7, ok, f"{steps} accepted steps monotone={worst['monotone']}, speed excess "
                          f"{worst['speed']:.2e} m, collision {worst['collision']:.2e} m, endpoints "
                          f"{worst['endpoints']:.1e}, power excess {worst['power']:.2e} W, sensing "
                          f"{worst['sensing']:.1e}, {secs:.1f} s (<300)")


def test_c08_ao_dominance(verdict, desk_runs):
    reports, secs = desk_runs
    joint = reports[Mode.JOINT]
    obj = [t["objective"] for t in joint.trace[1:]]
    drops = [(a - b) / abs(a) for a, b in zip(obj, obj[1:])]
    mono = max(drops, default=0.0) <= 1e-5
    gaps = {m.value: joint.objective - r.objective for m, r in reports.items() if m is not Mode.JOINT}
    ok = mono and min(gaps.values()) >= -1e-4 and secs < 1200
    detail = ", ".join(f"{k} {reports[Mode(k)].objective:.4f}" for k in gaps)
    assert verdict(8, ok, f"joint {joint.objective:.4f} vs {detail}; worst relative drop "
                          f"{max(drops, default=0.0):.1e} (<=1e-5), {secs:.1f} s (<1200)")


def test_c09_trends(verdict):
    base = paper_scenario(num_slots=10)
    cfg = RunConfig(mode="joint", max_ao_iters=TREND_AO_ITERS)
    t0 = time.perf_counter()
    cache = {}

    def obj(axis=None, value=None):
        key = (axis, value)
        if key not in cache:
            s = base if axis is None else apply_axis(base, axis, value)
            cache[key] = run(s, cfg).objective
        return cache[key]

    ref = obj()  # gamma -12 dB, H 100 m, P 10 W, M 4
    checks = {
        "gamma -7 <= -12": obj("gamma", -7.0) <= ref,
        "H 120 <= 100": obj("altitude", 120.0) <= ref,
        "P 6 <= 10 <= 15": obj("power", 6.0) <= ref <= obj("power", 15.0),
        "M 4 >= 3": ref >= obj("num-bs", 3),
    }
    secs = time.perf_counter() - t0
    ok = all(checks.values()) and secs < 3600
    vals = ", ".join(f"{k[0] or 'base'}{'' if k[1] is None else '=' + format(k[1], 'g')}: {v:.3f}"
                     for k, v in cache.items())
    assert verdict(9, ok, f"{checks}; {vals}; {secs:.0f} s (<3600)")


def test_c10_paper_smoke(verdict, tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "paper"
    code = cli.main(["run", "--scenario", "paper", "--mode", "joint", "--out", str(out),
                     "--max-ao-iters", "1"])
    secs = time.perf_counter() - t0
    names = ("report.json", "metrics.csv", "trace.csv", "trajectories.csv", "bs.csv", "run.log")
    missing = [n for n in names if not (out / n).is_file()]
    iters = len(json.loads((out / "report.json").read_text())["trace"]) - 1 if not missing else 0
    ok = code == 0 and not missing and iters == 1 and secs < 1800
    assert verdict(10, ok, f"exit {code}, {iters} AO iteration, missing files {missing or 'none'}, "
                           f"{secs:.0f} s (<1800)")
