"""Command-line entry point: ``coopisac {run,sweep,validate,oracle,scenario}``.

Exit codes: 0 success, 1 infeasible problem or unreachable endpoints,
2 configuration or usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import scenario as scn
from .driver import ALL_MODES, Axis, Mode, RunConfig, run, sweep, sweep_csv
from .errors import InfeasibleError, ReachabilityError, ScenarioError

log = logging.getLogger("coopisac")

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG = 0, 1, 2
PRESETS = {"desk": scn.desk_scenario, "paper": scn.paper_scenario}


class UsageError(Exception):
    pass


def load_scenario(spec: str, seed: int | None = None) -> scn.Scenario:
    """Scenario from a JSON file or a preset name (``desk``, ``paper``,
    ``paper:N`` for a shorter horizon).

    The seed is taken from ``seed`` if given, else from ``ISAC_SEED``, else
    from the file.
    """
    if spec in PRESETS:
        s = PRESETS[spec]()
    elif spec.startswith("paper:"):
        s = scn.paper_scenario(num_slots=int(spec.split(":", 1)[1]))
    else:
        path = Path(spec)
        if not path.is_file():
            raise UsageError(f"scenario file not found: {spec}")
        try:
            s = scn.load(path)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{spec}: not valid JSON ({exc})") from exc
    env = os.environ.get("ISAC_SEED")
    if seed is None and env is not None:
        try:
            seed = int(env)
        except ValueError as exc:
            raise UsageError(f"ISAC_SEED must be an integer, got {env!r}") from exc
    if seed is not None and seed != s.rng_seed:
        s = s.replace(rng_seed=seed)
    return s


def tag_rows(text: str, scenario_hash: str, seed: int) -> str:
    """Append ``scenario_hash`` and ``seed`` columns to a CSV table."""
    rows = list(csv.reader(io.StringIO(text)))
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    if rows:
        wr.writerow(rows[0] + ["scenario_hash", "seed"])
        for r in rows[1:]:
            wr.writerow(r + [scenario_hash, seed])
    return buf.getvalue()


def bs_csv(scenario: scn.Scenario) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["bs", "x", "y", "scenario_hash", "seed"])
    h = scenario.digest()
    for j, (x, y) in enumerate(scenario.bs_positions):
        wr.writerow([j, repr(float(x)), repr(float(y)), h, scenario.rng_seed])
    return buf.getvalue()


def _config(args) -> RunConfig:
    kw = {}
    for name in ("tol_ao", "max_ao_iters", "tol_sca", "max_sca", "eps0", "eps_min", "tol_outer",
                 "max_traj_outer", "solver_tol"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    try:
        return RunConfig(mode=getattr(args, "mode", "joint"), **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _add_tolerances(p: argparse.ArgumentParser):
    g = p.add_argument_group("tolerances")
    g.add_argument("--tol-ao", dest="tol_ao", type=float, help="AO stop: objective change in bits")
    g.add_argument("--max-ao-iters", dest="max_ao_iters", type=int)
    g.add_argument("--tol-sca", dest="tol_sca", type=float, help="beamforming SCA stop")
    g.add_argument("--max-sca", dest="max_sca", type=int)
    g.add_argument("--eps0", type=float, help="initial trust radius in m (default V_max*dt)")
    g.add_argument("--eps-min", dest="eps_min", type=float)
    g.add_argument("--tol-outer", dest="tol_outer", type=float, help="trajectory SCA stop")
    g.add_argument("--max-traj-outer", dest="max_traj_outer", type=int)
    g.add_argument("--solver-tol", dest="solver_tol", type=float)


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _log_to(out: Path):
    fh = logging.FileHandler(out / "run.log", mode="a")
    fh.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    logging.getLogger("coopisac").addHandler(fh)
    return fh


def cmd_run(args) -> int:
    s = load_scenario(args.scenario, args.seed)
    cfg = _config(args)
    out = _out_dir(args.out)
    fh = _log_to(out)
    try:
        rep = run(s, cfg)
    finally:
        logging.getLogger("coopisac").removeHandler(fh)
        fh.close()
    h, seed = rep.scenario_hash, rep.seed
    (out / "report.json").write_text(rep.to_json(full=not args.summary))
    (out / "metrics.csv").write_text(tag_rows(rep.metrics.to_csv(_comm_mask(s)), h, seed))
    (out / "trace.csv").write_text(tag_rows(rep.trace_csv(), h, seed))
    (out / "trajectories.csv").write_text(rep.trajectories_csv())
    (out / "bs.csv").write_text(bs_csv(s))
    print(f"{rep.mode.value}: objective {rep.objective:.6f} bits/s/Hz, status {rep.status}, "
          f"{len(rep.trace) - 1} AO iterations, {rep.wall_clock:.1f} s -> {out}")
    return EXIT_OK


def _comm_mask(s: scn.Scenario):
    mask = [False] * s.num_uavs
    for k in s.comm_indices:
        mask[int(k)] = True
    return mask


def _values(raw: list[str]) -> list[float]:
    vals = []
    for item in raw:
        for part in item.split(","):
            if part.strip():
                try:
                    vals.append(float(part))
                except ValueError as exc:
                    raise UsageError(f"bad sweep value {part!r}") from exc
    if not vals:
        raise UsageError("--values needs at least one number")
    return vals


def cmd_sweep(args) -> int:
    s = load_scenario(args.scenario, args.seed)
    cfg = _config(args)
    try:
        axis = Axis.parse(args.axis)
        modes = [Mode.parse(m) for m in args.modes.split(",")] if args.modes else [cfg.mode]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    values = _values(args.values)
    out = _out_dir(args.out)
    fh = _log_to(out)
    try:
        points = sweep(s, cfg, axis, values, modes)
    finally:
        logging.getLogger("coopisac").removeHandler(fh)
        fh.close()
    name = axis.value.replace("-", "_")
    (out / f"sweep_{name}.csv").write_text(sweep_csv(points, s.digest(), s.rng_seed))
    for p in points:
        print(f"{axis.value}={p.value:g} {p.mode.value}: {p.objective:.6f} ({p.status})")
    return EXIT_OK


def cmd_validate(args) -> int:
    s = load_scenario(args.scenario, args.seed)
    print(f"ok: M={s.num_bs} L={s.antenna_count} K={s.num_uavs} (comm {s.num_comm}) "
          f"N={s.num_slots} hash={s.digest()} seed={s.rng_seed}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracles import ORACLES

    if args.name == "list":
        print("\n".join(sorted(ORACLES)))
        return EXIT_OK
    if args.name not in ORACLES:
        raise UsageError(f"unknown oracle {args.name!r}; choose from {sorted(ORACLES)} or 'list'")
    print(json.dumps(ORACLES[args.name](), indent=1))
    return EXIT_OK


def cmd_scenario(args) -> int:
    s = load_scenario(args.preset, args.seed)
    if args.out == "-":
        print(s.to_json())
    else:
        scn.save(s, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coopisac", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="one optimization run")
    r.add_argument("--scenario", required=True, help="JSON file or preset: desk, paper, paper:N")
    r.add_argument("--mode", default="joint", help=", ".join(m.value for m in ALL_MODES))
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--summary", action="store_true", help="omit beam and filter arrays from report.json")
    _add_tolerances(r)
    r.set_defaults(func=cmd_run)

    w = sub.add_parser("sweep", help="one run per value of a scenario parameter")
    w.add_argument("--scenario", required=True)
    w.add_argument("--axis", required=True, help="gamma (dB), altitude (m), power (W) or num-bs")
    w.add_argument("--values", required=True, nargs="+", help="comma or space separated, e.g. --values=-12,-7")
    w.add_argument("--mode", default="joint")
    w.add_argument("--modes", help="comma-separated list; overrides --mode")
    w.add_argument("--out", required=True)
    w.add_argument("--seed", type=int)
    _add_tolerances(w)
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("--scenario", required=True)
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("oracle", help="run a reference computation ('list' to enumerate)")
    o.add_argument("name")
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("scenario", help="write a preset scenario as JSON")
    c.add_argument("--preset", default="paper", help="desk, paper or paper:N")
    c.add_argument("--out", default="-")
    c.add_argument("--seed", type=int)
    c.set_defaults(func=cmd_scenario)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    err = logging.StreamHandler(sys.stderr)
    err.setLevel(level)
    err.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    pkg = logging.getLogger("coopisac")
    pkg.addHandler(err)
    old_level = pkg.level
    pkg.setLevel(min(level, logging.INFO))  # run.log always gets the INFO trace
    try:
        return args.func(args)
    except ReachabilityError as exc:
        print(f"error: ReachabilityError: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InfeasibleError as exc:
        print(f"error: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ScenarioError, UsageError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    finally:
        pkg.removeHandler(err)
        pkg.setLevel(old_level)


if __name__ == "__main__":
    sys.exit(main())
