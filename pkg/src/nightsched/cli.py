"""Command-line entry point: ``nightsched <command> ...``.

Exit codes: 0 on success, 2 on invalid input, 3 when a limit stopped a
solve before optimality was proven.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .campaign import ALGORITHMS, fmt, records_to_csv, run_campaign
from .generator import GenParams, derive_seed, generate_instance
from .io import InstanceFormatError, load_instance, save_instance, schedule_to_dict, write_atomic
from .model import Instance, validate_instance
from .oracle import OracleGuardError, brute_force_etg
from .reactive import simulate_reactive, sweep_binomial, sweep_upgrade
from .solver import SolverConfig, check_decreasing_gain, solve_stochastic
from .strategies import (
    UndefinedMetricError,
    curve_rows,
    dominated_by,
    greedy_schedule,
    improvement,
    omniscient_curve,
    stochastic_outcome,
    upgrade,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNPROVEN = 3


class InputError(Exception):
    pass


def header(command: str, **extra: Any) -> dict[str, Any]:
    return {"tool": "nightsched", "version": __version__, "command": command,
            "python": platform.python_version(), **extra}


def header_line(meta: dict[str, Any]) -> str:
    return json.dumps(meta, sort_keys=True)


def add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--time-limit", type=float, default=0.0,
                   help="seconds per solve, 0 for no limit (default: 0)")
    g.add_argument("--node-limit", type=int, default=None, help="search nodes per solve")
    g.add_argument("--dg", action=argparse.BooleanOptionalAction, default=True,
                   help="decreasing night gain pruning")
    g.add_argument("--bo", action=argparse.BooleanOptionalAction, default=True,
                   help="bounded observations per night")
    g.add_argument("--icg", action=argparse.BooleanOptionalAction, default=True,
                   help="check increasing cumulative gain on incumbents")


def solver_config(args: argparse.Namespace) -> SolverConfig:
    try:
        return SolverConfig(args.time_limit, args.dg, args.bo, args.icg, args.node_limit)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def read_instance(path: str) -> Instance:
    try:
        instance = load_instance(path)
    except (OSError, InstanceFormatError) as exc:
        raise InputError(str(exc)) from exc
    report = validate_instance(instance)
    if not report.ok:
        details = "; ".join(f"{v.kind}: {v.message}" for v in report.violations)
        raise InputError(f"{path}: invalid instance: {details}")
    return instance


def emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _mkdir(path: str | Path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create {path}: {exc}") from exc
    return path


def cmd_generate(args: argparse.Namespace) -> int:
    if args.count < 0:
        raise InputError("--count must be >= 0")
    out_dir = _mkdir(args.out_dir)
    entries = []
    params_doc = None
    for i in range(args.count):
        seed = derive_seed(args.seed, i)
        try:
            params = GenParams(args.nights, args.observations, args.len_night, args.max_gain,
                               seed, args.model, args.p_clear)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        params_doc = params.to_dict()
        name = f"instance_{i:04d}"
        instance = generate_instance(params)
        try:
            save_instance(instance, out_dir / f"{name}.json")
        except OSError as exc:
            raise InputError(f"cannot write {out_dir}: {exc}") from exc
        entries.append({"name": name, "file": f"{name}.json", "index": i, "seed": seed,
                        "p_clear": instance.p_clear})
    if params_doc is not None:
        params_doc.pop("seed")
    manifest = {
        "meta": header("generate", master_seed=args.seed),
        "params": params_doc or {"nights": args.nights, "observations": args.observations,
                                 "len_night": args.len_night, "max_gain": args.max_gain,
                                 "probability_model": args.model, "p_clear": args.p_clear},
        "master_seed": args.seed,
        "instances": entries,
    }
    try:
        write_atomic(out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write manifest: {exc}") from exc
    print(f"wrote {len(entries)} instances to {out_dir}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    config = solver_config(args)
    result = solve_stochastic(instance, config)
    doc: dict[str, Any] = {
        "meta": header("solve", instance=args.instance, config=config.to_dict()),
        "etg": result.etg,
        "proven_optimal": result.proven_optimal,
        "nodes_explored": result.nodes_explored,
        "feasibility_checks": result.feasibility_checks,
        "elapsed": result.elapsed,
        "night_gains": result.night_gains,
        "decreasing_gain": check_decreasing_gain(result.schedule, instance),
        "schedule": schedule_to_dict(result.schedule),
    }
    if args.oracle:
        try:
            value, _ = brute_force_etg(instance)
        except OracleGuardError as exc:
            raise InputError(f"--oracle: {exc}") from exc
        doc["oracle"] = {"etg": value, "agrees": abs(value - result.etg) <= 1e-9}
    emit_json(doc, args.out)
    return EXIT_OK if result.proven_optimal else EXIT_UNPROVEN


def _metric(fn, *values: float) -> float | None:
    try:
        return fn(*values)
    except UndefinedMetricError:
        return None


def write_curve_csv(path: Path, instance: Instance, outcome, meta: dict) -> None:
    lines = [f"# {header_line(meta)}", "m,cumulative_gain,pi_m"]
    for m, g, w in curve_rows(instance, outcome):
        lines.append(f"{m},{g},{fmt(w)}")
    write_atomic(path, "\n".join(lines) + "\n")


def cmd_compare(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    config = solver_config(args)
    greedy = greedy_schedule(instance)
    stoch = stochastic_outcome(instance, config)
    omni = omniscient_curve(instance, config)
    envelope = omni.cumulative
    meta = header("compare", instance=args.instance, config=config.to_dict())
    doc = {
        "meta": meta,
        "etg": {"greedy": greedy.etg, "stochastic": stoch.etg, "omniscient": omni.etg},
        "per_night_gains": {"greedy": list(greedy.per_night_gains),
                            "stochastic": list(stoch.per_night_gains),
                            "omniscient": list(omni.per_night_gains)},
        "cumulative": {"greedy": list(greedy.cumulative), "stochastic": list(stoch.cumulative),
                       "omniscient": list(envelope)},
        "metrics": {
            "upgrade_stochastic_over_greedy": _metric(upgrade, stoch.etg, greedy.etg),
            "improvement_stochastic_over_greedy": _metric(improvement, stoch.etg, greedy.etg,
                                                          omni.etg),
            "upgrade_omniscient_over_stochastic": _metric(upgrade, omni.etg, stoch.etg),
        },
        "checks": {
            "greedy_le_stochastic": greedy.etg <= stoch.etg + 1e-9,
            "stochastic_le_omniscient": stoch.etg <= omni.etg + 1e-9,
            "greedy_dominated": dominated_by(greedy.cumulative, envelope),
            "stochastic_dominated": dominated_by(stoch.cumulative, envelope),
        },
        "proven_optimal": stoch.proven_optimal and omni.proven_optimal,
        "schedules": {"greedy": schedule_to_dict(greedy.schedule),
                      "stochastic": schedule_to_dict(stoch.schedule)},
    }
    if args.out_dir:
        out_dir = _mkdir(args.out_dir)
        for outcome in (greedy, stoch, omni):
            write_curve_csv(out_dir / f"curve_{outcome.name}.csv", instance, outcome, meta)
    emit_json(doc, args.out)
    return EXIT_OK if doc["proven_optimal"] else EXIT_UNPROVEN


def _p_clear(args: argparse.Namespace, instance: Instance) -> float:
    p = args.p_clear if args.p_clear is not None else instance.p_clear
    if p is None:
        raise InputError("no --p-clear given and the instance carries no p_clear")
    if not 0.0 <= p <= 1.0:
        raise InputError("--p-clear must lie in [0, 1]")
    return p


def cmd_reactive(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    config = solver_config(args)
    nights = args.nights or instance.nights
    p = _p_clear(args, instance)
    result = simulate_reactive(instance.observations, nights, p, config)
    static = result.static_expected_gain
    doc = {
        "meta": header("reactive", instance=args.instance, config=config.to_dict(), p_clear=p),
        "nights": nights,
        "p_clear": p,
        "etg_reactive": result.expected_gain,
        "etg_stochastic": static,
        "upgrade": sweep_upgrade(result.expected_gain, static),
        "solver_calls": result.solver_calls,
        "proven_optimal": result.proven_optimal,
        "root_schedule": schedule_to_dict(result.root.schedule),
        "scenarios": [sc.to_dict() for sc in result.scenarios],
    }
    emit_json(doc, args.out)
    return EXIT_OK if result.proven_optimal else EXIT_UNPROVEN


def cmd_sweep(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    config = solver_config(args)
    if args.grid < 2:
        raise InputError("--grid needs at least 2 points")
    grid = [k / (args.grid - 1) for k in range(args.grid)]
    points = sweep_binomial(instance.observations, args.nights or instance.nights, grid, config)
    meta = header("sweep", instance=args.instance, config=config.to_dict(), grid=args.grid)
    lines = [f"# {header_line(meta)}", "p_clear,etg_stochastic,etg_reactive,upgrade"]
    for pt in points:
        lines.append(",".join(fmt(v) for v in (pt.p_clear, pt.etg_stochastic,
                                                pt.etg_reactive, pt.upgrade)))
    text = "\n".join(lines) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(pt.proven_optimal for pt in points) else EXIT_UNPROVEN


def _campaign_instances(args: argparse.Namespace) -> tuple[list, dict]:
    if args.manifest:
        try:
            manifest = json.loads(Path(args.manifest).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read manifest: {exc}") from exc
        base = Path(args.manifest).parent
        items = [(e["name"], read_instance(str(base / e["file"])), e.get("seed"))
                 for e in manifest["instances"]]
        return items, {"manifest": args.manifest, "master_seed": manifest.get("master_seed")}
    items = []
    for i in range(args.count):
        seed = derive_seed(args.seed, i)
        try:
            params = GenParams(args.nights, args.observations, args.len_night, args.max_gain,
                               seed, args.model, args.p_clear)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        items.append((f"instance_{i:04d}", generate_instance(params), seed))
    gen = {"nights": args.nights, "observations": args.observations,
           "len_night": args.len_night, "max_gain": args.max_gain, "model": args.model,
           "p_clear": args.p_clear, "count": args.count}
    return items, {"master_seed": args.seed, "generation": gen}


def cmd_campaign(args: argparse.Namespace) -> int:
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown:
        raise InputError(f"unknown algorithms: {', '.join(sorted(unknown))}")
    config = solver_config(args)
    items, source = _campaign_instances(args)
    if "reactive" in algorithms and any(inst.p_clear is None for _, inst, _ in items):
        raise InputError("reactive runs need binomial instances (with p_clear)")
    out_dir = _mkdir(args.out_dir)
    record_dir = _mkdir(out_dir / "records")
    stats = run_campaign(items, algorithms, config, args.workers, record_dir)
    meta = header("campaign", config=config.to_dict(), algorithms=algorithms, **source)
    doc = {"meta": meta, **stats.to_dict(include_records=False)}
    write_atomic(out_dir / "stats.json", json.dumps(doc, indent=2) + "\n")
    write_atomic(out_dir / "instances.csv",
                 records_to_csv(stats.records, algorithms, header_line(meta)))
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if stats.n_unproven == 0 else EXIT_UNPROVEN


def _add_generation_flags(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--nights", "-M", type=int, required=required)
    p.add_argument("--observations", "-S", type=int, required=required)
    p.add_argument("--len-night", type=int, default=5)
    p.add_argument("--max-gain", type=int, default=10)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--model", choices=["uniform_normalized", "binomial"],
                   default="uniform_normalized", help="probability model")
    p.add_argument("--p-clear", type=float, default=None,
                   help="fix the binomial clear-night probability instead of drawing it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nightsched", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write seeded random instances and a manifest")
    _add_generation_flags(p, required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="maximize the expected total gain")
    p.add_argument("instance")
    add_solver_flags(p)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--oracle", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="greedy vs stochastic vs omniscient")
    p.add_argument("instance")
    add_solver_flags(p)
    p.add_argument("--out")
    p.add_argument("--out-dir", help="directory for per-algorithm curve CSVs")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("reactive", help="simulate rolling-horizon re-planning")
    p.add_argument("instance")
    p.add_argument("--p-clear", type=float, default=None)
    p.add_argument("--nights", type=int, default=None, help="override the night count")
    add_solver_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reactive)

    p = sub.add_parser("sweep", help="reactive upgrade across clear-night probabilities")
    p.add_argument("instance")
    p.add_argument("--grid", type=int, default=21, help="evenly spaced points on [0, 1]")
    p.add_argument("--nights", type=int, default=None)
    add_solver_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("campaign", help="run algorithms over many instances")
    p.add_argument("--manifest", help="manifest.json from 'generate'")
    _add_generation_flags(p, required=False)
    p.add_argument("--algorithms", default="greedy,stochastic,omniscient")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (capped by NIGHTSCHED_THREADS)")
    p.add_argument("--out-dir", required=True)
    add_solver_flags(p)
    p.set_defaults(func=cmd_campaign)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "campaign" and not args.manifest and (
            args.nights is None or args.observations is None):
        parser.error("campaign needs --manifest or --nights/--observations")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"nightsched: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
