"""Multi-instance experiment campaigns and their aggregate statistics."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .io import write_atomic
from .model import Instance
from .reactive import simulate_reactive
from .solver import SolverConfig
from .strategies import (
    UndefinedMetricError,
    greedy_schedule,
    improvement,
    omniscient_curve,
    stochastic_outcome,
    upgrade,
)

ALGORITHMS = ("greedy", "stochastic", "omniscient", "reactive")
PAIRS = (
    ("stochastic", "greedy"),
    ("omniscient", "stochastic"),
    ("reactive", "stochastic"),
    ("omniscient", "reactive"),
)
GAP_TOL = 1e-9
FLOAT_FMT = "{:.12g}"


def fmt(x: float | None) -> str:
    return "" if x is None else FLOAT_FMT.format(x)


def pair_name(a1: str, a2: str) -> str:
    return f"{a1}_vs_{a2}"


def active_pairs(algorithms: Sequence[str]) -> list[tuple[str, str]]:
    return [(a1, a2) for a1, a2 in PAIRS if a1 in algorithms and a2 in algorithms]


@dataclass
class InstanceRecord:
    name: str
    seed: int | None
    p_clear: float | None
    etg: dict[str, float]
    proven_optimal: bool
    elapsed: float
    metrics: dict[str, dict[str, Any]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "seed": self.seed, "p_clear": self.p_clear, "etg": self.etg,
                "proven_optimal": self.proven_optimal, "elapsed": self.elapsed,
                "metrics": self.metrics}


def pair_metrics(etg: dict[str, float], a1: str, a2: str) -> dict[str, Any]:
    gap = etg[a1] - etg[a2]
    nonzero = gap > GAP_TOL
    out: dict[str, Any] = {"gap": gap, "nonzero_gap": nonzero, "upgrade": None,
                           "improvement": None}
    if not nonzero:
        return out
    try:
        out["upgrade"] = upgrade(etg[a1], etg[a2])
    except UndefinedMetricError:
        pass
    if "omniscient" in etg:
        try:
            out["improvement"] = improvement(etg[a1], etg[a2], etg["omniscient"])
        except UndefinedMetricError:
            pass
    return out


def run_instance(name: str, instance: Instance, algorithms: Sequence[str],
                 config: SolverConfig, seed: int | None = None) -> InstanceRecord:
    start = time.perf_counter()
    etg: dict[str, float] = {}
    proven = True
    if "greedy" in algorithms:
        etg["greedy"] = greedy_schedule(instance).etg
    if "stochastic" in algorithms:
        out = stochastic_outcome(instance, config)
        etg["stochastic"] = out.etg
        proven &= out.proven_optimal
    if "omniscient" in algorithms:
        out = omniscient_curve(instance, config)
        etg["omniscient"] = out.etg
        proven &= out.proven_optimal
    if "reactive" in algorithms:
        if instance.p_clear is None:
            raise ValueError(f"{name}: reactive runs need an instance with p_clear")
        result = simulate_reactive(instance.observations, instance.nights, instance.p_clear,
                                   config)
        etg["reactive"] = result.expected_gain
        proven &= result.proven_optimal
    record = InstanceRecord(name, seed, instance.p_clear, etg, proven,
                            time.perf_counter() - start)
    for a1, a2 in active_pairs(algorithms):
        record.metrics[pair_name(a1, a2)] = pair_metrics(etg, a1, a2)
    return record


@dataclass
class PairStats:
    a1: str
    a2: str
    n_nonzero_gap: int
    proportion_nonzero_gap: float
    mean_improvement: float | None
    mean_upgrade: float | None
    filter: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class CampaignStats:
    n_instances: int
    pairs: dict[str, PairStats]
    records: list[InstanceRecord]
    n_unproven: int = 0

    def to_dict(self, include_records: bool = True) -> dict:
        doc: dict[str, Any] = {
            "n_instances": self.n_instances,
            "n_unproven": self.n_unproven,
            "pairs": {k: v.to_dict() for k, v in self.pairs.items()},
        }
        if include_records:
            doc["records"] = [r.to_dict() for r in self.records]
        return doc


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def aggregate(records: Sequence[InstanceRecord], algorithms: Sequence[str]) -> CampaignStats:
    """Gap proportions and means over the nonzero-gap instances of each pair."""
    pairs = {}
    n = len(records)
    for a1, a2 in active_pairs(algorithms):
        key = pair_name(a1, a2)
        rows = [r.metrics[key] for r in records if r.metrics[key]["nonzero_gap"]]
        pairs[key] = PairStats(
            a1, a2, len(rows), len(rows) / n if n else 0.0,
            _mean([m["improvement"] for m in rows if m["improvement"] is not None]),
            _mean([m["upgrade"] for m in rows if m["upgrade"] is not None]),
            f"ETG[{a1}] - ETG[{a2}] > {GAP_TOL:g}",
        )
    return CampaignStats(n, pairs, list(records), sum(not r.proven_optimal for r in records))


def csv_columns(algorithms: Sequence[str]) -> list[str]:
    cols = ["instance", "seed", "p_clear"]
    cols += [f"etg_{a}" for a in ALGORITHMS if a in algorithms]
    for a1, a2 in active_pairs(algorithms):
        key = pair_name(a1, a2)
        cols += [f"{key}_gap", f"{key}_nonzero", f"{key}_upgrade", f"{key}_improvement"]
    cols += ["proven_optimal", "elapsed"]
    return cols


def records_to_csv(records: Iterable[InstanceRecord], algorithms: Sequence[str],
                   header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        for line in header.splitlines():
            buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_columns(algorithms))
    for r in records:
        row: list[Any] = [r.name, "" if r.seed is None else r.seed, fmt(r.p_clear)]
        row += [fmt(r.etg[a]) for a in ALGORITHMS if a in algorithms]
        for a1, a2 in active_pairs(algorithms):
            m = r.metrics[pair_name(a1, a2)]
            row += [fmt(m["gap"]), int(m["nonzero_gap"]), fmt(m["upgrade"]),
                    fmt(m["improvement"])]
        row += [int(r.proven_optimal), fmt(r.elapsed)]
        writer.writerow(row)
    return buf.getvalue()


def read_csv_rows(text: str) -> list[dict[str, str]]:
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))


def stats_from_csv(text: str, algorithms: Sequence[str]) -> dict[str, dict[str, Any]]:
    """Recompute the per-pair aggregates from a per-instance CSV."""
    rows = read_csv_rows(text)
    out = {}
    for a1, a2 in active_pairs(algorithms):
        key = pair_name(a1, a2)
        hit = [r for r in rows if r[f"{key}_nonzero"] == "1"]
        imp = [float(r[f"{key}_improvement"]) for r in hit if r[f"{key}_improvement"]]
        upg = [float(r[f"{key}_upgrade"]) for r in hit if r[f"{key}_upgrade"]]
        out[key] = {"n_nonzero_gap": len(hit), "mean_improvement": _mean(imp),
                    "mean_upgrade": _mean(upg)}
    return out


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get("NIGHTSCHED_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            pass
    return max(1, min(requested, cap)) if requested else cap


def _job(args: tuple) -> InstanceRecord:
    name, instance, algorithms, config, seed, record_dir = args
    record = run_instance(name, instance, algorithms, config, seed)
    if record_dir is not None:
        write_atomic(Path(record_dir) / f"{name}.json",
                     json.dumps(record.to_dict(), indent=2) + "\n")
    return record


def run_campaign(instances: Sequence[tuple[str, Instance, int | None]],
                 algorithms: Sequence[str], config: SolverConfig,
                 workers: int | None = None, record_dir: str | os.PathLike | None = None
                 ) -> CampaignStats:
    """Run ``algorithms`` on every ``(name, instance, seed)`` and aggregate.

    Records come back in input order whatever the worker count.
    """
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown:
        raise ValueError(f"unknown algorithms: {sorted(unknown)}")
    jobs = [(name, inst, tuple(algorithms), config, seed, record_dir)
            for name, inst, seed in instances]
    n_workers = worker_count(workers)
    if n_workers == 1 or len(jobs) <= 1:
        records = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            records = list(pool.map(_job, jobs))
    return aggregate(records, algorithms)
