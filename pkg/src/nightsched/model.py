"""Domain types, validation and Expected Total Gain evaluation.

Times are integers on a per-night grid shared by every night. An observation
must complete by its deadline: ``release <= start`` and
``start + processing <= deadline``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

PROB_TOL = 1e-9


@dataclass(frozen=True)
class Observation:
    id: str
    release: int
    deadline: int
    processing: int
    gain: int


@dataclass(frozen=True)
class Instance:
    nights: int
    observations: tuple[Observation, ...]
    probabilities: tuple[float, ...]
    # Per-night clear probability when the vector came from a binomial model.
    p_clear: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "observations", tuple(self.observations))
        object.__setattr__(self, "probabilities", tuple(float(p) for p in self.probabilities))

    @cached_property
    def by_id(self) -> dict[str, Observation]:
        return {o.id: o for o in self.observations}

    def with_probabilities(self, probabilities: Sequence[float]) -> Instance:
        return Instance(self.nights, self.observations, tuple(probabilities), self.p_clear)

    def with_pool(self, observations: Iterable[Observation], nights: int,
                  probabilities: Sequence[float]) -> Instance:
        return Instance(nights, tuple(observations), tuple(probabilities), self.p_clear)


@dataclass(frozen=True)
class PlacedObservation:
    observation_id: str
    start: int


@dataclass(frozen=True)
class NightPlan:
    placements: tuple[PlacedObservation, ...] = ()

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.placements, key=lambda p: (p.start, p.observation_id)))
        object.__setattr__(self, "placements", ordered)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(p.observation_id for p in self.placements)

    def __len__(self) -> int:
        return len(self.placements)


@dataclass(frozen=True)
class Schedule:
    nights: tuple[NightPlan, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nights", tuple(self.nights))

    @classmethod
    def empty(cls, nights: int) -> Schedule:
        return cls(tuple(NightPlan() for _ in range(nights)))

    def placed_ids(self) -> list[str]:
        return [pid for plan in self.nights for pid in plan.ids]


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    observation_id: str | None = None
    night: int | None = None


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def add(self, kind: str, message: str, observation_id: str | None = None,
            night: int | None = None) -> None:
        self.violations.append(Violation(kind, message, observation_id, night))


def validate_probabilities(pi: Sequence[float], report: ValidationReport | None = None
                           ) -> ValidationReport:
    report = report if report is not None else ValidationReport()
    for m, value in enumerate(pi):
        if value < -PROB_TOL or value > 1 + PROB_TOL:
            report.add("probability_range", f"pi[{m}] = {value!r} outside [0, 1]")
    total = sum(pi)
    if abs(total - 1.0) > PROB_TOL:
        report.add("probability_sum", f"probabilities sum to {total!r}, not 1")
    return report


def validate_instance(instance: Instance) -> ValidationReport:
    """Check every instance invariant and collect the violations.

    Never raises; an empty report means the instance is valid.
    """
    report = ValidationReport()
    if instance.nights < 1:
        report.add("nights", f"nights must be >= 1, got {instance.nights}")
    if len(instance.probabilities) != instance.nights + 1:
        report.add("probability_length",
                   f"expected {instance.nights + 1} probabilities, "
                   f"got {len(instance.probabilities)}")
    validate_probabilities(instance.probabilities, report)
    if instance.p_clear is not None and not 0.0 <= instance.p_clear <= 1.0:
        report.add("p_clear", f"p_clear = {instance.p_clear!r} outside [0, 1]")

    seen: set[str] = set()
    for obs in instance.observations:
        if obs.id in seen:
            report.add("duplicate_id", f"observation id {obs.id!r} repeated", obs.id)
        seen.add(obs.id)
        if not obs.release < obs.deadline:
            report.add("window", "release < deadline violated", obs.id)
        if not 1 <= obs.processing <= obs.deadline - obs.release:
            report.add("processing", "1 <= processing <= deadline - release violated", obs.id)
        if obs.gain < 1:
            report.add("gain", "gain >= 1 violated", obs.id)
    return report


def validate_schedule(instance: Instance, schedule: Schedule) -> ValidationReport:
    report = ValidationReport()
    known = instance.by_id
    if len(schedule.nights) != instance.nights:
        report.add("night_count",
                   f"schedule has {len(schedule.nights)} nights, instance has {instance.nights}")
    seen: dict[str, int] = {}
    for i, plan in enumerate(schedule.nights):
        prev_end = None
        prev_id = None
        for placed in plan.placements:
            oid = placed.observation_id
            obs = known.get(oid)
            if obs is None:
                report.add("unknown_id", f"night {i + 1} places unknown id {oid!r}", oid, i)
                continue
            if oid in seen:
                report.add("duplicate", f"{oid!r} placed in nights {seen[oid] + 1} and {i + 1}",
                           oid, i)
            else:
                seen[oid] = i
            if placed.start < obs.release:
                report.add("release", f"{oid!r} starts at {placed.start} before release "
                                      f"{obs.release}", oid, i)
            if placed.start + obs.processing > obs.deadline:
                report.add("deadline", f"{oid!r} completes at {placed.start + obs.processing} "
                                       f"after deadline {obs.deadline}", oid, i)
            if prev_end is not None and placed.start < prev_end:
                report.add("overlap", f"{prev_id!r} and {oid!r} overlap in night {i + 1}", oid, i)
            end = placed.start + obs.processing
            if prev_end is None or end > prev_end:
                prev_end, prev_id = end, oid
    return report


def night_gain(plan: NightPlan, instance: Instance | Mapping[str, Observation]) -> int:
    lookup = instance.by_id if isinstance(instance, Instance) else instance
    return sum(lookup[p.observation_id].gain for p in plan.placements)


def night_gains(schedule: Schedule, instance: Instance) -> list[int]:
    lookup = instance.by_id
    return [night_gain(plan, lookup) for plan in schedule.nights]


def tail_probabilities(pi: Sequence[float]) -> list[float]:
    """Probability that at least ``i`` nights are observable, for i = 1..M."""
    tails = []
    acc = 0.0
    for value in reversed(pi[1:]):
        acc += value
        tails.append(acc)
    return tails[::-1]


def etg_from_gains(per_night_gains: Sequence[int], pi: Sequence[float]) -> float:
    """Double-sum form: sum over m of pi_m times the gain of the first m nights."""
    total = 0.0
    cumulative = 0
    for m in range(1, len(pi)):
        if m <= len(per_night_gains):
            cumulative += per_night_gains[m - 1]
        total += pi[m] * cumulative
    return total


def etg_from_tails(per_night_gains: Sequence[int], tails: Sequence[float]) -> float:
    return sum(g * t for g, t in zip(per_night_gains, tails))


def expected_total_gain(instance: Instance, schedule: Schedule) -> float:
    return etg_from_gains(night_gains(schedule, instance), instance.probabilities)


@dataclass(frozen=True)
class GainCurve:
    """Step curve of cumulative gain against the number of observable nights.

    ``cumulative[m]`` is the total gain when exactly ``m`` nights are
    observable and ``widths[m]`` is the probability of that happening.
    """

    cumulative: tuple[int, ...]
    widths: tuple[float, ...]

    @property
    def steps(self) -> list[tuple[int, int]]:
        return list(enumerate(self.cumulative))

    def area(self) -> float:
        return sum(w * g for w, g in zip(self.widths, self.cumulative))


def gain_curve(instance: Instance, per_night_gains: Sequence[float]) -> GainCurve:
    if len(per_night_gains) != instance.nights:
        raise ValueError(f"expected {instance.nights} per-night gains, got {len(per_night_gains)}")
    cumulative = [0]
    for g in per_night_gains:
        if g < 0:
            raise ValueError("per-night gains must be nonnegative")
        cumulative.append(cumulative[-1] + g)
    return GainCurve(tuple(cumulative), tuple(instance.probabilities))
