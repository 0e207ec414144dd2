"""Greedy, stochastic and omniscient strategies, and the comparison metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import (
    GainCurve,
    Instance,
    Schedule,
    etg_from_gains,
    gain_curve,
    night_gain,
)
from .single_night import best_single_night
from .solver import SolverConfig, solve_stochastic


class UndefinedMetricError(ZeroDivisionError):
    """A comparison metric has a zero denominator."""


@dataclass(frozen=True)
class StrategyOutcome:
    name: str
    per_night_gains: tuple[int, ...]
    etg: float
    schedule: Schedule | None = None
    proven_optimal: bool = True

    @property
    def cumulative(self) -> tuple[int, ...]:
        out = []
        total = 0
        for g in self.per_night_gains:
            total += g
            out.append(total)
        return tuple(out)

    def curve(self, instance: Instance) -> GainCurve:
        return gain_curve(instance, self.per_night_gains)


def greedy_schedule(instance: Instance) -> StrategyOutcome:
    """Plan each night as if it were the last, from what earlier nights left."""
    pool = list(instance.observations)
    plans = []
    gains = []
    for _ in range(instance.nights):
        plan = best_single_night(pool)
        taken = set(plan.ids)
        pool = [o for o in pool if o.id not in taken]
        plans.append(plan)
        gains.append(night_gain(plan, instance))
    return StrategyOutcome("greedy", tuple(gains), etg_from_gains(gains, instance.probabilities),
                           Schedule(tuple(plans)))


def stochastic_outcome(instance: Instance, config: SolverConfig | None = None
                       ) -> StrategyOutcome:
    result = solve_stochastic(instance, config)
    return StrategyOutcome("stochastic", tuple(result.night_gains), result.etg,
                           result.schedule, result.proven_optimal)


def omniscient_curve(instance: Instance, config: SolverConfig | None = None
                     ) -> StrategyOutcome:
    """Best total gain for each certain night count m = 1..M.

    The steps need not come from one schedule, so no schedule is returned;
    ``per_night_gains`` holds the increments of that envelope.
    """
    M = instance.nights
    optima = []
    proven = True
    for m in range(1, M + 1):
        pi = [0.0] * (M + 1)
        pi[m] = 1.0
        result = solve_stochastic(instance.with_probabilities(pi), config)
        proven = proven and result.proven_optimal
        optima.append(int(round(result.etg)))
    increments = tuple(b - a for a, b in zip([0] + optima, optima))
    return StrategyOutcome("omniscient", increments,
                           etg_from_gains(increments, instance.probabilities), None, proven)


def upgrade(etg_a1: float, etg_a2: float) -> float:
    """Relative ETG gain of A1 over A2."""
    if etg_a2 == 0:
        raise UndefinedMetricError("upgrade is undefined when ETG[A2] is 0")
    return (etg_a1 - etg_a2) / etg_a2


def improvement(etg_a1: float, etg_a2: float, etg_omniscient: float) -> float:
    """Share of the gap between A2 and the omniscient envelope that A1 closes."""
    if etg_omniscient == etg_a2:
        raise UndefinedMetricError("improvement is undefined when ETG[omniscient] == ETG[A2]")
    return (etg_a1 - etg_a2) / (etg_omniscient - etg_a2)


def curve_rows(instance: Instance, outcome: StrategyOutcome) -> list[tuple[int, int, float]]:
    """(m, cumulative gain, pi_m) rows for m = 0..M."""
    curve = outcome.curve(instance)
    return [(m, g, w) for (m, g), w in zip(curve.steps, curve.widths)]


def dominated_by(curve: Sequence[int], envelope: Sequence[int]) -> bool:
    return all(a <= b for a, b in zip(curve, envelope))
