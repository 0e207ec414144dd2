"""Rolling-horizon re-planning under a binomial clear-night model.

Each night is clear with the same probability, independently. The reactive
strategy plans the first night from a stochastic solve over the remaining
nights and pool; the plan waits through bad nights and, after it runs on a
clear night, the next node solves again with the executed observations
removed. All ``2^M`` outcome sequences are walked depth-first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .generator import binomial_pi
from .model import Instance, NightPlan, Observation, night_gain
from .solver import SolverConfig, SolveResult, solve_stochastic
from .strategies import UndefinedMetricError, upgrade


@dataclass(frozen=True)
class BinomialWeather:
    p_clear: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_clear <= 1.0:
            raise ValueError("p_clear must lie in [0, 1]")


@dataclass(frozen=True)
class ScenarioResult:
    outcome_mask: tuple[bool, ...]
    probability: float
    total_gain: int

    def to_dict(self) -> dict:
        return {"outcome": ["clear" if c else "bad" for c in self.outcome_mask],
                "probability": self.probability, "total_gain": self.total_gain}


@dataclass
class ReactiveResult:
    scenarios: list[ScenarioResult]
    expected_gain: float
    solver_calls: int
    proven_optimal: bool
    root: SolveResult
    p_clear: float
    nodes_explored: int = 0
    solve_log: list[tuple[int, int]] = field(default_factory=list)  # (pool size, nights)

    @property
    def static_expected_gain(self) -> float:
        return static_expectation(self.root_gains, self.scenarios)

    @property
    def root_gains(self) -> list[int]:
        return list(self.root.night_gains)


def _as_weather(weather: BinomialWeather | float) -> BinomialWeather:
    return weather if isinstance(weather, BinomialWeather) else BinomialWeather(float(weather))


def static_expectation(gains: Sequence[int],
                       scenarios: Iterable[ScenarioResult]) -> float:
    """Expected gain of never re-planning a schedule with these night gains.

    Planned night ``i`` runs on the ``i``-th clear night.
    """
    total = 0.0
    for sc in scenarios:
        clear = sum(sc.outcome_mask)
        total += sc.probability * sum(gains[:clear])
    return total


def simulate_reactive(observations: Sequence[Observation], nights: int,
                      weather: BinomialWeather | float,
                      config: SolverConfig | None = None, memoize: bool = True
                      ) -> ReactiveResult:
    if nights < 1:
        raise ValueError("nights must be >= 1")
    p = _as_weather(weather).p_clear
    config = config or SolverConfig()
    cache: dict[tuple[frozenset[str], int], SolveResult] = {}
    state = {"calls": 0, "proven": True, "nodes": 0}
    solve_log: list[tuple[int, int]] = []
    scenarios: list[ScenarioResult] = []
    lookup = {o.id: o for o in observations}

    def solve(pool: tuple[Observation, ...], m: int) -> SolveResult:
        state["calls"] += 1
        key = (frozenset(o.id for o in pool), m)
        if memoize and key in cache:
            return cache[key]
        result = solve_stochastic(Instance(m, pool, binomial_pi(m, p)), config)
        state["proven"] = state["proven"] and result.proven_optimal
        state["nodes"] += result.nodes_explored
        solve_log.append((len(pool), m))
        cache[key] = result
        return result

    def walk(pool: tuple[Observation, ...], m: int, pending: NightPlan | None,
             gain: int, prob: float, outcome: tuple[bool, ...]) -> None:
        if m == 0:
            scenarios.append(ScenarioResult(outcome, prob, gain))
            return
        if pending is None:
            pending = solve(pool, m).schedule.nights[0]
        done = set(pending.ids)
        rest = tuple(o for o in pool if o.id not in done)
        walk(rest, m - 1, None, gain + night_gain(pending, lookup), prob * p,
             outcome + (True,))
        walk(pool, m - 1, pending, gain, prob * (1.0 - p), outcome + (False,))

    pool = tuple(observations)
    root = solve(pool, nights)
    walk(pool, nights, root.schedule.nights[0], 0, 1.0, ())
    expected = sum(sc.probability * sc.total_gain for sc in scenarios)
    return ReactiveResult(scenarios, expected, state["calls"], state["proven"], root, p,
                          state["nodes"], solve_log)


def reactive_vs_stochastic_expectation(observations: Sequence[Observation], nights: int,
                                       weather: BinomialWeather | float,
                                       config: SolverConfig | None = None
                                       ) -> tuple[float, float]:
    result = simulate_reactive(observations, nights, weather, config)
    return result.expected_gain, result.static_expected_gain


@dataclass(frozen=True)
class SweepPoint:
    p_clear: float
    etg_stochastic: float
    etg_reactive: float
    upgrade: float
    proven_optimal: bool


def sweep_upgrade(etg_reactive: float, etg_stochastic: float) -> float:
    """Upgrade of reactive over static; 0 when both expectations vanish."""
    try:
        return upgrade(etg_reactive, etg_stochastic)
    except UndefinedMetricError:
        if etg_reactive == 0:
            return 0.0
        raise


def sweep_binomial(observations: Sequence[Observation], nights: int,
                   p_grid: Iterable[float], config: SolverConfig | None = None
                   ) -> list[SweepPoint]:
    points = []
    for p in p_grid:
        result = simulate_reactive(observations, nights, p, config)
        reactive = result.expected_gain
        static = result.static_expected_gain
        points.append(SweepPoint(p, static, reactive, sweep_upgrade(reactive, static),
                                 result.proven_optimal))
    return points
