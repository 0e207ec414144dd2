"""Brute-force reference implementations for small instances.

Nothing here imports the solver, the single-night module or the reactive
module; agreement between the two sides is the point.
"""

from __future__ import annotations

import math
from itertools import permutations, product
from typing import Sequence

from .model import Instance, NightPlan, Observation, PlacedObservation, Schedule

MAX_OBSERVATIONS = 8
MAX_NIGHTS = 3
MAX_SPAN = 5
TIE_TOL = 1e-9


class OracleGuardError(ValueError):
    """The instance is too large for exhaustive enumeration."""


def _check_guard(observations: Sequence[Observation], nights: int) -> None:
    if len(observations) > MAX_OBSERVATIONS:
        raise OracleGuardError(f"oracle limited to {MAX_OBSERVATIONS} observations")
    if nights > MAX_NIGHTS:
        raise OracleGuardError(f"oracle limited to {MAX_NIGHTS} nights")
    if observations:
        span = max(o.deadline for o in observations) - min(o.release for o in observations)
        if span > MAX_SPAN:
            raise OracleGuardError(f"oracle limited to a night span of {MAX_SPAN}")


def _place(order: Sequence[Observation], k: int, free_from: int,
           starts: list[int]) -> bool:
    """Try every start time for ``order[k:]`` once earlier ones end by ``free_from``."""
    if k == len(order):
        return True
    obs = order[k]
    for start in range(max(free_from, obs.release), obs.deadline - obs.processing + 1):
        starts.append(start)
        if _place(order, k + 1, start + obs.processing, starts):
            return True
        starts.pop()
    return False


def exhaustive_night(subset: Sequence[Observation]) -> NightPlan | None:
    """Sequence ``subset`` by trying every permutation and every start time."""
    for order in permutations(sorted(subset, key=lambda o: o.id)):
        starts: list[int] = []
        if _place(order, 0, -(1 << 30), starts):
            return NightPlan(tuple(PlacedObservation(o.id, s) for o, s in zip(order, starts)))
    return None


def brute_force_etg(instance: Instance) -> tuple[float, Schedule]:
    """Maximum ETG over every assignment of observations to nights or to nobody.

    Among assignments within ``TIE_TOL`` of the maximum, returns the one whose
    nights, read in order, have the smallest ``(-gain, size, sorted ids)`` key.
    """
    obs = list(instance.observations)
    M = instance.nights
    _check_guard(obs, M)
    pi = instance.probabilities
    feasible: dict[frozenset[str], NightPlan | None] = {}

    candidates = []
    for assignment in product(range(M + 1), repeat=len(obs)):
        nights: list[list[Observation]] = [[] for _ in range(M)]
        for o, a in zip(obs, assignment):
            if a:
                nights[a - 1].append(o)
        ok = True
        for members in nights:
            key = frozenset(o.id for o in members)
            if key not in feasible:
                feasible[key] = exhaustive_night(members)
            if feasible[key] is None:
                ok = False
                break
        if not ok:
            continue
        gains = [sum(o.gain for o in members) for members in nights]
        value = 0.0
        for m in range(1, M + 1):
            value += pi[m] * sum(gains[:m])
        order_key = tuple((-g, len(members), tuple(sorted(o.id for o in members)))
                          for g, members in zip(gains, nights))
        candidates.append((value, order_key, nights))

    best = max(c[0] for c in candidates)
    _, _, nights = min((c for c in candidates if c[0] >= best - TIE_TOL), key=lambda c: c[1])
    schedule = Schedule(tuple(feasible[frozenset(o.id for o in members)] for members in nights))
    return best, schedule


def _binomial(m: int, p: float) -> tuple[float, ...]:
    return tuple(math.comb(m, k) * p ** k * (1 - p) ** (m - k) for k in range(m + 1))


def brute_force_reactive(observations: Sequence[Observation], nights: int,
                         p_clear: float) -> float:
    """Expected gain of re-planning after every clear night, by walking all 2^M outcomes.

    The first night of a fresh exhaustive solve is kept through bad nights and
    replaced by a new solve after each clear one.
    """
    _check_guard(observations, nights)

    def walk(pool: tuple[Observation, ...], m: int, pending: NightPlan | None) -> float:
        if m == 0:
            return 0.0
        if pending is None:
            _, schedule = brute_force_etg(Instance(m, pool, _binomial(m, p_clear)))
            pending = schedule.nights[0]
        done = set(pending.ids)
        gain = sum(o.gain for o in pool if o.id in done)
        rest = tuple(o for o in pool if o.id not in done)
        clear = gain + walk(rest, m - 1, None)
        bad = walk(pool, m - 1, pending)
        return p_clear * clear + (1 - p_clear) * bad

    return walk(tuple(observations), nights, None)
