"""Exact branch-and-bound for the Expected Total Gain over M identical nights.

The search assigns one-night patterns (feasible subsets, precomputed once) to
nights 1..M in order. Patterns are sorted by decreasing gain, then size, then
id sequence, and the depth-first search visits schedules in lexicographic
order of that key. Among schedules whose ETG is within ``EPS`` of the optimum
the solver therefore returns the lexicographically smallest, with or without
the pruning rules switched on.

Pruning rules (each one is redundant; the optimum never changes):

* decreasing gain (DG): night ``i`` only takes patterns ranked after the
  pattern of night ``i - 1``, so night gains never increase and equal-gain
  nights appear in one canonical order;
* bounded observations (BO): no night holds more than
  :func:`bound_max_obs` observations, used both to skip oversized subsets and
  to cap the gain left for the remaining nights;
* increasing cumulative gain (ICG): checked on every incumbent.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .model import (
    Instance,
    Schedule,
    expected_total_gain,
    night_gains,
    tail_probabilities,
)
from .single_night import Sequencer, edf_order, enumerate_feasible_subsets, plan_key

EPS = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    time_limit: float = 0.0
    use_dg: bool = True
    use_bo: bool = True
    use_icg: bool = True
    node_limit: int | None = None

    def __post_init__(self) -> None:
        if self.time_limit < 0:
            raise ValueError("time_limit must be >= 0")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")

    def to_dict(self) -> dict:
        return {"time_limit": self.time_limit, "use_dg": self.use_dg, "use_bo": self.use_bo,
                "use_icg": self.use_icg, "node_limit": self.node_limit}


@dataclass
class SolveResult:
    schedule: Schedule
    etg: float
    proven_optimal: bool
    nodes_explored: int
    elapsed: float
    night_gains: list[int] = field(default_factory=list)
    # One-night subsets passed to the sequencing check while building patterns.
    feasibility_checks: int = 0


def bound_max_obs(instance: Instance) -> int:
    """Most observations that fit in one night, ignoring their windows.

    The horizon is the latest deadline minus the earliest release; the bound
    counts how many of the shortest processing times fit inside it.
    """
    obs = instance.observations
    if not obs:
        raise ValueError("bound_max_obs needs at least one observation")
    horizon = max(o.deadline for o in obs) - min(o.release for o in obs)
    total = 0
    count = 0
    for p in sorted(o.processing for o in obs):
        total += p
        if total > horizon:
            break
        count += 1
    return count


def check_decreasing_gain(schedule: Schedule, instance: Instance) -> bool:
    gains = night_gains(schedule, instance)
    return all(a >= b for a, b in zip(gains, gains[1:]))


def normalize_night_order(schedule: Schedule, instance: Instance) -> Schedule:
    """Stable sort of the nights by non-increasing gain."""
    gains = night_gains(schedule, instance)
    order = sorted(range(len(gains)), key=lambda i: -gains[i])
    return Schedule(tuple(schedule.nights[i] for i in order))


class _Stop(Exception):
    pass


def _fill(tails: list[float], start: int, cap: int, total: int) -> float:
    """Best weighted sum of night gains from ``start`` on, each <= cap, summing <= total.

    Tails are non-increasing, so loading the earliest nights first is optimal.
    """
    ub = 0.0
    left = total
    for i in range(start, len(tails)):
        if left <= 0:
            break
        g = cap if cap < left else left
        ub += tails[i] * g
        left -= g
    return ub


class _Search:
    def __init__(self, instance: Instance, config: SolverConfig):
        self.instance = instance
        self.config = config
        self.M = instance.nights
        self.tails = tail_probabilities(instance.probabilities)
        self.start_time = time.perf_counter()
        self.deadline = (self.start_time + config.time_limit) if config.time_limit > 0 else None
        self.nodes = 0
        self.complete = True

        obs = edf_order(instance.observations)
        self.obs = obs
        self.sequencer = Sequencer(obs)
        n = len(obs)
        self.bo = bound_max_obs(instance) if (config.use_bo and n) else None
        self.horizon = (max(o.deadline for o in obs) - min(o.release for o in obs)) if n else 0

        enum = enumerate_feasible_subsets(self.sequencer, self.bo, self.deadline)
        self.feasibility_checks = enum.evaluations
        if not enum.complete:
            self.complete = False
        keys = [plan_key(g, self._ids(m)) for m, g in zip(enum.masks, enum.gains)]
        order = sorted(range(len(keys)), key=keys.__getitem__)
        self.masks = [enum.masks[i] for i in order]
        self.gains = [enum.gains[i] for i in order]
        dtype = np.uint64 if n <= 64 else object
        self.mask_arr = np.array(self.masks, dtype=dtype)
        self.all_cands = np.arange(len(self.masks), dtype=np.int64)

        # Items by gain per unit time, for the fractional knapsack bound.
        self.by_ratio = sorted(range(n), key=lambda j: (-obs[j].gain / obs[j].processing, j))
        self.by_gain = sorted(range(n), key=lambda j: (-obs[j].gain, j))

        self.best = -np.inf
        self.best_choice: list[int] | None = None

    def _ids(self, mask: int) -> list[str]:
        ids = []
        while mask:
            low = mask & -mask
            ids.append(self.obs[low.bit_length() - 1].id)
            mask ^= low
        return ids

    def _tick(self) -> None:
        self.nodes += 1
        limit = self.config.node_limit
        if limit is not None and self.nodes > limit:
            raise _Stop
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _Stop

    def _disjoint(self, cands: np.ndarray, mask: int) -> np.ndarray:
        if len(cands) == 0:
            return cands
        sel = self.mask_arr[cands]
        if self.mask_arr.dtype == object:
            keep = np.array([int(x) & mask == 0 for x in sel], dtype=bool)
        else:
            keep = (sel & np.uint64(mask)) == 0
        return cands[keep]

    def _total_bound(self, used: int, nights_left: int) -> int:
        """Upper bound on the gain the remaining pool can add over ``nights_left`` nights."""
        obs = self.obs
        capacity = nights_left * self.horizon
        frac = 0.0
        plain = 0
        for j in self.by_ratio:
            if used >> j & 1:
                continue
            o = obs[j]
            plain += o.gain
            if capacity > 0:
                if o.processing <= capacity:
                    frac += o.gain
                    capacity -= o.processing
                else:
                    frac += o.gain * capacity / o.processing
                    capacity = 0
        total = min(plain, int(frac + 1e-9))
        if self.bo is not None:
            slots = nights_left * self.bo
            top = 0
            for j in self.by_gain:
                if slots == 0:
                    break
                if used >> j & 1:
                    continue
                top += obs[j].gain
                slots -= 1
            total = min(total, top)
        return total

    def _allowed(self, cands: np.ndarray, prev_idx: int) -> np.ndarray:
        if not self.config.use_dg:
            return cands
        return cands[np.searchsorted(cands, prev_idx, side="right"):]

    def _greedy_completion(self, k: int, cands: np.ndarray, prev_idx: int,
                           value: float, chosen: list[int]) -> tuple[float, list[int]]:
        picks = list(chosen)
        for i in range(k, self.M):
            allowed = self._allowed(cands, prev_idx)
            if len(allowed) == 0:
                break
            idx = int(allowed[0])
            picks.append(idx)
            value += self.tails[i] * self.gains[idx]
            cands = self._disjoint(allowed if self.config.use_dg else cands, self.masks[idx])
            prev_idx = idx
        return value, picks

    def _leaf(self, value: float, picks: list[int]) -> None:
        if value > self.best + EPS:
            if self.config.use_icg:
                cumulative = 0
                for idx in picks:
                    nxt = cumulative + (self.gains[idx] if idx >= 0 else 0)
                    if nxt < cumulative:
                        raise AssertionError("cumulative night gain decreased")
                    cumulative = nxt
            self.best = value
            self.best_choice = list(picks)

    def _dfs(self, k: int, used: int, prev_idx: int, value: float,
             cands: np.ndarray, chosen: list[int]) -> None:
        self._tick()
        tails = self.tails
        if k == self.M or tails[k] == 0.0:
            self._leaf(*self._greedy_completion(k, cands, prev_idx, value, chosen))
            return
        allowed = self._allowed(cands, prev_idx)
        if len(allowed) == 0:
            self._leaf(value, chosen)
            return
        gains = self.gains
        g_max = gains[int(allowed[0])]
        if k == self.M - 1:
            self._leaf(value + tails[k] * g_max, chosen + [int(allowed[0])])
            return
        total = self._total_bound(used, self.M - k)
        threshold = self.best + EPS
        if value + _fill(tails, k, g_max, total) <= threshold:
            return
        dg = self.config.use_dg
        t_k = tails[k]
        allowed_list = allowed.tolist()
        for pos, idx in enumerate(allowed_list):
            g = gains[idx]
            ub = value + t_k * g + _fill(tails, k + 1, g if dg else g_max, total - g)
            if ub <= self.best + EPS:
                return
            mask = self.masks[idx]
            child = self._disjoint(allowed[pos + 1:] if dg else cands, mask)
            chosen.append(idx)
            self._dfs(k + 1, used | mask, idx, value + t_k * g, child, chosen)
            chosen.pop()
        # The empty pattern ranks last.
        if dg:
            self._leaf(value, chosen)
        elif value + _fill(tails, k + 1, g_max, total) > self.best + EPS:
            chosen.append(-1)
            self._dfs(k + 1, used, prev_idx, value, cands, chosen)
            chosen.pop()

    def run(self) -> SolveResult:
        greedy_value, greedy_picks = self._greedy_completion(0, self.all_cands, -1, 0.0, [])
        self.best = greedy_value - 2 * EPS
        if self.complete:
            try:
                self._dfs(0, 0, -1, 0.0, self.all_cands, [])
            except _Stop:
                self.complete = False
        picks = self.best_choice if self.best_choice is not None else greedy_picks
        schedule = self._schedule(picks)
        return SolveResult(
            schedule=schedule,
            etg=expected_total_gain(self.instance, schedule),
            proven_optimal=self.complete,
            nodes_explored=self.nodes,
            elapsed=time.perf_counter() - self.start_time,
            night_gains=night_gains(schedule, self.instance),
            feasibility_checks=self.feasibility_checks,
        )

    def _schedule(self, picks: list[int]) -> Schedule:
        plans = []
        for idx in picks:
            if idx < 0:
                plans.append(self.sequencer.plan(0))
            else:
                plans.append(self.sequencer.plan(self.masks[idx]))
        while len(plans) < self.M:
            plans.append(self.sequencer.plan(0))
        return Schedule(tuple(plans))


def solve_stochastic(instance: Instance, config: SolverConfig | None = None) -> SolveResult:
    """Maximize the Expected Total Gain of an M-night schedule.

    Runs to proven optimality unless ``config`` sets a time or node limit; on
    a limit the best schedule found so far is returned with
    ``proven_optimal=False``.
    """
    return _Search(instance, config or SolverConfig()).run()
