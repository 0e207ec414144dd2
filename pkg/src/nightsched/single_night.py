"""One-night subproblem: pick and sequence a maximum-gain feasible subset.

Sequencing uses an earliest-finish dynamic program over subsets: the earliest
time a set ``T`` can be completed is the minimum, over the observation ``j``
placed last, of ``max(finish(T - j), r_j) + p_j`` subject to completing by
``d_j``. Finishing a prefix earlier never hurts, so the recursion is exact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import NightPlan, Observation, PlacedObservation

_NEG = -(1 << 62)
_INF = 1 << 62


def edf_order(observations: Iterable[Observation]) -> list[Observation]:
    return sorted(observations, key=lambda o: (o.deadline, o.release, o.id))


def plan_key(gain: int, ids: Sequence[str]) -> tuple:
    """Ordering of one-night plans: higher gain, then fewer, then smaller ids."""
    return (-gain, len(ids), tuple(sorted(ids)))


class Sequencer:
    """Memoized earliest-finish times for subsets of a fixed observation list.

    Subsets are bitmasks over ``observations`` in the order given.
    """

    def __init__(self, observations: Sequence[Observation]):
        self.observations = list(observations)
        self._finish: dict[int, int] = {0: _NEG}
        self._last: dict[int, int] = {}

    def finish(self, mask: int) -> int:
        """Earliest completion of all of ``mask``; ``_INF`` when infeasible."""
        cached = self._finish.get(mask)
        if cached is not None:
            return cached
        best = _INF
        best_j = -1
        bits = mask
        # Scan from the highest bit so ties keep the later EDF position last.
        while bits:
            j = bits.bit_length() - 1
            bits ^= 1 << j
            before = self.finish(mask ^ (1 << j))
            if before >= _INF:
                continue
            obs = self.observations[j]
            end = max(before, obs.release) + obs.processing
            if end <= obs.deadline and end < best:
                best, best_j = end, j
        self._finish[mask] = best
        if best_j >= 0:
            self._last[mask] = best_j
        return best

    def feasible(self, mask: int) -> bool:
        return self.finish(mask) < _INF

    def plan(self, mask: int) -> NightPlan | None:
        if not self.feasible(mask):
            return None
        order = []
        while mask:
            j = self._last[mask]
            order.append(j)
            mask ^= 1 << j
        order.reverse()
        placements = []
        t = _NEG
        for j in order:
            obs = self.observations[j]
            start = max(t, obs.release)
            placements.append(PlacedObservation(obs.id, start))
            t = start + obs.processing
        return NightPlan(tuple(placements))


def sequence_feasible(subset: Iterable[Observation]) -> NightPlan | None:
    """Place every observation of ``subset`` in one night, or return None."""
    ordered = edf_order(subset)
    if not ordered:
        return NightPlan()
    seq = Sequencer(ordered)
    return seq.plan((1 << len(ordered)) - 1)


@dataclass
class SubsetEnumeration:
    masks: list[int]
    gains: list[int]
    complete: bool
    evaluations: int


def enumerate_feasible_subsets(sequencer: Sequencer, max_size: int | None = None,
                               deadline: float | None = None) -> SubsetEnumeration:
    """All nonempty subsets that fit in one night.

    Feasibility is closed under taking subsets, so a depth-first extension
    that only grows feasible sets reaches every feasible set. ``max_size``
    skips candidate sets larger than a known cardinality bound before the
    sequencing check runs.
    """
    obs = sequencer.observations
    n = len(obs)
    masks: list[int] = []
    gains: list[int] = []
    evaluations = 0
    complete = True

    stack = [(0, -1, 0, 0)]
    while stack:
        mask, last, size, gain = stack.pop()
        for j in range(n - 1, last, -1):
            if max_size is not None and size + 1 > max_size:
                break
            new = mask | (1 << j)
            evaluations += 1
            if sequencer.finish(new) >= _INF:
                continue
            masks.append(new)
            gains.append(gain + obs[j].gain)
            stack.append((new, j, size + 1, gain + obs[j].gain))
        if deadline is not None and time.perf_counter() > deadline:
            complete = not stack
            break
    return SubsetEnumeration(masks, gains, complete, evaluations)


def best_single_night(pool: Iterable[Observation]) -> NightPlan:
    """Maximum-gain plan for one night over ``pool``.

    Ties go to fewer observations, then to the smallest sorted id sequence.
    """
    ordered = sorted(pool, key=lambda o: o.id)
    if not ordered:
        return NightPlan()
    seq = Sequencer(edf_order(ordered))
    bit = {o.id: 1 << k for k, o in enumerate(seq.observations)}
    n = len(ordered)
    suffix = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + ordered[k].gain

    best_key = plan_key(0, ())
    best_mask = 0

    def extend(k: int, mask: int, ids: list[str], gain: int) -> None:
        nonlocal best_key, best_mask
        for t in range(k, n):
            if gain + suffix[t] < -best_key[0]:
                return
            o = ordered[t]
            new = mask | bit[o.id]
            if not seq.feasible(new):
                continue
            ids.append(o.id)
            key = plan_key(gain + o.gain, ids)
            if key < best_key:
                best_key, best_mask = key, new
            extend(t + 1, new, ids, gain + o.gain)
            ids.pop()

    extend(0, 0, [], 0)
    return seq.plan(best_mask)
