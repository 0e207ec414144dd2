"""Seeded random instances.

Every draw comes from ``numpy.random.Generator(PCG64(seed))``. Draw order per
instance:

1. for each observation ``j = 1..S``: ``(release, deadline)`` pairs drawn
   uniformly on ``{0..len_night}`` until ``release < deadline``; then
   ``processing`` on ``{1..deadline-release}``; then ``gain`` on
   ``{1..max_gain}``. Integers use ``Generator.integers(lo, hi, endpoint=True)``.
2. the probability block: ``M + 1`` values from ``Generator.random()`` for the
   uniform-normalized model, or a single ``Generator.random()`` for the
   per-night clear probability of the binomial model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .model import Instance, Observation

ProbabilityModel = Literal["uniform_normalized", "binomial"]


@dataclass(frozen=True)
class GenParams:
    nights: int
    observations: int
    len_night: int
    max_gain: int
    seed: int
    probability_model: ProbabilityModel = "uniform_normalized"
    p_clear: float | None = None  # fixes the binomial parameter instead of drawing it

    def __post_init__(self) -> None:
        if self.nights < 1 or self.observations < 1 or self.len_night < 1 or self.max_gain < 1:
            raise ValueError("nights, observations, len_night and max_gain must all be >= 1")
        if self.probability_model not in ("uniform_normalized", "binomial"):
            raise ValueError(f"unknown probability model {self.probability_model!r}")
        if self.p_clear is not None and not 0.0 <= self.p_clear <= 1.0:
            raise ValueError("p_clear must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {"nights": self.nights, "observations": self.observations,
                "len_night": self.len_night, "max_gain": self.max_gain, "seed": self.seed,
                "probability_model": self.probability_model, "p_clear": self.p_clear}


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(master_seed: int, index: int) -> int:
    """Independent 63-bit child seed for the ``index``-th instance of a campaign."""
    state = np.random.SeedSequence([master_seed, index]).generate_state(1, dtype=np.uint64)[0]
    return int(state) >> 1


def binomial_pi(m: int, p_clear: float) -> tuple[float, ...]:
    """P(exactly k of m independent nights are clear), k = 0..m."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if not 0.0 <= p_clear <= 1.0:
        raise ValueError("p_clear must lie in [0, 1]")
    return tuple(math.comb(m, k) * p_clear ** k * (1.0 - p_clear) ** (m - k)
                 for k in range(m + 1))


def generate_probabilities_uniform(nights: int, rng: np.random.Generator) -> tuple[float, ...]:
    if nights < 1:
        raise ValueError("nights must be >= 1")
    while True:
        q = [float(rng.random()) for _ in range(nights + 1)]
        total = sum(q)
        if total > 0.0:
            break
    pi = [x / total for x in q]
    # pi_0 absorbs the rounding error so the vector sums to 1.
    pi[0] = max(0.0, 1.0 - math.fsum(pi[1:]))
    return tuple(pi)


def generate_probabilities_binomial(nights: int, rng: np.random.Generator,
                                    p_clear: float | None = None
                                    ) -> tuple[tuple[float, ...], float]:
    if nights < 1:
        raise ValueError("nights must be >= 1")
    if p_clear is None:
        p_clear = float(rng.random())
    return binomial_pi(nights, p_clear), p_clear


def observation_id(j: int, count: int) -> str:
    return f"o{j:0{len(str(count))}d}"


def generate_observations(count: int, len_night: int, max_gain: int,
                          rng: np.random.Generator) -> tuple[Observation, ...]:
    out = []
    for j in range(1, count + 1):
        while True:
            release = int(rng.integers(0, len_night, endpoint=True))
            deadline = int(rng.integers(0, len_night, endpoint=True))
            if release < deadline:
                break
        processing = int(rng.integers(1, deadline - release, endpoint=True))
        gain = int(rng.integers(1, max_gain, endpoint=True))
        out.append(Observation(observation_id(j, count), release, deadline, processing, gain))
    return tuple(out)


def generate_instance(params: GenParams) -> Instance:
    rng = make_rng(params.seed)
    observations = generate_observations(params.observations, params.len_night,
                                         params.max_gain, rng)
    if params.probability_model == "binomial":
        pi, p_clear = generate_probabilities_binomial(params.nights, rng, params.p_clear)
        return Instance(params.nights, observations, pi, p_clear)
    return Instance(params.nights, observations, generate_probabilities_uniform(params.nights, rng))
