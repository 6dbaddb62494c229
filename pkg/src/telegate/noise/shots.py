"""Reproducible Monte Carlo coincidence counting.

Shots are cut into fixed blocks.  Block ``b`` draws from its own generator
seeded by ``SeedSequence(seed, spawn_key=(b,))``, so the counts depend only
on ``(seed, shots)`` and never on how many workers process the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence, Union

import numpy as np

BLOCK = 8192
PROB_TOL = 1e-9
REJECTED = "rejected"

# an integer seed, or a sequence of integers naming an independent stream
Seed = Union[int, Sequence[int]]


def block_rng(seed: Seed, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _check_probs(probs) -> np.ndarray:
    p = np.asarray(probs, float)
    if p.ndim != 1 or not len(p):
        raise ValueError("need a non-empty probability vector")
    if (p < -PROB_TOL).any():
        raise ValueError("negative probability")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if abs(total - 1.0) > PROB_TOL:
        raise ValueError(f"probabilities sum to {total}, not 1")
    return p / total


def sample_categorical(
    probs, shots: int, seed: Seed, workers: int = 1, block: int = BLOCK
) -> np.ndarray:
    """Multinomial counts of ``shots`` draws, identical for any ``workers``."""
    if shots < 0:
        raise ValueError("shots must be non-negative")
    if seed is None:
        raise ValueError("a seed is required")
    p = _check_probs(probs)
    sizes = [min(block, shots - s) for s in range(0, shots, block)]

    def draw(b):
        return block_rng(seed, b).multinomial(sizes[b], p)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(draw, range(len(sizes))))
    else:
        parts = [draw(b) for b in range(len(sizes))]
    return np.sum(parts, axis=0, dtype=np.int64) if parts else np.zeros(len(p), np.int64)


def binomial_sd(k: int, n: int) -> float:
    """Standard deviation of the estimate ``k / n``."""
    if n <= 0:
        return math.nan
    f = k / n
    return math.sqrt(f * (1.0 - f) / n)


@dataclass(frozen=True)
class ShotResult:
    """Counts of accepted (coincidence) outcomes out of ``shots`` trials."""

    counts: dict[Hashable, int]
    shots: int
    seed: Seed
    rejected: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def accepted(self) -> int:
        return int(sum(self.counts.values()))

    @property
    def zero_acceptance(self) -> bool:
        return self.accepted == 0

    @property
    def acceptance(self) -> float:
        return self.accepted / self.shots if self.shots else math.nan

    @property
    def acceptance_sd(self) -> float:
        return binomial_sd(self.accepted, self.shots)

    def frequency(self, key) -> float:
        """Frequency of ``key`` among the accepted shots."""
        return self.counts.get(key, 0) / self.accepted if self.accepted else math.nan

    def frequency_sd(self, key) -> float:
        return binomial_sd(self.counts.get(key, 0), self.accepted)

    def frequencies(self) -> dict:
        return {k: self.frequency(k) for k in self.counts}


def run_shots(
    probabilities: Mapping[Hashable, float],
    shots: int,
    seed: Seed,
    workers: int = 1,
) -> ShotResult:
    """Sample accepted outcomes with the given joint probabilities.

    The probabilities may sum to less than one; the remainder is the chance
    that a trial produces no accepted coincidence.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    keys = list(probabilities)
    if REJECTED in keys:
        raise ValueError(f"{REJECTED!r} is reserved")
    p = np.array([max(float(probabilities[k]), 0.0) for k in keys])
    rest = 1.0 - p.sum()
    if rest < -PROB_TOL:
        raise ValueError(f"accepted probabilities sum to {p.sum()} > 1")
    counts = sample_categorical(np.append(p, max(rest, 0.0)), shots, seed, workers)
    return ShotResult(
        {k: int(c) for k, c in zip(keys, counts[:-1])}, shots, seed, int(counts[-1])
    )
