"""Higher-order emission of the photon-pair sources.

Per pulse every source independently emits its nominal pair and, with
probability ``p2``, one additional pair into the same modes.  Exact
evaluation enumerates the configurations up to a total photon budget; the
weight of the excluded ones is reported so callers can see the truncation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_PHOTONS = 8


@dataclass(frozen=True)
class EmissionConfig:
    pairs: tuple[int, ...]
    weight: float

    @property
    def photons(self) -> int:
        return 2 * sum(self.pairs)


def _n_sources(sources) -> int:
    return sources if isinstance(sources, int) else len(sources)


def emission_configs(
    sources: int | Sequence, p2: float, max_photons: int = MAX_PHOTONS
) -> tuple[list[EmissionConfig], float]:
    """Configurations within the photon budget, renormalized, and the
    probability mass that was excluded."""
    n = _n_sources(sources)
    if not 0.0 <= p2 <= 1.0:
        raise ValueError(f"p2 must lie in [0, 1], got {p2}")
    kept, dropped = [], 0.0
    for extra in itertools.product((0, 1), repeat=n):
        w = float(np.prod([p2 if e else 1.0 - p2 for e in extra]))
        if w == 0.0:
            continue
        pairs = tuple(1 + e for e in extra)
        if 2 * sum(pairs) > max_photons:
            dropped += w
            continue
        kept.append(EmissionConfig(pairs, w))
    total = sum(c.weight for c in kept)
    return [EmissionConfig(c.pairs, c.weight / total) for c in kept], dropped


def sample_emission(sources: int | Sequence, p2: float, rng: np.random.Generator) -> tuple[int, ...]:
    """Draw the number of pairs emitted by each source in one pulse."""
    if not 0.0 <= p2 <= 1.0:
        raise ValueError(f"p2 must lie in [0, 1], got {p2}")
    extra = rng.random(_n_sources(sources)) < p2
    return tuple(int(1 + e) for e in extra)
