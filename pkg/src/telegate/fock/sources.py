"""Photon-pair sources and partial distinguishability between them.

Each source emits photons in its own internal wavepacket.  Overlaps between
sources are given as intensity visibilities ``V``; the amplitude overlap of
the wavepackets is ``sqrt(V)``.  Internal vectors are obtained from the Gram
matrix of amplitude overlaps, so the first source always occupies internal
mode 0 and fully indistinguishable sources share it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from ..qubit import bell_vector, single_qubit
from . import kernel
from .modes import POLARIZATIONS, ModeId, ModeRegistry
from .state import FockError, FockState

GRAM_TOL = 1e-12


@dataclass(frozen=True)
class PairSource:
    """Two photons on ``paths`` with joint polarization amplitudes ``c[p, q]``."""

    name: str
    paths: tuple[str, str]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.amplitudes, dtype=complex).reshape(2, 2)
        n = np.linalg.norm(c)
        if abs(n - 1) > 1e-10:
            raise FockError(f"source {self.name} amplitudes not normalized (norm {n})")
        c.setflags(write=False)
        object.__setattr__(self, "amplitudes", c)
        object.__setattr__(self, "paths", tuple(self.paths))

    @classmethod
    def entangled(cls, name: str, paths, kind: str = "Phi+") -> "PairSource":
        return cls(name, tuple(paths), bell_vector(kind).reshape(2, 2))

    @classmethod
    def product(cls, name: str, paths, pol_a="+", pol_b="+") -> "PairSource":
        a = single_qubit(pol_a) if isinstance(pol_a, str) else np.asarray(pol_a, complex)
        b = single_qubit(pol_b) if isinstance(pol_b, str) else np.asarray(pol_b, complex)
        a = a / np.linalg.norm(a)
        b = b / np.linalg.norm(b)
        return cls(name, tuple(paths), np.outer(a, b))


def gram_vectors(gram: np.ndarray) -> np.ndarray:
    """Rows ``v_s`` with ``<v_s|v_t> = gram[s, t]`` (Cholesky, zero pivots allowed)."""
    g = np.array(gram, dtype=float)
    n = len(g)
    if not np.allclose(g, g.T) or np.any(np.abs(np.diag(g) - 1) > GRAM_TOL):
        raise FockError("overlap matrix must be symmetric with unit diagonal")
    low = np.zeros((n, n))
    for j in range(n):
        d = g[j, j] - low[j, :j] @ low[j, :j]
        if d < -1e-9:
            raise FockError("pairwise overlaps are not realizable by wavepackets")
        low[j, j] = np.sqrt(max(d, 0.0))
        for i in range(j + 1, n):
            s = g[i, j] - low[i, :j] @ low[j, :j]
            if low[j, j] > GRAM_TOL:
                low[i, j] = s / low[j, j]
            elif abs(s) > 1e-9:
                raise FockError("pairwise overlaps are not realizable by wavepackets")
    keep = [j for j in range(n) if np.any(np.abs(low[:, j]) > GRAM_TOL)]
    return low[:, keep] if keep else low[:, :1]


@dataclass(frozen=True)
class SourceConfig:
    """Sources plus pairwise intensity overlaps (default fully indistinguishable)."""

    sources: tuple[PairSource, ...]
    overlaps: Mapping[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        names = [s.name for s in self.sources]
        if len(set(names)) != len(names):
            raise FockError(f"duplicate source names {names}")
        clean = {}
        for (a, b), v in dict(self.overlaps).items():
            _check_overlap(v)
            if a not in names or b not in names:
                raise FockError(f"unknown source in overlap pair ({a}, {b})")
            clean[tuple(sorted((a, b)))] = float(v)
        object.__setattr__(self, "overlaps", clean)

    def overlap(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        return self.overlaps.get(tuple(sorted((a, b))), 1.0)

    def gram(self) -> np.ndarray:
        names = [s.name for s in self.sources]
        return np.array([[np.sqrt(self.overlap(a, b)) for b in names] for a in names])

    def internal_vectors(self) -> dict[str, np.ndarray]:
        vecs = gram_vectors(self.gram())
        return {s.name: vecs[i] for i, s in enumerate(self.sources)}

    @property
    def paths(self) -> tuple[str, ...]:
        return tuple(p for s in self.sources for p in s.paths)


def _check_overlap(v: float) -> None:
    if not 0.0 <= v <= 1.0:
        raise FockError(f"overlap V must lie in [0, 1], got {v}")


def set_internal_overlap(config: SourceConfig, pair: tuple[str, str], v: float) -> SourceConfig:
    """Return ``config`` with the visibility between two sources set to ``v``."""
    _check_overlap(v)
    new = dict(config.overlaps)
    new[tuple(sorted(pair))] = v
    return replace(config, overlaps=new)


def uniform_overlap(sources: Sequence[PairSource], v: float) -> SourceConfig:
    """Every pair of distinct sources has visibility ``v``."""
    _check_overlap(v)
    names = [s.name for s in sources]
    pairs = {(a, b): v for i, a in enumerate(names) for b in names[i + 1:]}
    return SourceConfig(tuple(sources), pairs)


def pair_polynomial(registry: ModeRegistry, source: PairSource, vec: np.ndarray) -> FockState:
    """Creation operator of one pair, photons in internal wavepacket ``vec``."""
    a, b = source.paths
    terms = []
    for p, pa in enumerate(POLARIZATIONS):
        for q, pb in enumerate(POLARIZATIONS):
            c = source.amplitudes[p, q]
            if c == 0:
                continue
            for i, vi in enumerate(vec):
                for j, vj in enumerate(vec):
                    w = c * vi * vj
                    if w != 0:
                        terms.append((w, [ModeId(a, pa, i), ModeId(b, pb, j)]))
    return FockState.from_terms(registry, terms)


def emission_state(
    config: SourceConfig, pairs: Sequence[int] | None = None, registry: ModeRegistry | None = None
) -> FockState:
    """Normalized state with ``pairs[s]`` pairs from source ``s`` (default one each).

    ``n`` pairs from one source are ``(pair operator)^n``, normalized
    numerically; the stimulated-emission weighting is not modeled.
    """
    pairs = [1] * len(config.sources) if pairs is None else list(pairs)
    if len(pairs) != len(config.sources):
        raise FockError("one pair count per source required")
    if 2 * sum(pairs) > kernel.MAX_PHOTONS:
        raise OverflowError(f"{2 * sum(pairs)} photons exceed the engine capacity")
    vecs = config.internal_vectors()
    width = max(len(v) for v in vecs.values())
    if registry is None:
        registry = ModeRegistry(tuple(dict.fromkeys(config.paths)), width)
    elif registry.internal < width:
        raise FockError("registry has too few internal modes for these overlaps")
    state = FockState.vacuum(registry)
    for src, n in zip(config.sources, pairs):
        if n == 0:
            continue
        op = pair_polynomial(registry, src, vecs[src.name])
        block = FockState.vacuum(registry)
        for _ in range(n):
            block = block.tensor(op)
        state = state.tensor(block.normalized())
    return state.normalized()
