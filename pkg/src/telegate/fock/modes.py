from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .kernel import MAX_MODES

POLARIZATIONS = ("H", "V")
DEFAULT_INTERNAL = 3


class ModeId(NamedTuple):
    path: str
    pol: str
    internal: int = 0


class UnknownPathError(KeyError):
    pass


@dataclass(frozen=True)
class ModeRegistry:
    """Stable mapping between ``ModeId`` triples and integer mode indices.

    Each registered path owns ``2 * internal`` consecutive indices.  Extending
    a registry only appends paths, so indices of existing modes never change
    and states built on the smaller registry stay valid.
    """

    paths: tuple[str, ...]
    internal: int = DEFAULT_INTERNAL

    def __post_init__(self):
        paths = tuple(str(p) for p in self.paths)
        if len(set(paths)) != len(paths):
            raise ValueError(f"duplicate paths in registry: {paths}")
        if self.internal < 1:
            raise ValueError("need at least one internal mode")
        if len(paths) * 2 * self.internal > MAX_MODES:
            raise ValueError(
                f"{len(paths)} paths x {2 * self.internal} modes exceed {MAX_MODES} modes"
            )
        object.__setattr__(self, "paths", paths)

    @property
    def n_modes(self) -> int:
        return len(self.paths) * 2 * self.internal

    def __contains__(self, path) -> bool:
        return path in self.paths

    def path_index(self, path: str) -> int:
        try:
            return self.paths.index(path)
        except ValueError:
            raise UnknownPathError(f"path {path!r} is not registered") from None

    def index(self, mode: ModeId | tuple) -> int:
        mode = ModeId(*mode)
        if mode.pol not in POLARIZATIONS:
            raise ValueError(f"polarization must be H or V, got {mode.pol!r}")
        if not 0 <= mode.internal < self.internal:
            raise ValueError(
                f"internal index {mode.internal} outside [0, {self.internal})"
            )
        p = self.path_index(mode.path)
        return (p * 2 + POLARIZATIONS.index(mode.pol)) * self.internal + mode.internal

    def mode(self, index: int) -> ModeId:
        k = self.internal
        p, rest = divmod(index, 2 * k)
        pol, internal = divmod(rest, k)
        return ModeId(self.paths[p], POLARIZATIONS[pol], internal)

    def slot(self, index: int) -> int:
        """Index of the (path, polarization) slot of a mode, ignoring internal."""
        return index // self.internal

    def slot_index(self, path: str, pol: str) -> int:
        return self.path_index(path) * 2 + POLARIZATIONS.index(pol)

    def path_modes(self, path: str) -> list[int]:
        p = self.path_index(path)
        return list(range(p * 2 * self.internal, (p + 1) * 2 * self.internal))

    def extend(self, paths: Iterable[str]) -> "ModeRegistry":
        new = [p for p in paths if p not in self.paths]
        if not new:
            return self
        return ModeRegistry(self.paths + tuple(dict.fromkeys(new)), self.internal)
