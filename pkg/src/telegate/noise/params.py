"""Noise parameters shared by the physical and the qubit-level engines."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..protocols.optics import IDEAL_PPBS

P2_MAX = 0.2


class NoiseError(ValueError):
    """Invalid noise parameters."""


def _as_ports(ports) -> tuple[tuple[float, float], tuple[float, float]]:
    try:
        (a_h, a_v), (b_h, b_v) = ports
    except (TypeError, ValueError):
        raise NoiseError("ppbs_ports must be two (T_H, T_V) pairs") from None
    return (float(a_h), float(a_v)), (float(b_h), float(b_v))


@dataclass(frozen=True)
class NoiseParams:
    """Imperfections of one experimental run.

    ``p2`` is the probability that a source emits an extra pair in a pulse,
    ``overlap`` the internal-mode overlap V between photons of different
    sources, ``pair_overlaps`` overrides V for single source pairs,
    ``ppbs_ports`` the (T_H, T_V) transmissions of the two inputs of the
    cluster PPBS and ``phase_drift`` the standard deviation (radians) of the
    slowly drifting phase in front of each Bell analyzer.
    """

    p2: float = 0.0
    overlap: float = 1.0
    ppbs_ports: tuple = IDEAL_PPBS
    phase_drift: float = 0.0
    pair_overlaps: tuple = field(default=())

    def __post_init__(self):
        if not 0.0 <= self.p2 <= P2_MAX:
            raise NoiseError(f"p2 must lie in [0, {P2_MAX}], got {self.p2}")
        if not 0.0 <= self.overlap <= 1.0:
            raise NoiseError(f"overlap must lie in [0, 1], got {self.overlap}")
        ports = _as_ports(self.ppbs_ports)
        for t in (*ports[0], *ports[1]):
            if not 0.0 <= t <= 1.0:
                raise NoiseError(f"PPBS transmission {t} outside [0, 1]")
        if self.phase_drift < 0:
            raise NoiseError("phase_drift must be non-negative")
        pairs = []
        for item in self.pair_overlaps:
            (a, b), v = item
            if not 0.0 <= v <= 1.0:
                raise NoiseError(f"overlap of {a}/{b} must lie in [0, 1], got {v}")
            pairs.append(((str(a), str(b)), float(v)))
        object.__setattr__(self, "ppbs_ports", ports)
        object.__setattr__(self, "pair_overlaps", tuple(pairs))

    @property
    def is_ideal(self) -> bool:
        return self == NoiseParams()

    def replace(self, **changes) -> "NoiseParams":
        data = asdict(self)
        data.update(changes)
        return NoiseParams(**data)

    def to_dict(self) -> dict:
        return {
            "p2": self.p2,
            "overlap": self.overlap,
            "ppbs_ports": [list(p) for p in self.ppbs_ports],
            "phase_drift": self.phase_drift,
            "pair_overlaps": [[a, b, v] for (a, b), v in self.pair_overlaps],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseParams":
        data = dict(data)
        if "pair_overlaps" in data:
            data["pair_overlaps"] = tuple(((a, b), v) for a, b, v in data["pair_overlaps"])
        if "ppbs_ports" in data:
            data["ppbs_ports"] = _as_ports(data["ppbs_ports"])
        return cls(**data)


IDEAL = NoiseParams()
