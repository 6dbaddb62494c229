"""Linear optical elements as unitary maps on (path, polarization) slots.

Every element reports the slots it touches and a unitary ``U`` with the
convention ``a_i^dag -> sum_j U[j, i] a_j^dag``; it acts identically on
every internal (distinguishability) index.  Beamsplitter reflections carry a
factor ``i``; a PBS transmits H and reflects V with factor ``i`` on both
ports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

UNITARY_TOL = 1e-10


def hwp(angle_deg: float) -> np.ndarray:
    t = np.deg2rad(2 * angle_deg)
    return np.array([[np.cos(t), np.sin(t)], [np.sin(t), -np.cos(t)]], dtype=complex)


def qwp(angle_deg: float) -> np.ndarray:
    t = np.deg2rad(angle_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array(
        [[c * c + 1j * s * s, (1 - 1j) * s * c], [(1 - 1j) * s * c, s * s + 1j * c * c]],
        dtype=complex,
    )


def phase_plate(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)]).astype(complex)


def beamsplitter(transmission: float) -> np.ndarray:
    if not 0.0 <= transmission <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {transmission}")
    t = np.sqrt(transmission)
    r = 1j * np.sqrt(1.0 - transmission)
    return np.array([[t, r], [r, t]], dtype=complex)


@dataclass(frozen=True)
class OpticalElement:
    """Base class; subclasses define ``slots`` and ``matrix``."""

    def paths(self) -> tuple[str, ...]:
        raise NotImplementedError

    def aux_paths(self) -> tuple[str, ...]:
        """Extra vacuum/loss paths the element needs registered."""
        return ()

    def slots(self) -> list[tuple[str, str]]:
        raise NotImplementedError

    def matrix(self) -> np.ndarray:
        raise NotImplementedError

    def check_unitary(self) -> None:
        u = self.matrix()
        err = np.abs(u.conj().T @ u - np.eye(len(u))).max()
        if err > UNITARY_TOL:
            raise ValueError(f"{self!r} is not unitary (error {err:.2e})")


@dataclass(frozen=True)
class _PolarizationElement(OpticalElement):
    path: str

    def paths(self):
        return (self.path,)

    def slots(self):
        return [(self.path, "H"), (self.path, "V")]

    def jones(self) -> np.ndarray:
        raise NotImplementedError

    def matrix(self):
        return self.jones()


@dataclass(frozen=True)
class HWP(_PolarizationElement):
    angle: float = 0.0

    def jones(self):
        return hwp(self.angle)


@dataclass(frozen=True)
class QWP(_PolarizationElement):
    angle: float = 0.0

    def jones(self):
        return qwp(self.angle)


@dataclass(frozen=True)
class Phase(_PolarizationElement):
    """Relative phase ``phi`` (radians) on the V component."""

    phi: float = 0.0

    def jones(self):
        return phase_plate(self.phi)


@dataclass(frozen=True)
class PathPhase(_PolarizationElement):
    """Phase ``phi`` (radians) on the whole path, both polarizations."""

    phi: float = 0.0

    def jones(self):
        return np.exp(1j * self.phi) * np.eye(2, dtype=complex)


@dataclass(frozen=True)
class Jones(_PolarizationElement):
    """Arbitrary 2x2 polarization unitary; composite of wave plates."""

    u: tuple = ((1, 0), (0, 1))

    def jones(self):
        return np.array(self.u, dtype=complex)


@dataclass(frozen=True)
class PBS(OpticalElement):
    a: str
    b: str

    def paths(self):
        return (self.a, self.b)

    def slots(self):
        return [(self.a, "H"), (self.b, "H"), (self.a, "V"), (self.b, "V")]

    def matrix(self):
        u = np.zeros((4, 4), dtype=complex)
        u[0, 0] = u[1, 1] = 1
        u[3, 2] = u[2, 3] = 1j
        return u


@dataclass(frozen=True)
class SwapPaths(OpticalElement):
    a: str
    b: str

    def paths(self):
        return (self.a, self.b)

    def slots(self):
        return [(self.a, "H"), (self.b, "H"), (self.a, "V"), (self.b, "V")]

    def matrix(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        return np.kron(np.eye(2), x)


@dataclass(frozen=True)
class PPBS(OpticalElement):
    """Partially polarizing beamsplitter between paths ``a`` and ``b``.

    Light entering ``a`` (``b``) is transmitted into ``a`` (``b``) with
    intensity ``T_H``/``T_V`` and reflected into the other path with factor
    ``i``.  ``port_b`` optionally gives different transmissions for light
    entering ``b``; a lossless splitter cannot do that, so the element then
    becomes a splitter with the larger transmission preceded by an attenuator
    on the weaker input, coupling to the auxiliary loss path ``"<path>~loss"``.
    """

    a: str
    b: str
    t_h: float = 1.0
    t_v: float = 1.0 / 3.0
    port_b: tuple[float, float] | None = None

    def __post_init__(self):
        vals = [self.t_h, self.t_v] + list(self.port_b or ())
        for t in vals:
            if not 0.0 <= t <= 1.0:
                raise ValueError(f"PPBS transmission {t} outside [0, 1]")

    def paths(self):
        return (self.a, self.b)

    @property
    def lossy(self) -> bool:
        return self.port_b is not None and tuple(self.port_b) != (self.t_h, self.t_v)

    def aux_paths(self):
        return (f"{self.a}~loss", f"{self.b}~loss") if self.lossy else ()

    def slots(self):
        s = [(self.a, "H"), (self.b, "H"), (self.a, "V"), (self.b, "V")]
        if self.lossy:
            la, lb = self.aux_paths()
            s += [(la, "H"), (lb, "H"), (la, "V"), (lb, "V")]
        return s

    def matrix(self):
        if not self.lossy:
            return _block_diag(beamsplitter(self.t_h), beamsplitter(self.t_v))
        tb = self.port_b
        u = np.zeros((8, 8), dtype=complex)
        for k, (ta, tb_) in enumerate(((self.t_h, tb[0]), (self.t_v, tb[1]))):
            t = max(ta, tb_)
            bs = beamsplitter(t)
            # attenuator per input on (path, loss) then splitter on (a, b)
            att = np.eye(4, dtype=complex)  # order: a, b, loss_a, loss_b
            for port, tp in ((0, ta), (1, tb_)):
                eta = tp / t if t > 0 else 1.0
                att[port, port] = np.sqrt(eta)
                att[port + 2, port] = 1j * np.sqrt(1 - eta)
                att[port, port + 2] = 1j * np.sqrt(1 - eta)
                att[port + 2, port + 2] = np.sqrt(eta)
            split = np.eye(4, dtype=complex)
            split[:2, :2] = bs
            blk = split @ att
            idx = [2 * k, 2 * k + 1, 4 + 2 * k, 4 + 2 * k + 1]
            u[np.ix_(idx, idx)] = blk
        return u


def _block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # slots ordered (a,H), (b,H), (a,V), (b,V)
    u = np.zeros((4, 4), dtype=complex)
    u[:2, :2] = a
    u[2:, 2:] = b
    return u


def polarization_preparation(target: Sequence[complex]) -> tuple[HWP, QWP]:
    """Angles of a HWP followed by a QWP mapping ``|H>`` onto ``target``.

    Returned elements carry an empty path; use ``dataclasses.replace`` or
    :func:`prepare_plates` to place them.  The target is matched up to a
    global phase.
    """
    h, q = _plate_angles(np.asarray(target, dtype=complex))
    return HWP("", h), QWP("", q)


def prepare_plates(path: str, target: Sequence[complex]) -> list[OpticalElement]:
    h, q = _plate_angles(np.asarray(target, dtype=complex))
    return [HWP(path, h), QWP(path, q)]


def _plate_angles(target: np.ndarray) -> tuple[float, float]:
    target = target / np.linalg.norm(target)
    a, b = target
    # Stokes parameters of the target
    s1 = abs(a) ** 2 - abs(b) ** 2
    s2 = 2 * (a.conjugate() * b).real
    s3 = 2 * (a.conjugate() * b).imag
    psi = 0.5 * np.arctan2(s2, s1)
    chi = 0.5 * np.arctan2(s3, np.hypot(s1, s2))
    best = None
    for sign in (1, -1):
        qa = np.rad2deg(psi)
        ha = np.rad2deg(psi + sign * chi) / 2
        out = qwp(qa) @ hwp(ha) @ np.array([1, 0], dtype=complex)
        err = 1 - abs(np.vdot(target, out)) ** 2
        if best is None or err < best[0]:
            best = (err, ha, qa)
    if best[0] > 1e-12:
        raise ArithmeticError(f"wave-plate solution failed (infidelity {best[0]:.2e})")
    return float(best[1]), float(best[2])
