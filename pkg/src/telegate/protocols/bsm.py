"""Bell-state measurements as sets of effects on two qubits.

``complete`` resolves all four Bell states.  ``partial`` mimics the
polarizing-beamsplitter analyzer: only ``Phi+-`` are identified and both
``Psi`` states end in a heralded failure.  The single-photon analyzer for a
polarization qubit and a rail qubit of the same photon is derived from its
optical network rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from ..fock.elements import HWP, PBS, Phase
from ..fock.modes import ModeRegistry
from ..fock.state import slot_matrix
from ..qubit import BELL_KINDS, DensityOp, PureState, RegisterError, bell_vector
from .corrections import FAIL

MODES = ("complete", "partial")

# photon -> (polarization qubit, rail qubit) in the C-Phase layout
DUAL_PHOTONS = {"3": ("1", "3"), "5": ("2", "5")}


def bell_projector(kind: str) -> np.ndarray:
    v = bell_vector(kind)
    return np.outer(v, v.conj())


def bsm_effects(mode: str = "complete", dephasing: float = 0.0) -> dict[str, np.ndarray]:
    """Effects of a Bell measurement on an ordered qubit pair.

    ``dephasing`` is the standard deviation (radians) of a Gaussian phase on
    the first qubit before the analyzer; averaging damps the coherences
    between the ``|H>`` and ``|V>`` components of that qubit.
    """
    if mode not in MODES:
        raise ValueError(f"BSM mode must be one of {MODES}, got {mode!r}")
    if dephasing < 0:
        raise ValueError("dephasing must be non-negative")
    effects = {k: bell_projector(k) for k in BELL_KINDS}
    if dephasing:
        bit = np.array([0, 0, 1, 1])
        damp = np.exp(-0.5 * dephasing**2 * (bit[:, None] - bit[None, :]) ** 2)
        effects = {k: e * damp for k, e in effects.items()}
    if mode == "partial":
        effects = {
            "Phi+": effects["Phi+"],
            "Phi-": effects["Phi-"],
            FAIL: effects["Psi+"] + effects["Psi-"],
        }
    return effects


def measure_effect(rho: np.ndarray, register: Sequence[str], labels: Sequence[str], effect: np.ndarray):
    """Unnormalized ``Tr_labels[(E (x) I) rho]`` and the remaining register."""
    register = tuple(register)
    labels = tuple(labels)
    missing = set(labels) - set(register)
    if missing:
        raise RegisterError(f"labels {sorted(missing)} not in register {register}")
    rest = tuple(q for q in register if q not in labels)
    n = len(register)
    perm = [register.index(q) for q in labels + rest]
    t = rho.reshape((2,) * (2 * n)).transpose(perm + [p + n for p in perm])
    dl, dr = 2 ** len(labels), 2 ** len(rest)
    t = t.reshape(dl, dr, dl, dr)
    return np.einsum("ij,jaib->ab", effect, t), rest


@dataclass(frozen=True)
class BsmResult:
    outcome: str
    probability: float
    state: DensityOp | PureState | None


def _as_matrix(state) -> np.ndarray:
    return state.density().matrix


def bsm_two_photon(state, a: str, b: str, mode: str = "complete") -> list[BsmResult]:
    """Enumerate the outcomes of a Bell measurement on qubits ``a`` and ``b``.

    Collapsed states are returned as pure states when the input is pure and
    the outcome is a single Bell state.
    """
    effects = bsm_effects(mode)
    out = []
    for outcome, e in effects.items():
        if isinstance(state, PureState) and outcome != FAIL:
            from ..qubit import project

            proj = project(state, PureState((a, b), bell_vector(outcome)))
            out.append(BsmResult(outcome, proj.probability, proj.state))
            continue
        m, rest = measure_effect(_as_matrix(state), state.register, (a, b), e)
        p = float(np.trace(m).real)
        st = DensityOp.from_unnormalized(rest, m) if p > 1e-15 and rest else None
        out.append(BsmResult(outcome, p, st))
    return out


def sample_outcome(results: Sequence[BsmResult], rng: np.random.Generator) -> BsmResult:
    p = np.array([r.probability for r in results])
    return results[int(rng.choice(len(results), p=p / p.sum()))]


@lru_cache(maxsize=1)
def sagnac_unitary() -> np.ndarray:
    """Single-photon analyzer: rails combined on a PBS, phase compensation,
    then +-45 degree analysis.

    Rows: detectors (port 0 H, port 0 V, port 1 H, port 1 V).
    Columns: input basis (polarization, rail) in register order.
    """
    reg = ModeRegistry(("r0", "r1"), internal=1)
    els = [
        PBS("r0", "r1"),
        Phase("r0", -np.pi / 2),
        Phase("r1", -np.pi / 2),
        HWP("r0", 22.5),
        HWP("r1", 22.5),
    ]
    u = slot_matrix(reg, els)  # slots ordered (r0,H), (r0,V), (r1,H), (r1,V)
    w = np.zeros((4, 4), complex)
    for pol in range(2):
        for rail in range(2):
            w[:, pol * 2 + rail] = u[:, rail * 2 + pol]
    return w


SAGNAC_DETECTORS = ("Phi+", "Phi-", "Psi+", "Psi-")


def sagnac_effects() -> dict[str, np.ndarray]:
    w = sagnac_unitary()
    return {k: np.outer(w[i].conj(), w[i]) for i, k in enumerate(SAGNAC_DETECTORS)}


def bsm_spatial_polarization(state, photon: str | tuple[str, str]) -> list[BsmResult]:
    """Complete Bell measurement between the polarization and the rail qubit
    of one photon, read out through the single-photon analyzer."""
    labels = DUAL_PHOTONS.get(photon) if isinstance(photon, str) else tuple(photon)
    if labels is None or len(labels) != 2 or not set(labels) <= set(state.register):
        raise RegisterError(f"photon {photon!r} is not dual-encoded in {state.register}")
    out = []
    for outcome, e in sagnac_effects().items():
        m, rest = measure_effect(_as_matrix(state), state.register, labels, e)
        p = float(np.trace(m).real)
        st = DensityOp.from_unnormalized(rest, m) if p > 1e-15 and rest else None
        out.append(BsmResult(outcome, p, st))
    return out


def effects_for(mode: str | Mapping[str, np.ndarray], dephasing: float = 0.0):
    if isinstance(mode, str):
        return bsm_effects(mode, dephasing)
    return dict(mode)
