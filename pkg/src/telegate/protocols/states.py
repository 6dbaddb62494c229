"""Named states, resource targets and reference gates.

Gate conventions: for the C-NOT the first qubit is the target and the second
the control; the C-Phase is the symmetric controlled-Z.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..qubit import (
    PureState,
    RegisterError,
    apply_operator,
    basis_state,
    bell_kind,
    bell_state,
    single_qubit,
    tensor,
)

CNOT_MATRIX = np.array(
    # target is the first (most significant) qubit; flips when control is V
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)
CZ_MATRIX = np.diag([1, 1, 1, -1]).astype(complex)

GATE_MATRICES = {"cnot": CNOT_MATRIX, "cphase": CZ_MATRIX}

CNOT_RESOURCE = ("3", "4", "5", "6")
CPHASE_RESOURCE = ("3", "4'", "5", "6'")
INPUT_LABELS = ("1", "2")
CNOT_OUTPUT = ("4", "6")
CPHASE_OUTPUT = ("4'", "6'")

_ALIASES = {
    "χ": "chi", "chi": "chi",
    "χ′": "chi'", "χ'": "chi'", "chi'": "chi'", "chi_prime": "chi'", "χ̃": "chi'",
    "λ": "lambda", "lambda": "lambda",
}


def gate_matrix(gate: str) -> np.ndarray:
    try:
        return GATE_MATRICES[gate]
    except KeyError:
        raise ValueError(f"unknown gate {gate!r}; expected 'cnot' or 'cphase'") from None


def _two_qubit(state: PureState) -> PureState:
    if state.n_qubits != 2:
        raise RegisterError("reference gates act on two-qubit inputs")
    return state


def cnot_reference(state: PureState) -> PureState:
    """Flip the first (target) qubit when the second (control) is ``|V>``."""
    state = _two_qubit(state)
    return PureState(state.register, CNOT_MATRIX @ state.amplitudes)


def cphase_reference(state: PureState) -> PureState:
    """Controlled-Z: phase -1 on ``|VV>``."""
    state = _two_qubit(state)
    return PureState(state.register, CZ_MATRIX @ state.amplitudes)


def reference_output(gate: str, state: PureState, labels: Sequence[str] | None = None) -> PureState:
    out = PureState(state.register, gate_matrix(gate) @ _two_qubit(state).amplitudes)
    if labels is not None:
        out = PureState(tuple(labels), out.amplitudes)
    return out


def chi_state(labels: Sequence[str] = CNOT_RESOURCE) -> PureState:
    """Cluster resource ``1/2[(HH+VV) HH + (HV+VH) VV]`` on (3, 4, 5, 6).

    Equivalently a C-NOT from qubit 6 onto qubit 4 acting on two ``Phi+``
    pairs (3, 4) and (5, 6).
    """
    amp = np.zeros(16, complex)
    for bits in ("0000", "1100", "0111", "1011"):
        amp[int(bits, 2)] = 0.5
    return PureState(tuple(labels), amp)


def chi_prime_state(labels: Sequence[str] = CPHASE_RESOURCE) -> PureState:
    """Resource of the C-Phase: controlled-Z between qubits 4' and 6' of two
    ``Phi+`` pairs; qubits 3 and 5 are spatial rails in the optical version."""
    amp = np.zeros(16, complex)
    for bits, a in (("0000", 1), ("0011", 1), ("1100", 1), ("1111", -1)):
        amp[int(bits, 2)] = 0.5 * a
    return PureState(tuple(labels), amp)


def lambda_state(labels: Sequence[str] = CPHASE_RESOURCE) -> PureState:
    """Four-photon polarization state with the same amplitudes as ``chi'``."""
    return PureState(tuple(labels), chi_prime_state().amplitudes)


def resource_target(gate: str) -> PureState:
    return {"cnot": chi_state, "cphase": chi_prime_state}[gate]()


def named_state(name: str, labels: Sequence[str] | None = None) -> PureState:
    """Built-in vocabulary: H, V, +, -, R, L (per qubit, e.g. ``"H+"``), the
    Bell states and the resources chi, chi' and lambda."""
    key = _ALIASES.get(name, None)
    if key == "chi":
        return chi_state(labels or CNOT_RESOURCE)
    if key == "chi'":
        return chi_prime_state(labels or CPHASE_RESOURCE)
    if key == "lambda":
        return lambda_state(labels or CPHASE_RESOURCE)
    try:
        kind = bell_kind(name)
    except ValueError:
        kind = None
    if kind is not None:
        return bell_state(kind, labels or INPUT_LABELS)
    chars = name.replace("−", "-")
    labels = tuple(labels) if labels is not None else tuple(str(i + 1) for i in range(len(chars)))
    try:
        return basis_state(chars, labels)
    except ValueError:
        raise ValueError(f"unknown named state {name!r}") from None


def product_input(target: Sequence[complex] | str, control: Sequence[complex] | str) -> PureState:
    """Product input ``|T>_1 |C>_2`` from names or amplitude pairs."""
    vecs = []
    for v in (target, control):
        a = single_qubit(v) if isinstance(v, str) else np.asarray(v, complex)
        vecs.append(PureState.from_unnormalized(("x",), a).amplitudes)
    return PureState(INPUT_LABELS, np.kron(*vecs))


def random_pure_state(rng: np.random.Generator, labels: Sequence[str] = INPUT_LABELS) -> PureState:
    d = 2 ** len(labels)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState.from_unnormalized(tuple(labels), v)


__all__ = [
    "CNOT_MATRIX", "CZ_MATRIX", "CNOT_RESOURCE", "CPHASE_RESOURCE", "INPUT_LABELS",
    "CNOT_OUTPUT", "CPHASE_OUTPUT", "gate_matrix", "cnot_reference", "cphase_reference",
    "reference_output", "chi_state", "chi_prime_state", "lambda_state", "resource_target",
    "named_state", "product_input", "random_pure_state", "apply_operator", "tensor",
]
