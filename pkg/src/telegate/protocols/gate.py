"""Teleported two-qubit gates at the qubit level."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..qubit import DensityOp, PauliString, PureState, RegisterError, tensor
from .bsm import effects_for, measure_effect
from .corrections import FAIL, correction, layout
from .states import INPUT_LABELS, reference_output

ZERO_PROB = 1e-15


@dataclass(frozen=True)
class BranchResult:
    outcome: tuple[str, str]
    probability: float
    state: DensityOp | None  # normalized, before correction
    corrected: DensityOp | None
    correction: PauliString | None

    @property
    def failed(self) -> bool:
        return FAIL in self.outcome


@dataclass(frozen=True)
class GateRunResult:
    gate: str
    input: PureState | DensityOp
    branches: dict[tuple[str, str], BranchResult]
    corrections: bool
    counts: dict[tuple[str, str], int] | None = None
    shots: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def success_fraction(self) -> float:
        return float(sum(b.probability for b in self.branches.values() if not b.failed))

    def successful(self) -> list[BranchResult]:
        return [b for b in self.branches.values() if not b.failed and b.state is not None]

    def output(self) -> DensityOp:
        """Probability-weighted output over the successful branches."""
        good = self.successful()
        if not good:
            raise ZeroDivisionError("no successful branch")
        reg = good[0].state.register
        m = sum(
            b.probability * (b.corrected if self.corrections else b.state).matrix for b in good
        )
        return DensityOp.from_unnormalized(reg, m)

    def ideal(self) -> PureState:
        out = layout(self.gate).output
        inp = self.input
        if not isinstance(inp, PureState):
            raise TypeError("ideal output is defined for pure inputs only")
        return reference_output(self.gate, inp, out)


def _branches_from_matrices(gate, matrices: Mapping, output_register, corrections=True):
    branches = {}
    for outcome, m in matrices.items():
        p = float(np.real(np.trace(m)))
        p = max(p, 0.0)
        if p <= ZERO_PROB:
            branches[outcome] = BranchResult(outcome, p, None, None, None)
            continue
        st = DensityOp.from_unnormalized(output_register, m)
        if FAIL in outcome:
            branches[outcome] = BranchResult(outcome, p, st, None, None)
            continue
        c = correction(gate, *outcome)
        cm = c.matrix(output_register)
        corrected = DensityOp.from_unnormalized(output_register, cm @ st.matrix @ cm.conj().T)
        branches[outcome] = BranchResult(outcome, p, st, corrected, c)
    return branches


def gate_result_from_matrices(
    gate: str, inp, matrices: Mapping, corrections: bool = True, meta=None
) -> GateRunResult:
    """Wrap unnormalized per-outcome output operators into a result."""
    out = layout(gate).output
    return GateRunResult(
        gate, inp, _branches_from_matrices(gate, matrices, out), corrections, meta=meta or {}
    )


def _resource_state(gate, resource):
    lay = layout(gate)
    state = getattr(resource, "state", resource)
    kind = getattr(resource, "kind", None)
    if kind is not None and kind not in {"cnot": ("chi",), "cphase": ("chi'", "lambda")}[gate]:
        raise ValueError(f"resource {kind!r} does not drive a {gate} gate")
    if tuple(state.register) != lay.resource:
        if sorted(state.register) != sorted(lay.resource):
            raise RegisterError(
                f"{gate} needs a resource on {lay.resource}, got {state.register}"
            )
        state = state.reorder(lay.resource)
    return state


def run_gate(
    gate: str,
    inp: PureState | DensityOp,
    resource,
    bsm: str | Sequence = "complete",
    corrections: bool = True,
    mode: str = "enumerate",
    shots: int = 0,
    seed: int | None = None,
    dephasing: float = 0.0,
) -> GateRunResult:
    """Teleport ``inp`` (qubits 1, 2) through ``resource``.

    ``bsm`` is a mode name (``"complete"``/``"partial"``), a pair of mode
    names, or a pair of effect dictionaries (one per Bell measurement).
    ``mode="sample"`` additionally draws ``shots`` outcomes with the
    reproducible block sampler of the shot engine.
    """
    lay = layout(gate)
    if tuple(inp.register) != INPUT_LABELS:
        raise RegisterError(f"gate inputs must be labeled {INPUT_LABELS}, got {inp.register}")
    res = _resource_state(gate, resource)
    full = tensor(inp, res).density().matrix
    register = INPUT_LABELS + lay.resource
    if isinstance(bsm, (str, Mapping)):
        bsm = (bsm, bsm)
    e1, e2 = (effects_for(b, dephasing) for b in bsm)
    (a1, b1), (a2, b2) = lay.bsm_pairs
    matrices = {}
    for o1, m1 in e1.items():
        r1, reg1 = measure_effect(full, register, (a1, b1), m1)
        for o2, m2 in e2.items():
            r2, reg2 = measure_effect(r1, reg1, (a2, b2), m2)
            if reg2 != lay.output:
                raise RegisterError(f"unexpected output register {reg2}")
            matrices[(o1, o2)] = r2
    result = gate_result_from_matrices(gate, inp, matrices, corrections)
    if mode == "enumerate":
        return result
    if mode != "sample":
        raise ValueError(f"mode must be 'enumerate' or 'sample', got {mode!r}")
    if shots < 1 or seed is None:
        raise ValueError("sampling needs shots >= 1 and a seed")
    from ..noise.shots import sample_categorical

    keys = list(result.branches)
    probs = np.array([result.branches[k].probability for k in keys])
    counts = sample_categorical(probs, shots, seed)
    return GateRunResult(
        gate, inp, result.branches, corrections,
        counts={k: int(c) for k, c in zip(keys, counts)}, shots=shots,
    )
