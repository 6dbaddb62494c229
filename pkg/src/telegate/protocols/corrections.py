"""Pauli-frame corrections derived from first principles.

For a gate teleported through a resource ``|R>`` the branch of Bell outcomes
``(o1, o2)`` maps an input ``|in>`` to ``K |in>`` with
``K = (<B_o1|_{1,3} <B_o2|_{2,5}) (|in> (x) |R>)``.  For an ideal resource
``K = c P U / 4`` with a Pauli string ``P`` and a phase ``c``; the correction
is ``conj(c) P``.  The tables printed in the literature are kept as a data
asset and diffed against this oracle instead of being trusted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from ..qubit import BELL_KINDS, PauliString, all_pauli_strings, bell_kind, bell_vector, parse_pauli
from .states import (
    CNOT_OUTPUT,
    CNOT_RESOURCE,
    CPHASE_OUTPUT,
    CPHASE_RESOURCE,
    gate_matrix,
    resource_target,
)

FAIL = "FAIL"
OUTCOMES = tuple((a, b) for a in BELL_KINDS for b in BELL_KINDS)


class CorrectionError(ValueError):
    """Outcome without a correction (heralded failure) or malformed table."""


@dataclass(frozen=True)
class GateLayout:
    gate: str
    resource: tuple[str, ...]
    bsm_pairs: tuple[tuple[str, str], tuple[str, str]]
    output: tuple[str, str]


LAYOUTS = {
    "cnot": GateLayout("cnot", CNOT_RESOURCE, (("1", "3"), ("2", "5")), CNOT_OUTPUT),
    "cphase": GateLayout("cphase", CPHASE_RESOURCE, (("1", "3"), ("2", "5")), CPHASE_OUTPUT),
}


def layout(gate: str) -> GateLayout:
    try:
        return LAYOUTS[gate]
    except KeyError:
        raise ValueError(f"unknown gate {gate!r}") from None


def branch_operator(gate: str, o1: str, o2: str, resource: np.ndarray | None = None) -> np.ndarray:
    """4x4 map from the input pair (1, 2) to the outputs for one outcome pair."""
    lay = layout(gate)
    r = resource_target(gate).amplitudes if resource is None else np.asarray(resource)
    # resource tensor indices (q3, qa, q5, qb); input indices (i1, i2)
    r = r.reshape(2, 2, 2, 2)
    b1 = bell_vector(o1).reshape(2, 2).conj()  # (i1, q3)
    b2 = bell_vector(o2).reshape(2, 2).conj()  # (i2, q5)
    k = np.einsum("ac,bd,cxdy->xyab", b1, b2, r)
    return k.reshape(4, 4)


def _decompose(m: np.ndarray, labels) -> tuple[PauliString, complex]:
    for p in all_pauli_strings(labels):
        c = np.trace(p.matrix(labels) @ m) / 4
        if abs(abs(c) - 1) < 1e-9:
            return p, complex(c)
    raise CorrectionError("branch operator is not a Pauli string times the gate")


@lru_cache(maxsize=None)
def oracle_table(gate: str) -> dict[tuple[str, str], tuple[PauliString, PauliString]]:
    """Map each outcome pair to ``(error, correction)``.

    ``error`` is the phased Pauli ``cP`` with ``K = cP U / 4``; the
    correction ``conj(c) P`` restores ``U |in>`` with a positive prefactor.
    """
    lay = layout(gate)
    u = gate_matrix(gate)
    out = {}
    for o1, o2 in OUTCOMES:
        m = 4 * branch_operator(gate, o1, o2) @ u.conj().T
        p, c = _decompose(m, lay.output)
        out[(o1, o2)] = (p.with_phase(c), p.with_phase(np.conj(c)))
    return out


def _outcome(o: str) -> str:
    if o == FAIL:
        raise CorrectionError("failed Bell measurement has no correction (heralded loss)")
    return bell_kind(o)


def correction(gate: str, o1: str, o2: str) -> PauliString:
    return oracle_table(gate)[(_outcome(o1), _outcome(o2))][1]


def cnot_correction(outcome13: str, outcome25: str) -> PauliString:
    """Correction on qubits (4, 6) after BSM outcomes on (1, 3) and (2, 5)."""
    return correction("cnot", outcome13, outcome25)


def cphase_correction(outcome3: str, outcome5: str) -> PauliString:
    """Correction on qubits (4', 6') after the BSMs on photons 3 and 5."""
    return correction("cphase", outcome3, outcome5)


# ------------------------------------------------------------ printed tables


def load_printed_tables(path: str | Path | None = None) -> dict:
    if path is None:
        text = resources.files(__package__).joinpath("data/printed_tables.json").read_text()
    else:
        text = Path(path).read_text()
    data = json.loads(text)
    for gate in ("cnot", "cphase"):
        if gate not in data:
            raise CorrectionError(f"table asset lacks the {gate!r} section")
        entries = data[gate]["entries"]
        if len(entries) != 16:
            raise CorrectionError(f"{gate} table has {len(entries)} entries, expected 16")
    return data


@dataclass(frozen=True)
class CellDiff:
    gate: str
    outcome: tuple[str, str]
    printed: str
    derived: str
    status: str  # "exact", "phase", or "mismatch"
    known: bool

    def to_dict(self) -> dict:
        return {
            "gate": self.gate,
            "outcome": list(self.outcome),
            "printed": self.printed,
            "derived": self.derived,
            "status": self.status,
            "known_erratum": self.known,
        }


def diff_tables(data: Mapping | None = None) -> list[CellDiff]:
    """Compare printed tables with the oracle, cell by cell.

    Each gate section states whether it lists the branch ``error`` operator
    (what multiplies the ideal output) or the ``correction``.
    """
    data = load_printed_tables() if data is None else data
    cells = []
    sections = [("cnot", "cnot"), ("cnot_partial", "cnot"), ("cphase", "cphase")]
    for name, gate in sections:
        if name not in data:
            continue
        section = data[name]
        which = 0 if section["kind"] == "error" else 1
        errata = {tuple(k.split(",")) for k in section.get("errata", [])}
        table = oracle_table(gate)
        for key, printed in section["entries"].items():
            outcome = tuple(bell_kind(x.strip()) for x in key.split(","))
            derived = table[outcome][which]
            p = parse_pauli(printed)
            if p == derived:
                status = "exact"
            elif p.equal_up_to_phase(derived):
                status = "phase"
            else:
                status = "mismatch"
            cells.append(CellDiff(name, outcome, printed, str(derived), status, outcome in errata))
    return cells


def unexpected_discrepancies(cells: list[CellDiff]) -> list[CellDiff]:
    """Mismatches not listed as errata, and listed errata that now agree."""
    bad = [c for c in cells if c.status == "mismatch" and not c.known]
    bad += [c for c in cells if c.known and c.status != "mismatch"]
    return bad
