"""Exact state algebra for small ordered qubit registers.

Basis convention: ``|H>`` is index 0 and ``|V>`` index 1.  Registers are
ordered; the first label is the most significant bit of the amplitude index,
so amplitudes follow ``numpy.kron`` ordering.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

NORM_TOL = 1e-12
OP_TOL = 1e-10

SQRT2 = np.sqrt(2.0)

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit products a*b = phase * c
_PAULI_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}

_PHASES = (1, -1, 1j, -1j)


class RegisterError(ValueError):
    """Raised for label collisions, unknown labels or register mismatches."""


def _check_register(register: Sequence[str]) -> tuple[str, ...]:
    reg = tuple(str(x) for x in register)
    if len(set(reg)) != len(reg):
        raise RegisterError(f"duplicate qubit labels in register {reg}")
    return reg


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    register: tuple[str, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        reg = _check_register(self.register)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size != 2 ** len(reg):
            raise RegisterError(
                f"{amps.size} amplitudes do not fit a {len(reg)}-qubit register"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (squared norm {norm!r})")
        object.__setattr__(self, "register", reg)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, register, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex)
        n = np.linalg.norm(amps)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(tuple(register), amps / n)

    @property
    def n_qubits(self) -> int:
        return len(self.register)

    def density(self) -> "DensityOp":
        return DensityOp(self.register, np.outer(self.amplitudes, self.amplitudes.conj()))

    def reorder(self, register: Sequence[str]) -> "PureState":
        """Same state with the register permuted into ``register`` order."""
        register = tuple(register)
        if sorted(register) != sorted(self.register):
            raise RegisterError(f"{register} is not a permutation of {self.register}")
        if register == self.register:
            return self
        t = self.amplitudes.reshape((2,) * self.n_qubits)
        perm = [self.register.index(q) for q in register]
        return PureState(register, np.transpose(t, perm).reshape(-1))

    def __repr__(self):
        terms = []
        for idx, a in enumerate(self.amplitudes):
            if abs(a) > 1e-12:
                bits = format(idx, f"0{self.n_qubits}b").replace("0", "H").replace("1", "V")
                terms.append(f"({a:.4g})|{bits}>")
        return f"PureState[{','.join(self.register)}]: " + " + ".join(terms)


@dataclass(frozen=True)
class DensityOp:
    register: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        reg = _check_register(self.register)
        m = _frozen(self.matrix)
        d = 2 ** len(reg)
        if m.shape != (d, d):
            raise RegisterError(f"matrix shape {m.shape} does not fit {len(reg)} qubits")
        if not np.allclose(m, m.conj().T, atol=OP_TOL):
            raise ValueError("density operator is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > OP_TOL:
            raise ValueError(f"density operator trace is {tr!r}, expected 1")
        if np.linalg.eigvalsh(m).min() < -OP_TOL:
            raise ValueError("density operator has a negative eigenvalue")
        object.__setattr__(self, "register", reg)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_unnormalized(cls, register, matrix) -> "DensityOp":
        m = np.asarray(matrix, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if tr <= 0:
            raise ValueError("cannot normalize an operator with non-positive trace")
        return cls(tuple(register), m / tr)

    @classmethod
    def maximally_mixed(cls, register) -> "DensityOp":
        d = 2 ** len(register)
        return cls(tuple(register), np.eye(d) / d)

    @property
    def n_qubits(self) -> int:
        return len(self.register)

    def density(self) -> "DensityOp":
        return self

    def reorder(self, register: Sequence[str]) -> "DensityOp":
        register = tuple(register)
        if sorted(register) != sorted(self.register):
            raise RegisterError(f"{register} is not a permutation of {self.register}")
        if register == self.register:
            return self
        n = self.n_qubits
        t = self.matrix.reshape((2,) * (2 * n))
        perm = [self.register.index(q) for q in register]
        t = np.transpose(t, perm + [p + n for p in perm])
        return DensityOp(register, t.reshape(2**n, 2**n))

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


State = Union[PureState, DensityOp]


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis with a phase in {1, -1, i, -i}.

    ``ops`` maps qubit labels to one of ``"I", "X", "Y", "Z"``; identity
    factors are dropped so that equal operators compare equal.
    """

    ops: tuple[tuple[str, str], ...] = ()
    phase: complex = 1

    def __post_init__(self):
        ops = dict()
        for label, op in self.ops:
            op = op.upper()
            if op not in _PAULI:
                raise ValueError(f"unknown Pauli factor {op!r}")
            if str(label) in ops:
                raise RegisterError(f"label {label!r} appears twice in Pauli string")
            if op != "I":
                ops[str(label)] = op
        phase = complex(self.phase)
        for p in _PHASES:
            if abs(phase - p) < 1e-12:
                phase = complex(p)
                break
        else:
            raise ValueError(f"Pauli phase must be one of +-1, +-i, got {self.phase!r}")
        object.__setattr__(self, "ops", tuple(sorted(ops.items())))
        object.__setattr__(self, "phase", phase)

    @classmethod
    def from_dict(cls, ops: Mapping[str, str], phase: complex = 1) -> "PauliString":
        return cls(tuple(ops.items()), phase)

    @classmethod
    def identity(cls) -> "PauliString":
        return cls()

    @classmethod
    def product(cls, factors: Iterable[tuple[str, str]]) -> "PauliString":
        """Ordered product of single-qubit factors, e.g. ``[("X", "4"), ("Z", "4")]``
        gives ``X_4 Z_4 = -i Y_4``."""
        out = cls()
        for op, label in factors:
            out = out * cls(((label, op),))
        return out

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.ops)

    def factor(self, label: str) -> str:
        return dict(self.ops).get(str(label), "I")

    def __mul__(self, other: "PauliString") -> "PauliString":
        a, b = dict(self.ops), dict(other.ops)
        phase = self.phase * other.phase
        ops = {}
        for label in set(a) | set(b):
            ph, op = _PAULI_PRODUCT[(a.get(label, "I"), b.get(label, "I"))]
            phase *= ph
            ops[label] = op
        return PauliString(tuple(ops.items()), phase)

    def with_phase(self, phase: complex) -> "PauliString":
        return PauliString(self.ops, phase)

    def equal_up_to_phase(self, other: "PauliString") -> bool:
        return self.ops == other.ops

    def is_hermitian(self) -> bool:
        return self.phase.imag == 0

    def dagger(self) -> "PauliString":
        return PauliString(self.ops, self.phase.conjugate())

    def commutes_with(self, other: "PauliString") -> bool:
        a, b = dict(self.ops), dict(other.ops)
        anti = sum(1 for k in set(a) & set(b) if a[k] != b[k])
        return anti % 2 == 0

    def matrix(self, register: Sequence[str]) -> np.ndarray:
        register = tuple(register)
        unknown = set(self.support) - set(register)
        if unknown:
            raise RegisterError(f"Pauli acts on labels {sorted(unknown)} outside {register}")
        m = np.array([[1.0 + 0j]])
        for q in register:
            m = np.kron(m, _PAULI[self.factor(q)])
        return self.phase * m

    def __str__(self):
        ph = {1: "", -1: "-", 1j: "i", -1j: "-i"}[self.phase]
        body = "".join(f"{op}{label}" for label, op in self.ops) or "I"
        return ph + body


def parse_pauli(text: str) -> PauliString:
    """Parse strings such as ``"-iX4'Y6'"``, ``"Z4 X6 Z6"`` or ``"I"``.

    Factors are multiplied left to right, so repeated labels are allowed.
    """
    s = text.replace(" ", "").replace("*", "")
    phase = 1
    for prefix, ph in (("-i", -1j), ("+i", 1j), ("i", 1j), ("-", -1), ("+", 1)):
        if s.startswith(prefix) and (len(s) == len(prefix) or s[len(prefix)] in "IXYZ"):
            phase, s = ph, s[len(prefix):]
            break
    factors = []
    i = 0
    while i < len(s):
        op = s[i]
        if op not in "IXYZ":
            raise ValueError(f"cannot parse Pauli string {text!r}")
        j = i + 1
        while j < len(s) and s[j] not in "IXYZ":
            j += 1
        label = s[i + 1:j]
        if op == "I" and not label:
            i = j
            continue
        if not label:
            raise ValueError(f"Pauli factor without label in {text!r}")
        factors.append((op, label))
        i = j
    p = PauliString.product(factors)
    return p.with_phase(p.phase * phase)


def basis_state(bits: str, register: Sequence[str]) -> PureState:
    """Product state from a string over H/V/+/-/R/L (or 0/1), one char per qubit."""
    register = tuple(register)
    if len(bits) != len(register):
        raise RegisterError(f"{bits!r} does not match register {register}")
    amps = np.array([1.0 + 0j])
    for ch in bits:
        amps = np.kron(amps, single_qubit(ch))
    return PureState(register, amps)


def single_qubit(name: str) -> np.ndarray:
    """Amplitude vector of a named single-qubit polarization state.

    ``R``/``L`` follow ``|L> = (|H> + i|V>)/sqrt2``, ``|R> = (|H> - i|V>)/sqrt2``.
    """
    table = {
        "H": [1, 0], "0": [1, 0],
        "V": [0, 1], "1": [0, 1],
        "+": [1 / SQRT2, 1 / SQRT2],
        "-": [1 / SQRT2, -1 / SQRT2], "−": [1 / SQRT2, -1 / SQRT2],
        "L": [1 / SQRT2, 1j / SQRT2],
        "R": [1 / SQRT2, -1j / SQRT2],
    }
    try:
        return np.array(table[name], dtype=complex)
    except KeyError:
        raise ValueError(f"unknown single-qubit state {name!r}") from None


BELL_KINDS = ("Phi+", "Phi-", "Psi+", "Psi-")

_BELL_ALIASES = {
    "Φ+": "Phi+", "Φ⁺": "Phi+", "phi+": "Phi+",
    "Φ-": "Phi-", "Φ−": "Phi-", "Φ⁻": "Phi-", "phi-": "Phi-",
    "Ψ+": "Psi+", "Ψ⁺": "Psi+", "psi+": "Psi+",
    "Ψ-": "Psi-", "Ψ−": "Psi-", "Ψ⁻": "Psi-", "psi-": "Psi-",
}


def bell_kind(kind: str) -> str:
    kind = _BELL_ALIASES.get(kind, kind)
    if kind not in BELL_KINDS:
        raise ValueError(f"unknown Bell state {kind!r}")
    return kind


def bell_vector(kind: str) -> np.ndarray:
    kind = bell_kind(kind)
    s = 1 / SQRT2
    return np.array(
        {
            "Phi+": [s, 0, 0, s],
            "Phi-": [s, 0, 0, -s],
            "Psi+": [0, s, s, 0],
            "Psi-": [0, s, -s, 0],
        }[kind],
        dtype=complex,
    )


def bell_state(kind: str, labels: Sequence[str]) -> PureState:
    """``Phi+- = (|HH> +- |VV>)/sqrt2``, ``Psi+- = (|HV> +- |VH>)/sqrt2``."""
    labels = tuple(labels)
    if len(labels) != 2:
        raise RegisterError("a Bell state needs exactly two labels")
    return PureState(labels, bell_vector(kind))


def tensor(a: State, b: State) -> State:
    overlap = set(a.register) & set(b.register)
    if overlap:
        raise RegisterError(f"registers overlap on {sorted(overlap)}")
    register = a.register + b.register
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(register, np.kron(a.amplitudes, b.amplitudes))
    return DensityOp(register, np.kron(a.density().matrix, b.density().matrix))


def apply_operator(state: State, op: np.ndarray, labels: Sequence[str]) -> State:
    """Apply a (not necessarily unitary) operator on ``labels``; no renormalization."""
    labels = tuple(labels)
    missing = set(labels) - set(state.register)
    if missing:
        raise RegisterError(f"labels {sorted(missing)} not in register {state.register}")
    full = _embed(op, labels, state.register)
    if isinstance(state, PureState):
        return PureState.from_unnormalized(state.register, full @ state.amplitudes)
    return DensityOp.from_unnormalized(state.register, full @ state.matrix @ full.conj().T)


def _embed(op: np.ndarray, labels: tuple[str, ...], register: tuple[str, ...]) -> np.ndarray:
    rest = [q for q in register if q not in labels]
    big = np.kron(op, np.eye(2 ** len(rest)))
    order = list(labels) + rest
    n = len(register)
    t = big.reshape((2,) * (2 * n))
    perm = [order.index(q) for q in register]
    t = np.transpose(t, perm + [p + n for p in perm])
    return t.reshape(2**n, 2**n)


def apply_pauli(state: State, p: PauliString) -> State:
    unknown = set(p.support) - set(state.register)
    if unknown:
        raise RegisterError(f"Pauli acts on labels {sorted(unknown)} outside {state.register}")
    m = p.matrix(state.register)
    if isinstance(state, PureState):
        return PureState(state.register, m @ state.amplitudes)
    return DensityOp(state.register, m @ state.matrix @ m.conj().T)


@dataclass(frozen=True)
class Projection:
    state: PureState | None
    probability: float

    @property
    def ok(self) -> bool:
        return self.state is not None


def project(state: PureState, subspace: PureState) -> Projection:
    """Contract ``state`` with ``<subspace|`` on its sub-register.

    Returns the renormalized residual on the remaining labels together with
    the outcome probability.  A vanishing outcome gives ``state=None``.
    """
    sub = subspace.register
    missing = set(sub) - set(state.register)
    if missing:
        raise RegisterError(f"labels {sorted(missing)} not in register {state.register}")
    rest = tuple(q for q in state.register if q not in sub)
    if not rest:
        amp = np.vdot(subspace.amplitudes, state.reorder(sub).amplitudes)
        return Projection(None, float(abs(amp) ** 2))
    psi = state.reorder(sub + rest).amplitudes.reshape(2 ** len(sub), 2 ** len(rest))
    residual = subspace.amplitudes.conj() @ psi
    prob = float(np.vdot(residual, residual).real)
    if prob < 1e-15:
        return Projection(None, prob)
    return Projection(PureState(rest, residual / np.sqrt(prob)), prob)


def _density_of(state: State) -> np.ndarray:
    return state.density().matrix


def fidelity(rho: State, target: PureState) -> float:
    """``Tr(rho |t><t|)``; states are compared up to global phase."""
    if tuple(rho.register) != tuple(target.register):
        if sorted(rho.register) != sorted(target.register):
            raise RegisterError(
                f"register mismatch: {rho.register} vs {target.register}"
            )
        target = target.reorder(rho.register)
    t = target.amplitudes
    if isinstance(rho, PureState):
        f = abs(np.vdot(t, rho.amplitudes)) ** 2
    else:
        f = np.vdot(t, rho.matrix @ t).real
    return float(min(1.0, max(0.0, f)))


def pauli_expectation(rho: State, p: PauliString) -> float:
    m = p.matrix(rho.register)
    return float(np.trace(_density_of(rho) @ m).real)


def _spin_flip(m: np.ndarray) -> np.ndarray:
    yy = np.kron(_PAULI["Y"], _PAULI["Y"])
    return yy @ m.conj() @ yy


def concurrence(rho: State) -> float:
    """Wootters concurrence of a two-qubit state."""
    if rho.n_qubits != 2:
        raise RegisterError("concurrence is defined for two-qubit states only")
    m = _density_of(rho)
    # sqrt of eigenvalues of rho * rho~ equal the singular values of sqrt(rho) sqrt(rho~)
    w, v = np.linalg.eigh(m)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    lam = np.sort(np.linalg.svd(sq @ _spin_flip(sq), compute_uv=False))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def partial_trace(rho: State, keep: Iterable[str]) -> DensityOp:
    requested = set(keep)
    unknown = requested - set(rho.register)
    if unknown:
        raise RegisterError(f"labels {sorted(unknown)} not in register {rho.register}")
    keep = [q for q in rho.register if q in requested]
    if not requested:
        raise RegisterError("partial trace must keep at least one qubit")
    m = _density_of(rho)
    n = rho.n_qubits
    gone = [q for q in rho.register if q not in requested]
    order = keep + gone
    perm = [rho.register.index(q) for q in order]
    t = m.reshape((2,) * (2 * n)).transpose(perm + [p + n for p in perm])
    dk, dg = 2 ** len(keep), 2 ** len(gone)
    t = t.reshape(dk, dg, dk, dg)
    return DensityOp(tuple(keep), np.einsum("ajbj->ab", t))


def all_pauli_strings(labels: Sequence[str]) -> list[PauliString]:
    return [
        PauliString(tuple(zip(labels, ops)))
        for ops in itertools.product("IXYZ", repeat=len(labels))
    ]
