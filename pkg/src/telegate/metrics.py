"""Figures of merit of the teleported gates.

Classical fidelities are averages, over a set of product inputs, of the
probability of the outputs an ideal gate would produce.  The accepted
outcome sets are generated from the reference unitaries; the printed sets
shipped with the package are only diffed against them.

Values measured from counts carry one standard deviation, combined to first
order as for independent Gaussian errors (:class:`Estimate`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .protocols.corrections import layout, load_printed_tables
from .protocols.gate import GateRunResult
from .protocols.states import INPUT_LABELS, gate_matrix, reference_output
from .qubit import DensityOp, PureState, basis_state, concurrence, fidelity, single_qubit

PROB_TOL = 1e-9
WITNESS_THRESHOLD = 0.5
PARALLELISM_THRESHOLD = 2.0 / 3.0

BASES = {"Z": ("H", "V"), "X": ("+", "-"), "C": ("R", "L")}


class MetricError(ValueError):
    """Missing or inconsistent data for a metric."""


# ------------------------------------------------------------------ errors


@dataclass(frozen=True)
class Estimate:
    """A value with one standard deviation; arithmetic assumes independence."""

    value: float
    sd: float = 0.0

    def __add__(self, other):
        o = _est(other)
        return Estimate(self.value + o.value, math.hypot(self.sd, o.sd))

    __radd__ = __add__

    def __sub__(self, other):
        o = _est(other)
        return Estimate(self.value - o.value, math.hypot(self.sd, o.sd))

    def __rsub__(self, other):
        return _est(other) - self

    def __mul__(self, k: float):
        return Estimate(self.value * k, abs(k) * self.sd)

    __rmul__ = __mul__

    def __truediv__(self, k: float):
        return Estimate(self.value / k, self.sd / abs(k))

    def to_dict(self) -> dict:
        return {"value": self.value, "sd": self.sd}


def _est(x) -> Estimate:
    return x if isinstance(x, Estimate) else Estimate(float(x), 0.0)


def _value(x) -> float:
    return x.value if isinstance(x, Estimate) else float(x)


def est_min(a, b) -> Estimate:
    a, b = _est(a), _est(b)
    return a if a.value <= b.value else b


def est_mean(values: Sequence) -> Estimate:
    total = sum((_est(v) for v in values), Estimate(0.0))
    return total / len(values)


# ----------------------------------------------------------------- settings


@dataclass(frozen=True)
class Setting:
    """Input and output analysis bases of a classical fidelity, one letter
    per qubit (``Z``: H/V, ``X``: +/-, ``C``: R/L)."""

    name: str
    inputs: str
    outputs: str

    def input_labels(self) -> list[str]:
        return ["".join(p) for p in itertools.product(*(BASES[b] for b in self.inputs))]

    def output_labels(self) -> list[str]:
        return ["".join(p) for p in itertools.product(*(BASES[b] for b in self.outputs))]


SETTINGS = {
    "zz": Setting("zz", "ZZ", "ZZ"),
    "zx": Setting("zx", "ZX", "ZX"),
    "xz": Setting("xz", "XZ", "XZ"),
    "xx": Setting("xx", "XX", "XX"),
    "parallelism": Setting("parallelism", "XX", "CC"),
}

# pairs of complementary settings whose fidelities bound the process fidelity
COMPLEMENTARY = {"cnot": ("zz", "xx"), "cphase": ("zx", "xz")}


def setting(name: str | Setting) -> Setting:
    if isinstance(name, Setting):
        return name
    try:
        return SETTINGS[name]
    except KeyError:
        raise MetricError(f"unknown setting {name!r}; known: {sorted(SETTINGS)}") from None


def _ket(label: str, register: Sequence[str]) -> np.ndarray:
    return basis_state(label, register).amplitudes


def ideal_conditional(gate: str, set_: str | Setting) -> dict[tuple[str, str], float]:
    """``P(out | in)`` of the reference gate for every input and output."""
    s = setting(set_)
    out_reg = layout(gate).output
    table = {}
    for i in s.input_labels():
        ref = reference_output(gate, basis_state(i, INPUT_LABELS), out_reg).amplitudes
        for o in s.output_labels():
            table[(i, o)] = float(abs(np.vdot(_ket(o, out_reg), ref)) ** 2)
    return table


def accepted_outcomes(gate: str, set_: str | Setting) -> list[tuple[str, str]]:
    """``(input, output)`` pairs the reference gate produces with non-zero
    probability."""
    return [k for k, p in ideal_conditional(gate, set_).items() if p > PROB_TOL]


def printed_outcome_diff(gate: str = "cphase") -> dict[str, dict]:
    """Compare the printed accepted-outcome sets with the oracle-derived ones.

    Printed entries are stored as ``[output, input]``, the order in which a
    conditional probability ``P(output | input)`` is written.
    """
    data = load_printed_tables()
    which = {
        "truth_table_printed": ("cnot", "zz"),
        "complementary_zx_printed": ("cphase", "zx"),
        "parallelism_printed": ("cphase", "parallelism"),
    }
    report = {}
    for key, (g, s) in which.items():
        if key not in data:
            continue
        printed = {(i, o) for o, i in data[key]}
        derived = set(accepted_outcomes(g, s))
        report[key] = {
            "gate": g,
            "setting": s,
            "printed_only": sorted(f"P({o}|{i})" for i, o in printed - derived),
            "derived_only": sorted(f"P({o}|{i})" for i, o in derived - printed),
        }
    return report


# ----------------------------------------------------- conditional tables


@dataclass(frozen=True)
class ConditionalTable:
    """``P(output | input)`` with optional standard deviations and the number
    of accepted events per input (for sampled tables)."""

    setting: Setting | None
    probs: Mapping[tuple[str, str], float]
    sd: Mapping[tuple[str, str], float] = field(default_factory=dict)
    accepted: Mapping[str, int] = field(default_factory=dict)

    def __getitem__(self, key: tuple[str, str]) -> float:
        return self.probs[key]

    def estimate(self, inp: str, out: str) -> Estimate:
        if (inp, out) not in self.probs:
            raise MetricError(f"table lacks P({out}|{inp})")
        return Estimate(self.probs[(inp, out)], self.sd.get((inp, out), 0.0))

    def check_normalized(self, tol: float = PROB_TOL) -> None:
        if self.setting is None:
            return
        for i in self.setting.input_labels():
            total = sum(self.probs.get((i, o), 0.0) for o in self.setting.output_labels())
            if abs(total - 1.0) > tol:
                raise MetricError(f"outputs for input {i} sum to {total}")

    def to_dict(self) -> dict:
        return {
            "setting": self.setting.name if self.setting else None,
            "entries": [
                {"input": i, "output": o, "p": p, "sd": self.sd.get((i, o), 0.0)}
                for (i, o), p in sorted(self.probs.items())
            ],
            "accepted": dict(sorted(self.accepted.items())),
        }


Runner = Callable[[PureState], GateRunResult]


def exact_table(gate: str, set_: str | Setting, runner: Runner) -> ConditionalTable:
    """Conditional probabilities of the aggregated, heralded gate output."""
    s = setting(set_)
    out_reg = layout(gate).output
    probs = {}
    for i in s.input_labels():
        result = runner(basis_state(i, INPUT_LABELS))
        if result.success_fraction <= 0.0:
            raise MetricError(f"no accepted event for input {i}")
        rho = result.output().reorder(out_reg).matrix
        for o in s.output_labels():
            k = _ket(o, out_reg)
            probs[(i, o)] = float(np.real(np.vdot(k, rho @ k)))
    return ConditionalTable(s, probs)


def joint_probabilities(result: GateRunResult, outputs: Sequence[str]) -> dict:
    """``P(bsm outcome, output)`` per trial, as sampled by the shot engine."""
    out_reg = layout(result.gate).output
    kets = {o: _ket(o, out_reg) for o in outputs}
    joint = {}
    for key, br in result.branches.items():
        if br.failed or br.state is None:
            continue
        st = br.corrected if result.corrections else br.state
        m = st.reorder(out_reg).matrix
        for o, k in kets.items():
            joint[(key, o)] = br.probability * float(np.real(np.vdot(k, m @ k)))
    return joint


def sampled_table(
    gate: str,
    set_: str | Setting,
    runner: Runner,
    shots: int,
    seed: int | Sequence[int],
    workers: int = 1,
) -> tuple[ConditionalTable, dict]:
    """Sample ``shots`` trials per input and estimate ``P(out | in)``.

    Input ``n`` draws from the stream ``(*seed, n)``.

    Returns the table and the raw counts per input.
    """
    from .noise.shots import binomial_sd, run_shots

    s = setting(set_)
    probs, sds, accepted, raw = {}, {}, {}, {}
    for n, i in enumerate(s.input_labels()):
        joint = joint_probabilities(runner(basis_state(i, INPUT_LABELS)), s.output_labels())
        stream = [*np.atleast_1d(seed).tolist(), n]
        shot = run_shots(joint, shots, seed=stream, workers=workers)
        per_out = {o: 0 for o in s.output_labels()}
        for (_, o), c in shot.counts.items():
            per_out[o] += c
        acc = shot.accepted
        accepted[i] = acc
        raw[i] = {"shots": shots, "accepted": acc, "counts": per_out}
        for o, c in per_out.items():
            probs[(i, o)] = c / acc if acc else math.nan
            sds[(i, o)] = binomial_sd(c, acc)
    return ConditionalTable(s, probs, sds, accepted), raw


def setting_fidelity(gate: str, table: ConditionalTable) -> Estimate:
    """Average over inputs of the probability of the accepted outputs.

    For sampled tables the per-input sums are binomial proportions, so their
    standard deviation is taken from the summed counts.
    """
    from .noise.shots import binomial_sd

    if table.setting is None:
        raise MetricError("table has no setting")
    acc = accepted_outcomes(gate, table.setting)
    terms = []
    for i in table.setting.input_labels():
        outs = [o for (ii, o) in acc if ii == i]
        missing = [o for o in outs if (i, o) not in table.probs]
        if missing:
            raise MetricError(f"table lacks P({missing[0]}|{i})")
        p = sum(table.probs[(i, o)] for o in outs)
        n = table.accepted.get(i, 0)
        sd = binomial_sd(round(p * n), n) if n else 0.0
        terms.append(Estimate(p, sd))
    return est_mean(terms)


# ------------------------------------------------------- named fidelities

TRUTH_TABLE_ENTRIES = (("HH", "HH"), ("VH", "VH"), ("HV", "VV"), ("VV", "HV"))


def truth_table_fidelity(table: ConditionalTable | Mapping) -> float:
    """Quarter-sum of the four computational-basis successes of a C-NOT with
    the target first, ``P(HH|HH) + P(VH|VH) + P(VV|HV) + P(HV|VV)``."""
    probs = table.probs if isinstance(table, ConditionalTable) else table
    missing = [k for k in TRUTH_TABLE_ENTRIES if k not in probs]
    if missing:
        i, o = missing[0]
        raise MetricError(f"table lacks P({o}|{i})")
    return sum(float(probs[k]) for k in TRUTH_TABLE_ENTRIES) / 4.0


def phi_plus_fidelity_from_correlations(xx: float, yy: float, zz: float) -> float:
    """Overlap with Phi+ from the three correlations ``<XX>``, ``<YY>``, ``<ZZ>``."""
    for name, v in (("xx", xx), ("yy", yy), ("zz", zz)):
        if not -1.0 - PROB_TOL <= v <= 1.0 + PROB_TOL:
            raise MetricError(f"{name} = {v} is not a correlation in [-1, 1]")
    return (1.0 + xx - yy + zz) / 4.0


def complementary_fidelities(
    gate: str, runner: Runner | None = None, tables: Mapping[str, ConditionalTable] | None = None
) -> tuple[Estimate, Estimate]:
    """The two classical fidelities bounding the process fidelity: ZX and XZ
    for the C-Phase, ZZ and XX for the C-NOT."""
    names = COMPLEMENTARY[gate]
    if tables is None:
        if runner is None:
            raise MetricError("need a runner or precomputed tables")
        tables = {n: exact_table(gate, n, runner) for n in names}
    missing = [n for n in names if n not in tables]
    if missing:
        raise MetricError(f"missing setting {missing[0]!r}")
    return tuple(setting_fidelity(gate, tables[n]) for n in names)


def process_fidelity_bounds(f_a, f_b):
    """Lower and upper bounds on the process fidelity from two complementary
    classical fidelities; the lower bound is not clamped at zero."""
    if isinstance(f_a, Estimate) or isinstance(f_b, Estimate):
        return _est(f_a) + _est(f_b) - 1.0, est_min(f_a, f_b)
    return f_a + f_b - 1.0, min(f_a, f_b)


def concurrence_lower_bound(f_a, f_b):
    """Lower bound on the concurrence the gate can create, ``2(f_a + f_b) - 3``."""
    if isinstance(f_a, Estimate) or isinstance(f_b, Estimate):
        return 2.0 * (_est(f_a) + _est(f_b)) - 3.0
    return 2.0 * (f_a + f_b) - 3.0


def parallelism_fidelity(table: ConditionalTable, gate: str = "cphase") -> Estimate:
    """Circular-basis fidelity on the four ``|+-+->`` inputs; each input has
    two accepted outputs of ideal probability 1/2."""
    if table.setting is None or table.setting.name != "parallelism":
        raise MetricError("need the parallelism setting (X inputs, circular outputs)")
    return setting_fidelity(gate, table)


@dataclass(frozen=True)
class CriterionResult:
    average: float
    passed: bool
    sd: float = 0.0

    def to_dict(self) -> dict:
        return {"average": self.average, "sd": self.sd, "passed": self.passed}


def parallelism_criterion(f_zx, f_xz, f_xx) -> CriterionResult:
    """Average of the three conditional-operation fidelities; must strictly
    exceed 2/3."""
    avg = est_mean([f_zx, f_xz, f_xx])
    return CriterionResult(avg.value, avg.value > PARALLELISM_THRESHOLD, avg.sd)


@dataclass(frozen=True)
class WitnessResult:
    kind: str
    fidelity: float
    passed: bool
    margin: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "fidelity": self.fidelity, "passed": self.passed,
                "margin": self.margin}


WITNESS_KINDS = ("two-qubit-bell", "four-qubit-cluster")


def entanglement_witness(fid, kind: str = "two-qubit-bell") -> WitnessResult:
    """Fidelity above 1/2 with a Bell state or a four-qubit cluster-type state
    proves entanglement of that kind; the comparison is strict."""
    if kind not in WITNESS_KINDS:
        raise MetricError(f"witness kind must be one of {WITNESS_KINDS}")
    f = _value(fid)
    return WitnessResult(kind, f, f > WITNESS_THRESHOLD, f - WITNESS_THRESHOLD)


# ---------------------------------------------------- correction effect


@dataclass(frozen=True)
class ComparisonRow:
    outcome: tuple[str, str]
    corrected: float
    uncorrected: float

    def to_dict(self) -> dict:
        return {"outcome": list(self.outcome), "corrected": self.corrected,
                "uncorrected": self.uncorrected}


@dataclass(frozen=True)
class CorrectionComparison:
    rows: tuple[ComparisonRow, ...]

    @property
    def corrected_average(self) -> float:
        return float(np.mean([r.corrected for r in self.rows]))

    @property
    def uncorrected_average(self) -> float:
        return float(np.mean([r.uncorrected for r in self.rows]))

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "corrected_average": self.corrected_average,
            "uncorrected_average": self.uncorrected_average,
        }


def figure_order() -> list[tuple[str, str]]:
    """Order of the 16 outcomes in the with/without-correction comparison."""
    return [tuple(k.split(",")) for k in load_printed_tables()["figure_order"]]


def correction_comparison(result: GateRunResult) -> CorrectionComparison:
    """Fidelity of each heralded branch with the ideal output, with and
    without its Pauli correction, in figure order.  Averages are plain means
    over the outcomes that occurred."""
    ideal = result.ideal()
    rows = []
    for key in figure_order():
        br = result.branches.get(key)
        if br is None or br.state is None or br.corrected is None:
            continue
        rows.append(ComparisonRow(key, fidelity(br.corrected, ideal), fidelity(br.state, ideal)))
    if not rows:
        raise MetricError("no heralded outcome to compare")
    return CorrectionComparison(tuple(rows))


def uncorrected_oracle(gate: str, inp: PureState) -> dict[tuple[str, str], float]:
    """Brute-force uncorrected fidelities: the branch left by outcome ``k`` is
    ``P_k |out>`` for the Pauli error ``P_k``, so its fidelity is
    ``|<out|P_k|out>|^2``."""
    from .protocols.corrections import oracle_table

    out_reg = layout(gate).output
    ideal = reference_output(gate, inp, out_reg).amplitudes
    table = {}
    for key, (error, _) in oracle_table(gate).items():
        v = error.matrix(out_reg) @ ideal
        table[key] = float(abs(np.vdot(ideal, v)) ** 2)
    return table


# -------------------------------------------------------- process oracle

_TOMO_STATES = ("H", "V", "+", "R")


def _vec(m: np.ndarray) -> np.ndarray:
    return m.reshape(-1)


def superoperator(channel: Callable[[DensityOp], DensityOp], n_qubits: int = 2,
                  register: Sequence[str] = INPUT_LABELS) -> np.ndarray:
    """Linear-inversion reconstruction of ``vec(E(rho)) = S vec(rho)`` from
    the outputs of a tomographically complete set of product inputs."""
    d = 2**n_qubits
    ins, outs = [], []
    for labels in itertools.product(_TOMO_STATES, repeat=n_qubits):
        psi = np.array([1.0 + 0j])
        for c in labels:
            psi = np.kron(psi, single_qubit(c))
        rho = np.outer(psi, psi.conj())
        ins.append(_vec(rho))
        outs.append(_vec(channel(DensityOp(tuple(register), rho)).matrix))
    a = np.array(ins).T
    b = np.array(outs).T
    s = b @ np.linalg.inv(a)
    if s.shape != (d * d, d * d):
        raise MetricError("channel output dimension differs from input")
    return s


def choi_matrix(s: np.ndarray) -> np.ndarray:
    """Unit-trace Choi matrix ``sum_ij |i><j| (x) E(|i><j|) / d``."""
    d = int(round(math.sqrt(s.shape[0])))
    j = np.zeros((d * d, d * d), complex)
    for a in range(d):
        for b in range(d):
            e = np.zeros((d, d), complex)
            e[a, b] = 1.0
            j += np.kron(e, (s @ _vec(e)).reshape(d, d))
    return j / d


def process_fidelity(channel: Callable[[DensityOp], DensityOp], gate: str) -> float:
    """Process fidelity of ``channel`` with the reference gate unitary."""
    u = gate_matrix(gate)
    d = u.shape[0]
    phi = np.eye(d).reshape(-1) / math.sqrt(d)
    target = np.kron(np.eye(d), u) @ phi
    j = choi_matrix(superoperator(channel))
    return float(np.real(np.vdot(target, j @ target)))


def run_channel(runner: Runner, gate: str) -> Callable[[DensityOp], DensityOp]:
    """The heralded, corrected gate as a map between density operators."""
    out_reg = layout(gate).output

    def channel(rho: DensityOp) -> DensityOp:
        return runner(rho).output().reorder(out_reg)

    return channel


def output_concurrence(result: GateRunResult) -> float:
    return concurrence(result.output())


__all__ = [
    "BASES", "COMPLEMENTARY", "SETTINGS", "ComparisonRow", "ConditionalTable",
    "CorrectionComparison", "CriterionResult", "Estimate", "MetricError", "Setting",
    "WitnessResult", "accepted_outcomes", "choi_matrix", "complementary_fidelities",
    "concurrence_lower_bound", "correction_comparison", "entanglement_witness",
    "exact_table", "figure_order", "ideal_conditional", "joint_probabilities",
    "output_concurrence", "parallelism_criterion", "parallelism_fidelity",
    "phi_plus_fidelity_from_correlations", "printed_outcome_diff", "process_fidelity",
    "process_fidelity_bounds", "run_channel", "sampled_table", "setting_fidelity",
    "superoperator", "truth_table_fidelity", "uncorrected_oracle",
]
