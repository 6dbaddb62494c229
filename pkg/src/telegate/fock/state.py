"""Multimode Fock states, linear-optical propagation and post-selected readout.

A :class:`FockState` stores a homogeneous polynomial in creation operators.
The amplitude of the normalized occupation basis state ``|m>`` equals the
polynomial coefficient times ``sqrt(prod m_j!)``.  Linear elements substitute
creation operators (``kernel.transform``); detection stations prune terms as
soon as they become inconsistent with a coincidence event.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..qubit import DensityOp, PureState
from . import kernel
from .elements import HWP, QWP, OpticalElement
from .modes import POLARIZATIONS, ModeId, ModeRegistry

NORM_TOL = 1e-10
ENTRY_TOL = 1e-15

THRESHOLD = "threshold"
PNR = "pnr"
DETECTOR_MODELS = (THRESHOLD, PNR)

# wave plates rotating an analysis basis onto H/V before detection
ANALYSIS_PLATES: dict[str, tuple[OpticalElement, ...]] = {
    "HV": (),
    "DA": (HWP("", 22.5),),
    "RL": (QWP("", 45.0), HWP("", 45.0)),
}


class FockError(ValueError):
    """Invalid optical configuration or readout request."""


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FockState:
    registry: ModeRegistry
    keys: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        keys = _frozen(self.keys, np.uint64)
        coeffs = _frozen(self.coeffs, complex)
        if keys.shape != coeffs.shape:
            raise FockError("keys and coefficients differ in length")
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def vacuum(cls, registry: ModeRegistry) -> "FockState":
        return cls(registry, [0], [1.0])

    @classmethod
    def from_terms(
        cls, registry: ModeRegistry, terms: Iterable[tuple[complex, Sequence]]
    ) -> "FockState":
        """Polynomial ``sum c * prod a^dag(mode)`` from ``(c, [ModeId, ...])`` terms."""
        acc: dict[int, complex] = {}
        for c, modes in terms:
            idx = [registry.index(m) for m in modes]
            if len(idx) > kernel.MAX_PHOTONS:
                raise OverflowError(f"term with {len(idx)} photons exceeds capacity")
            k = kernel.pack(idx)
            acc[k] = acc.get(k, 0) + complex(c)
        keys = np.array(sorted(acc), dtype=np.uint64)
        return cls(registry, keys, [acc[int(k)] for k in keys])

    @classmethod
    def single_photon(
        cls, registry: ModeRegistry, path: str, pol_amplitudes=(1.0, 0.0), internal=(1.0,)
    ) -> "FockState":
        terms = []
        for p, a in zip(POLARIZATIONS, pol_amplitudes):
            for k, v in enumerate(internal):
                if a * v != 0:
                    terms.append((a * v, [ModeId(path, p, k)]))
        return cls.from_terms(registry, terms).normalized()

    @property
    def amplitudes(self) -> np.ndarray:
        return self.coeffs * np.sqrt(kernel.bosonic_factor(self.keys))

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def normalized(self) -> "FockState":
        n = self.norm_squared()
        if n <= 0:
            raise FockError("cannot normalize the zero state")
        return FockState(self.registry, self.keys, self.coeffs / np.sqrt(n))

    def photon_numbers(self) -> np.ndarray:
        return np.count_nonzero(kernel.photon_matrix(self.keys) >= 0, axis=1)

    def occupations(self) -> dict[tuple[ModeId, ...], complex]:
        """Readable mapping from photon mode tuples to basis amplitudes."""
        out = {}
        for k, a in zip(self.keys.tolist(), self.amplitudes):
            out[tuple(self.registry.mode(m) for m in kernel.unpack(k))] = complex(a)
        return out

    def amplitude(self, modes: Sequence) -> complex:
        key = kernel.pack(self.registry.index(m) for m in modes)
        hit = np.searchsorted(self.keys, np.uint64(key))
        if hit < len(self.keys) and int(self.keys[hit]) == key:
            return complex(self.amplitudes[hit])
        return 0j

    def with_registry(self, registry: ModeRegistry) -> "FockState":
        """Re-express on another registry containing all occupied paths."""
        if registry == self.registry:
            return self
        if registry.internal < self.registry.internal:
            raise FockError("target registry has fewer internal modes")
        pm = kernel.photon_matrix(self.keys)
        used = np.unique(pm[pm >= 0])
        remap = np.full(self.registry.n_modes, -1, np.int64)
        for m in used:
            remap[m] = registry.index(self.registry.mode(int(m)))
        acc: dict[int, complex] = {}
        for row, c in zip(pm, self.coeffs):
            k = kernel.pack(int(remap[m]) for m in row if m >= 0)
            acc[k] = acc.get(k, 0) + c
        keys = np.array(sorted(acc), dtype=np.uint64)
        return FockState(registry, keys, [acc[int(k)] for k in keys])

    def tensor(self, other: "FockState", veto=None) -> "FockState":
        reg = self.registry.extend(other.registry.paths)
        if other.registry.internal > reg.internal:
            reg = ModeRegistry(reg.paths, other.registry.internal)
        a, b = self.with_registry(reg), other.with_registry(reg)
        keys, coeffs = kernel.multiply(a.keys, a.coeffs, b.keys, b.coeffs, veto)
        return FockState(reg, keys, coeffs)

    def __len__(self):
        return len(self.keys)


# ---------------------------------------------------------------- propagation


def _with_paths(state: FockState, elements: Sequence[OpticalElement]) -> FockState:
    paths = []
    for e in elements:
        paths.extend(e.paths())
        paths.extend(e.aux_paths())
    return state.with_registry(state.registry.extend(paths))


def slot_matrix(registry: ModeRegistry, elements: Sequence[OpticalElement]) -> np.ndarray:
    """Compose elements (applied in order) into one (path, pol) slot unitary."""
    n = len(registry.paths) * 2
    total = np.eye(n, dtype=complex)
    for e in elements:
        e.check_unitary()
        idx = [registry.slot_index(p, pol) for p, pol in e.slots()]
        step = np.eye(n, dtype=complex)
        step[np.ix_(idx, idx)] = e.matrix()
        total = step @ total
    return total


def _csr_columns(registry: ModeRegistry, slot_u: np.ndarray):
    k = registry.internal
    n_modes = registry.n_modes
    ptr = np.zeros(n_modes + 1, np.int64)
    idx, val = [], []
    for m in range(n_modes):
        s, internal = divmod(m, k)
        col = slot_u[:, s]
        nz = np.nonzero(np.abs(col) > ENTRY_TOL)[0]
        idx.extend((nz * k + internal).tolist())
        val.extend(col[nz].tolist())
        ptr[m + 1] = len(idx)
    return ptr, np.array(idx, np.int32), np.array(val, complex)


def propagate(
    state: FockState, elements: Sequence[OpticalElement], veto=None
) -> FockState:
    """Apply a sequence of elements as one composed linear map."""
    state = _with_paths(state, elements)
    if not elements:
        return state
    u = slot_matrix(state.registry, elements)
    ptr, idx, val = _csr_columns(state.registry, u)
    keys, coeffs = kernel.transform(state.keys, state.coeffs, ptr, idx, val, veto)
    return FockState(state.registry, keys, coeffs)


def apply_element(state: FockState, element: OpticalElement) -> FockState:
    """Apply a single element; unregistered element paths raise ``KeyError``."""
    for p in element.paths():
        state.registry.path_index(p)
    return propagate(state, [element])


# ------------------------------------------------------------------ detection


@dataclass(frozen=True)
class Port:
    """A detected output path.

    ``analysis`` names a polarization basis ("HV", "DA" or "RL") resolved by
    two detectors behind the port; ``None`` means one polarization-blind
    detector.
    """

    path: str
    analysis: str | None = None

    def __post_init__(self):
        if self.analysis is not None and self.analysis not in ANALYSIS_PLATES:
            raise FockError(f"unknown analysis basis {self.analysis!r}")

    def plates(self) -> list[OpticalElement]:
        if self.analysis is None:
            return []
        return [type(p)(self.path, p.angle) for p in ANALYSIS_PLATES[self.analysis]]

    def detectors(self) -> list[tuple[str, tuple[str, ...]]]:
        if self.analysis is None:
            return [(self.path, POLARIZATIONS)]
        return [(self.path, ("H",)), (self.path, ("V",))]


@dataclass(frozen=True)
class DetectionPattern:
    """Coincidence condition: exactly one click in every station.

    By default each port is its own station; ``stations`` groups ports whose
    detectors jointly must fire exactly once (e.g. the four detectors of a
    single-photon Bell analyzer).  Threshold detectors accept several photons
    on the clicking detector; number-resolving ones demand exactly one.
    """

    ports: tuple[Port, ...]
    model: str = THRESHOLD
    stations: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "ports", tuple(self.ports))
        if self.model not in DETECTOR_MODELS:
            raise FockError(f"detector model must be one of {DETECTOR_MODELS}")
        if self.stations is None:
            object.__setattr__(self, "stations", tuple((i,) for i in range(len(self.ports))))
        else:
            object.__setattr__(self, "stations", tuple(tuple(s) for s in self.stations))
            flat = [i for s in self.stations for i in s]
            if sorted(flat) != list(range(len(self.ports))):
                raise FockError("stations must partition the ports")
        paths = [p.path for p in self.ports]
        if len(set(paths)) != len(paths):
            raise FockError(f"duplicate detector ports {paths}")

    def plates(self) -> list[OpticalElement]:
        return [e for p in self.ports for e in p.plates()]

    def station_detectors(self) -> list[list[tuple[str, tuple[str, ...]]]]:
        return [[d for i in s for d in self.ports[i].detectors()] for s in self.stations]


# ------------------------------------------------------------------- encoding


@dataclass(frozen=True)
class PolarizationQubit:
    label: str
    path: str

    @property
    def labels(self) -> tuple[str, ...]:
        return (self.label,)

    def slots(self) -> dict[tuple[str, str], tuple[int, ...]]:
        return {(self.path, "H"): (0,), (self.path, "V"): (1,)}


@dataclass(frozen=True)
class RailQubit:
    """One photon on two rails; optionally its polarization is a second qubit.

    With ``pol_label`` set the photon carries ``(pol_label, label)`` in that
    order: polarization first, then the rail.
    """

    label: str
    rail0: str
    rail1: str
    pol_label: str | None = None

    @property
    def labels(self) -> tuple[str, ...]:
        return (self.label,) if self.pol_label is None else (self.pol_label, self.label)

    def slots(self) -> dict[tuple[str, str], tuple[int, ...]]:
        out = {}
        for r, rail in enumerate((self.rail0, self.rail1)):
            for p, pol in enumerate(POLARIZATIONS):
                out[(rail, pol)] = (r,) if self.pol_label is None else (p, r)
        return out


Encoding = Sequence[PolarizationQubit | RailQubit]


def _encoding_tables(registry: ModeRegistry, encoding: Encoding):
    """Per-mode photon group, bit offset value, and a register."""
    register: list[str] = []
    for q in encoding:
        register.extend(q.labels)
    if len(set(register)) != len(register):
        raise FockError(f"duplicate qubit labels {register}")
    n = len(register)
    group = np.full(registry.n_modes, -1, np.int64)
    value = np.zeros(registry.n_modes, np.int64)
    pos = 0
    for g, q in enumerate(encoding):
        width = len(q.labels)
        for (path, pol), bits in q.slots().items():
            for m in registry.path_modes(path):
                if registry.mode(m).pol != pol:
                    continue
                if group[m] >= 0:
                    raise FockError(f"mode {registry.mode(m)} used by two qubits")
                group[m] = g
                v = 0
                for b in bits:
                    v = (v << 1) | b
                value[m] = v << (n - pos - width)
        pos += width
    return group, value, tuple(register)


def _readout(registry, pm, encoding):
    """Density matrix of the encoded qubits with everything else traced out."""
    group, value, register = _encoding_tables(registry, encoding)
    n_groups = len(encoding)
    valid = pm >= 0
    safe = np.where(valid, pm, 0)
    g = np.where(valid, group[safe], -1)
    counts = np.zeros((len(pm), n_groups), np.int64)
    for i in range(n_groups):
        counts[:, i] = (g == i).sum(axis=1)
    bad = np.nonzero((counts != 1).any(axis=1))[0]
    index = np.where(g >= 0, value[safe], 0).sum(axis=1)
    # environment signature: untouched env modes plus internal labels of qubit photons
    k = registry.internal
    code = np.where(g >= 0, -(g * k + safe % k) - 2, safe)
    code = np.where(valid, code, np.iinfo(np.int64).max)
    code.sort(axis=1)
    return register, index, code, bad


def to_qubits(state: FockState, encoding: Encoding) -> PureState | DensityOp:
    """Read the encoded qubits out of a post-selected Fock state.

    Every term must hold exactly one photon per encoded photon.  Photons in
    unencoded modes and all internal indices are traced out; the result is a
    :class:`PureState` when nothing needs tracing and a :class:`DensityOp`
    otherwise.
    """
    pm = kernel.photon_matrix(state.keys)
    amps = state.amplitudes
    register, index, code, bad = _readout(state.registry, pm, encoding)
    if len(bad):
        term = tuple(state.registry.mode(int(m)) for m in pm[bad[0]] if m >= 0)
        raise FockError(f"term {term} does not hold one photon per encoded qubit")
    dim = 2 ** len(register)
    _, env = np.unique(code, axis=0, return_inverse=True)
    env = env.ravel()
    a = np.zeros((env.max() + 1 if len(env) else 0, dim), complex)
    np.add.at(a, (env, index), amps)
    norm = float(np.sum(np.abs(a) ** 2))
    if norm <= 0:
        raise FockError("cannot read qubits out of the zero state")
    if a.shape[0] == 1:
        return PureState.from_unnormalized(register, a[0])
    return DensityOp.from_unnormalized(register, a.T @ a.conj())


@dataclass(frozen=True)
class PostSelection:
    state: FockState | None
    probability: float

    @property
    def ok(self) -> bool:
        return self.state is not None


def _station_tables(registry: ModeRegistry, stations: Sequence[Sequence], kinds):
    station = np.full(registry.n_modes, -1, np.int32)
    detector = np.full(registry.n_modes, -1, np.int32)
    for s, dets in enumerate(stations):
        for d, (path, pols) in enumerate(dets):
            for m in registry.path_modes(path):
                if registry.mode(m).pol in pols:
                    if station[m] >= 0:
                        raise FockError(f"mode {registry.mode(m)} in two stations")
                    station[m] = s
                    detector[m] = d
    return station, detector, np.asarray(kinds, np.int32)


def make_veto(registry, pattern: DetectionPattern | None, encoding: Encoding = ()):
    """Veto arrays for the kernels: detection stations plus one-photon qubits."""
    stations, kinds = [], []
    if pattern is not None:
        for dets in pattern.station_detectors():
            stations.append(dets)
            kinds.append(1 if pattern.model == PNR else 0)
    for q in encoding:
        paths = sorted({p for p, _ in q.slots()})
        stations.append([(p, POLARIZATIONS) for p in paths])
        kinds.append(1)
    return _station_tables(registry, stations, kinds) if stations else None


def _clicks(registry, pm, pattern: DetectionPattern):
    dets = pattern.station_detectors()
    kinds = [1 if pattern.model == PNR else 0] * len(dets)
    station, detector, _ = _station_tables(registry, dets, kinds)
    valid = pm >= 0
    safe = np.where(valid, pm, 0)
    st = np.where(valid, station[safe], -1)
    de = np.where(valid, detector[safe], -1)
    n_st = len(dets)
    out = np.full((len(pm), n_st), -1, np.int64)
    ok = np.ones(len(pm), bool)
    for s in range(n_st):
        here = st == s
        n = here.sum(axis=1)
        dmax = np.where(here, de, -1).max(axis=1, initial=-1)
        dmin = np.where(here, de, 1 << 30).min(axis=1, initial=1 << 30)
        good = (n >= 1) & (dmax == dmin)
        if pattern.model == PNR:
            good &= n == 1
        ok &= good
        out[:, s] = dmax
    return out, ok


def post_select(state: FockState, pattern: DetectionPattern) -> PostSelection:
    """Project onto the terms giving exactly one click per station.

    Analysis wave plates of the ports are applied first.  The result is the
    renormalized surviving component and its probability.
    """
    for p in pattern.ports:
        state.registry.path_index(p.path)
    state = propagate(state, pattern.plates())
    pm = kernel.photon_matrix(state.keys)
    _, ok = _clicks(state.registry, pm, pattern)
    keep = FockState(state.registry, state.keys[ok], state.coeffs[ok])
    prob = keep.norm_squared()
    if prob <= NORM_TOL**2:
        return PostSelection(None, 0.0)
    return PostSelection(keep.normalized(), prob)


@dataclass(frozen=True)
class Branch:
    """One coincidence outcome: clicked detector per station and the
    unnormalized qubit state (trace = probability)."""

    clicks: tuple[int, ...]
    probability: float
    matrix: np.ndarray = field(repr=False)
    register: tuple[str, ...] = ()

    def state(self) -> DensityOp:
        return DensityOp.from_unnormalized(self.register, self.matrix)


def coincidence_branches(
    state: FockState,
    pattern: DetectionPattern | None,
    encoding: Encoding,
    analyzed: bool = False,
) -> dict[tuple[int, ...], Branch]:
    """Split a propagated state by click pattern and read out the qubits.

    Terms violating the coincidence condition or the one-photon-per-qubit
    requirement are discarded; that loss is the post-selection failure.
    ``analyzed=True`` means the analysis plates of the ports were already
    part of the propagation.
    """
    if pattern is not None and not analyzed:
        state = propagate(state, pattern.plates())
    pm = kernel.photon_matrix(state.keys)
    amps = state.amplitudes
    if pattern is not None and pattern.ports:
        clicks, ok = _clicks(state.registry, pm, pattern)
    else:
        clicks, ok = np.zeros((len(pm), 0), np.int64), np.ones(len(pm), bool)
    register, index, code, bad = _readout(state.registry, pm, encoding)
    ok[bad] = False
    pm, amps, clicks, index, code = pm[ok], amps[ok], clicks[ok], index[ok], code[ok]
    dim = 2 ** len(register)
    out = {}
    if not len(pm):
        return out
    patterns, which = np.unique(clicks, axis=0, return_inverse=True)
    which = which.ravel()
    for w, pat in enumerate(patterns):
        sel = which == w
        _, env = np.unique(code[sel], axis=0, return_inverse=True)
        env = env.ravel()
        a = np.zeros((env.max() + 1, dim), complex)
        np.add.at(a, (env, index[sel]), amps[sel])
        rho = a.T @ a.conj()
        p = float(np.real(np.trace(rho)))
        key = tuple(int(x) for x in pat)
        out[key] = Branch(key, p, rho, register)
    return out
