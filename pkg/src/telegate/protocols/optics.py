"""Optical networks of both gates, shared by resource preparation and the
physical noise engine.

Path names follow the photon numbering.  Auxiliary paths: ``"4~x"``/
``"6~x"`` are the unused outputs of the balancing splitters, ``"3v"``/
``"5v"`` the second rails of photons 3 and 5.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..fock.elements import HWP, PBS, PPBS, OpticalElement, PathPhase, Phase, prepare_plates
from ..fock.sources import PairSource, SourceConfig, uniform_overlap
from ..fock.state import THRESHOLD, DetectionPattern, PolarizationQubit, Port, RailQubit
from ..qubit import PureState, RegisterError, single_qubit
from .bsm import SAGNAC_DETECTORS

IDEAL_PPBS = ((1.0, 1.0 / 3.0), (1.0, 1.0 / 3.0))
MEASURED_PPBS = ((0.95, 0.30), (0.96, 0.35))


@dataclass(frozen=True)
class Setup:
    """Sources, network, detection and qubit readout of one experiment."""

    sources: SourceConfig
    elements: tuple[OpticalElement, ...]
    pattern: DetectionPattern | None
    encoding: tuple
    outcome: Callable[[tuple[int, ...]], tuple[str, ...]] = field(default=lambda c: ())
    # slowly drifting phases: element index where they act and, per drifting
    # arm, the (path, polarization) slots picking up the phase
    drift_at: int = 0
    drift_slots: tuple[tuple[tuple[str, str], ...], ...] = ()


# ------------------------------------------------------------------ cluster


BALANCE_PPBS = (1.0 / 3.0, 1.0)


def cluster_elements(
    ppbs=IDEAL_PPBS, waveplates: bool = True, balance=BALANCE_PPBS
) -> list[OpticalElement]:
    """PPBS overlap of arms 4 and 6, balancing PPBS' in both outputs, and
    Hadamard wave plates on arms 3 and 4."""
    (ta_h, ta_v), (tb_h, tb_v) = ppbs
    main = PPBS("4", "6", ta_h, ta_v, None if (ta_h, ta_v) == (tb_h, tb_v) else (tb_h, tb_v))
    els = [main, PPBS("4", "4~x", *balance), PPBS("6", "6~x", *balance)]
    if waveplates:
        els += [HWP("3", 22.5), HWP("4", 22.5)]
    return els


def cluster_sources() -> list[PairSource]:
    return [PairSource.entangled("A", ("3", "4")), PairSource.entangled("B", ("5", "6"))]


def cluster_setup(
    ppbs=IDEAL_PPBS, overlap: float = 1.0, waveplates: bool = True, balance=BALANCE_PPBS
) -> Setup:
    return Setup(
        uniform_overlap(cluster_sources(), overlap),
        tuple(cluster_elements(ppbs, waveplates, balance)),
        None,
        tuple(PolarizationQubit(q, q) for q in ("3", "4", "5", "6")),
    )


# ------------------------------------------------------------ hyper resource


def lambda_elements() -> list[OpticalElement]:
    """PBS overlap of photons 4 and 6, a Hadamard plate on 6, PBS overlap of
    6 and 5, then sign-compensating plates on photons 3 and 5."""
    return [PBS("4", "6"), HWP("6", 22.5), PBS("6", "5"), HWP("3", 0.0), HWP("5", 0.0)]


def rail_elements(photon: str) -> list[OpticalElement]:
    """Split photon ``photon`` into rails by polarization; the second rail is
    rotated back to H and its reflection phase removed."""
    v = f"{photon}v"
    return [PBS(photon, v), HWP(v, 45.0), PathPhase(v, -np.pi / 2)]


def hyper_sources() -> list[PairSource]:
    return [PairSource.entangled("A", ("3", "6")), PairSource.product("B", ("4", "5"), "+", "+")]


def lambda_setup(overlap: float = 1.0) -> Setup:
    return Setup(
        uniform_overlap(hyper_sources(), overlap),
        tuple(lambda_elements()),
        None,
        (
            PolarizationQubit("3", "3"),
            PolarizationQubit("4'", "4"),
            PolarizationQubit("5", "5"),
            PolarizationQubit("6'", "6"),
        ),
    )


def hyper_setup(overlap: float = 1.0) -> Setup:
    return Setup(
        uniform_overlap(hyper_sources(), overlap),
        tuple(lambda_elements() + rail_elements("3") + rail_elements("5")),
        None,
        (
            RailQubit("3", "3", "3v"),
            PolarizationQubit("4'", "4"),
            RailQubit("5", "5", "5v"),
            PolarizationQubit("6'", "6"),
        ),
    )


# ------------------------------------------------------------ gate networks


def _pbs_bsm(a: str, b: str, drift: float = 0.0) -> list[OpticalElement]:
    els = [Phase(a, drift)] if drift else []
    # the double reflection of V V gives -1; a HWP at 0 degrees restores the sign
    return els + [PBS(a, b), HWP(b, 0.0)]


def _pbs_outcome(d_a: int, d_b: int) -> str:
    return "Phi+" if d_a == d_b else "Phi-"


def product_amplitudes(state: PureState) -> tuple[np.ndarray, np.ndarray]:
    """Factor a two-qubit product state; entangled inputs raise."""
    m = state.amplitudes.reshape(2, 2)
    u, s, vh = np.linalg.svd(m)
    if s[1] > 1e-9:
        raise RegisterError("this optical input stage prepares product states only")
    return u[:, 0] * s[0], vh[0]


def cnot_setup(
    inp: PureState,
    ppbs=IDEAL_PPBS,
    overlap: float = 1.0,
    drift: tuple[float, float] = (0.0, 0.0),
) -> Setup:
    """Six-photon teleported C-NOT with polarizing-beamsplitter BSMs.

    The input photons 1 (target) and 2 (control) come from a third source
    whose joint polarization state is the gate input.
    """
    src_in = PairSource("C", ("1", "2"), inp.amplitudes.reshape(2, 2))
    sources = cluster_sources() + [src_in]
    els = cluster_elements(ppbs) + _pbs_bsm("1", "3", drift[0]) + _pbs_bsm("2", "5", drift[1])
    pattern = DetectionPattern(
        (Port("1", "DA"), Port("3", "DA"), Port("2", "DA"), Port("5", "DA")), THRESHOLD
    )

    def outcome(clicks):
        d1, d3, d2, d5 = clicks
        return (_pbs_outcome(d1, d3), _pbs_outcome(d2, d5))

    return Setup(
        uniform_overlap(sources, overlap),
        tuple(els),
        pattern,
        (PolarizationQubit("4", "4"), PolarizationQubit("6", "6")),
        outcome,
        0,
        ((("1", "V"),), (("2", "V"),)),
    )


def _sagnac(photon: str, drift: float = 0.0) -> list[OpticalElement]:
    v = f"{photon}v"
    els = [PathPhase(v, drift)] if drift else []
    return els + [PBS(photon, v), Phase(photon, -np.pi / 2), Phase(v, -np.pi / 2)]


def cphase_setup(
    inp: PureState, overlap: float = 1.0, drift: tuple[float, float] = (0.0, 0.0)
) -> Setup:
    """Four-photon teleported C-Phase with single-photon Bell analyzers.

    The inputs are the polarizations of photons 3 (target) and 5 (control),
    written by wave plates on both rails after the rails were reset to H.
    """
    t, c = product_amplitudes(inp)
    els = lambda_elements() + rail_elements("3") + rail_elements("5")
    for photon, amp in (("3", t), ("5", c)):
        for path in (photon, f"{photon}v"):
            els += prepare_plates(path, amp)
    drift_at = len(els)
    els += _sagnac("3", drift[0]) + _sagnac("5", drift[1])
    pattern = DetectionPattern(
        (Port("3", "DA"), Port("3v", "DA"), Port("5", "DA"), Port("5v", "DA")),
        THRESHOLD,
        stations=((0, 1), (2, 3)),
    )

    def outcome(clicks):
        return (SAGNAC_DETECTORS[clicks[0]], SAGNAC_DETECTORS[clicks[1]])

    return Setup(
        uniform_overlap(hyper_sources(), overlap),
        tuple(els),
        pattern,
        (PolarizationQubit("4'", "4"), PolarizationQubit("6'", "6")),
        outcome,
        drift_at,
        tuple(((f"{q}v", "H"), (f"{q}v", "V")) for q in ("3", "5")),
    )


def polarization_vector(spec) -> np.ndarray:
    return single_qubit(spec) if isinstance(spec, str) else np.asarray(spec, complex)


def drift_weights(order: int, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights averaging a trigonometric polynomial of ``order``
    over a Gaussian phase of standard deviation ``sigma`` exactly.

    With ``n = 2 * order + 1`` equispaced nodes every Fourier component up to
    ``order`` is resolved, and the Gaussian average of ``exp(i m phi)`` is
    ``exp(-sigma**2 m**2 / 2)``.
    """
    n = 2 * order + 1
    nodes = 2 * np.pi * np.arange(n) / n
    m = np.arange(-order, order + 1)
    damp = np.exp(-0.5 * sigma**2 * m**2)
    weights = (damp[None, :] * np.cos(np.outer(nodes, m))).sum(1) / n
    return nodes, weights


def _slot_columns(registry, slots) -> list[int]:
    k = registry.internal
    return [registry.slot_index(p, pol) * k + i for p, pol in slots for i in range(k)]


def _merge(branches: dict, outcome, weight: float = 1.0, into: dict | None = None) -> dict:
    merged = {} if into is None else into
    for clicks, br in branches.items():
        key = outcome(clicks)
        m = weight * br.matrix
        if key in merged:
            prev = merged[key]
            merged[key] = type(br)(clicks, prev.probability + weight * br.probability,
                                   prev.matrix + m, br.register)
        else:
            merged[key] = type(br)(clicks, weight * br.probability, m, br.register)
    return merged


def evaluate(
    setup: Setup,
    pairs: Sequence[int] | None = None,
    prune: bool = True,
    drift_sigma: float = 0.0,
):
    """Propagate an emission configuration through ``setup``.

    Returns ``{outcome: Branch}`` with unnormalized output operators whose
    traces are the joint probabilities of emission-conditioned coincidences.
    ``drift_sigma`` averages the drifting arms of the setup over independent
    Gaussian phases.  The state is split into sectors of fixed photon number
    on those arms, each sector is propagated once, and the phase average is
    an exact finite quadrature over recombined sectors.
    """
    from ..fock import kernel
    from ..fock.sources import emission_state
    from ..fock.state import FockState, coincidence_branches, make_veto, propagate

    state = emission_state(setup.sources, pairs)
    elements = list(setup.elements)
    if setup.pattern is not None:
        elements += setup.pattern.plates()
    paths = [p for e in elements for p in e.paths() + e.aux_paths()]
    state = state.with_registry(state.registry.extend(paths))
    veto = make_veto(state.registry, setup.pattern, setup.encoding) if prune else None
    if not drift_sigma or not setup.drift_slots:
        out_state = propagate(state, elements, veto)
        branches = coincidence_branches(out_state, setup.pattern, setup.encoding, analyzed=True)
        return _merge(branches, setup.outcome)
    if drift_sigma < 0:
        raise ValueError("drift_sigma must be non-negative")

    pre, post = elements[: setup.drift_at], elements[setup.drift_at:]
    state = propagate(state, pre)
    reg = state.registry
    pm = kernel.photon_matrix(state.keys)
    sectors = np.stack(
        [np.isin(pm, _slot_columns(reg, slots)).sum(1) for slots in setup.drift_slots], 1
    )
    labels, which = np.unique(sectors, axis=0, return_inverse=True)
    which = which.ravel()
    outs = []
    for w in range(len(labels)):
        sel = which == w
        sub = FockState(reg, state.keys[sel], state.coeffs[sel])
        outs.append(propagate(sub, post, veto))
    reg = outs[0].registry
    keys = np.unique(np.concatenate([o.keys for o in outs]))
    table = np.zeros((len(outs), len(keys)), complex)
    for w, o in enumerate(outs):
        table[w, np.searchsorted(keys, o.keys)] = o.coeffs

    grids = [drift_weights(int(labels[:, i].max()), drift_sigma) for i in range(labels.shape[1])]
    merged: dict = {}
    for combo in np.ndindex(*(len(g[0]) for g in grids)):
        phis = np.array([grids[i][0][k] for i, k in enumerate(combo)])
        weight = float(np.prod([grids[i][1][k] for i, k in enumerate(combo)]))
        phase = np.exp(1j * labels @ phis)
        coeffs = phase @ table
        node = FockState(reg, keys, coeffs)
        branches = coincidence_branches(node, setup.pattern, setup.encoding, analyzed=True)
        _merge(branches, setup.outcome, weight, merged)
    return merged
