"""Noisy gate runs at two levels of description.

``physical`` propagates every emission configuration of the sources through
the full optical network of a gate, with threshold detectors and exact
phase-drift averaging.  Its branch operators are absolute event
probabilities per pulse.

``qubit`` prepares the resource state through its (noisy) optical pipeline
and then teleports at the qubit level, with the drifting phase acting as
dephasing of the Bell analyzers.  Double-pair emission is not part of this
level.
"""

from __future__ import annotations

from dataclasses import replace
from functools import lru_cache

import numpy as np

from ..fock.sources import set_internal_overlap
from ..protocols.gate import GateRunResult, gate_result_from_matrices, run_gate
from ..protocols.optics import cnot_setup, cphase_setup, evaluate
from ..protocols.resources import ResourceState, prepare_cluster_chi, prepare_hyper_chi
from ..qubit import PureState
from .emission import MAX_PHOTONS, emission_configs
from .params import IDEAL, NoiseParams

LEVELS = ("physical", "qubit")
NATIVE_BSM = {"cnot": "partial", "cphase": "complete"}

# interference points of each network, named by the two sources they join
INTERFERENCE_POINTS = {
    "cnot": {"ppbs": ("A", "B"), "bsm13": ("A", "C"), "bsm25": ("B", "C")},
    "cphase": {"pbs": ("A", "B")},
}


def physical_setup(gate: str, inp: PureState, params: NoiseParams = IDEAL):
    if gate == "cnot":
        setup = cnot_setup(inp, ppbs=params.ppbs_ports, overlap=params.overlap)
    elif gate == "cphase":
        setup = cphase_setup(inp, overlap=params.overlap)
    else:
        raise ValueError(f"unknown gate {gate!r}")
    sources = setup.sources
    for pair, v in params.pair_overlaps:
        sources = set_internal_overlap(sources, pair, v)
    return replace(setup, sources=sources)


def physical_matrices(
    gate: str, inp: PureState, params: NoiseParams = IDEAL, max_photons: int = MAX_PHOTONS
) -> tuple[dict, dict]:
    """Per-outcome unnormalized output operators summed over emission
    configurations, plus bookkeeping of the configurations used."""
    setup = physical_setup(gate, inp, params)
    configs, dropped = emission_configs(len(setup.sources.sources), params.p2, max_photons)
    acc: dict = {}
    for cfg in configs:
        branches = evaluate(setup, cfg.pairs, drift_sigma=params.phase_drift)
        for key, br in branches.items():
            m = cfg.weight * br.matrix
            acc[key] = acc[key] + m if key in acc else m
    info = {
        "configs": [{"pairs": list(c.pairs), "weight": c.weight} for c in configs],
        "dropped_weight": dropped,
    }
    return acc, info


@lru_cache(maxsize=256)
def _resource(gate: str, ppbs, overlap: float, pair_overlap: float | None) -> ResourceState:
    v = overlap if pair_overlap is None else pair_overlap
    if gate == "cnot":
        return prepare_cluster_chi(ppbs, v)
    if gate == "cphase":
        return prepare_hyper_chi(v)
    raise ValueError(f"unknown gate {gate!r}")


def noisy_resource(gate: str, params: NoiseParams = IDEAL) -> ResourceState:
    """Resource prepared with the PPBS and overlap of ``params``; the overlap
    of the resource's own interference point overrides the uniform one."""
    point = INTERFERENCE_POINTS[gate]["ppbs" if gate == "cnot" else "pbs"]
    pair = dict((tuple(sorted(p)), v) for p, v in params.pair_overlaps).get(tuple(sorted(point)))
    return _resource(gate, params.ppbs_ports, params.overlap, pair)


def gate_run(
    gate: str,
    inp: PureState,
    params: NoiseParams = IDEAL,
    level: str = "physical",
    bsm: str | None = None,
    corrections: bool = True,
) -> GateRunResult:
    """One noisy gate run with enumerated outcomes."""
    if level == "physical":
        if bsm not in (None, NATIVE_BSM[gate]):
            raise ValueError(f"the optical {gate} network has a {NATIVE_BSM[gate]} BSM")
        matrices, info = physical_matrices(gate, inp, params)
        meta = {"level": level, **info}
        return gate_result_from_matrices(gate, inp, matrices, corrections, meta)
    if level == "qubit":
        resource = noisy_resource(gate, params)
        res = run_gate(
            gate, inp, resource, bsm or NATIVE_BSM[gate], corrections,
            dephasing=params.phase_drift,
        )
        return replace(res, meta={"level": level, "resource_probability": resource.probability})
    raise ValueError(f"level must be one of {LEVELS}, got {level!r}")


def zero_noise_gap(gate: str, inp: PureState) -> float:
    """Largest deviation between the ideal physical run (divided by the
    resource preparation probability) and the qubit-level protocol with the
    native Bell analyzer, over all heralded outcomes."""
    phys, _ = physical_matrices(gate, inp, IDEAL)
    resource = noisy_resource(gate, IDEAL)
    ref = run_gate(gate, inp, resource, NATIVE_BSM[gate], corrections=False)
    gap = 0.0
    for key, br in ref.branches.items():
        if br.failed:
            continue
        want = br.probability * br.state.matrix if br.state is not None else 0.0
        have = phys.get(key, 0.0) / resource.probability
        gap = max(gap, float(np.abs(np.asarray(have) - want).max()))
    return gap
