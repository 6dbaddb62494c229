"""Resource-state preparation by exact Fock propagation of the optical
pipelines.

Each preparation post-selects one photon per qubit of the resource and
reports the resulting (possibly mixed) four-qubit state together with the
post-selection probability.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..qubit import DensityOp, PureState, fidelity
from .optics import (
    BALANCE_PPBS,
    IDEAL_PPBS,
    cluster_setup,
    evaluate,
    hyper_setup,
    lambda_setup,
)
from .states import (
    CNOT_RESOURCE,
    CPHASE_RESOURCE,
    chi_prime_state,
    chi_state,
    lambda_state,
)

RESOURCE_KINDS = ("chi", "chi'", "lambda")

_TARGETS = {"chi": chi_state, "chi'": chi_prime_state, "lambda": lambda_state}


class PreparationError(RuntimeError):
    """Raised when a pipeline never yields the required coincidence."""


@dataclass(frozen=True)
class ResourceState:
    kind: str
    state: DensityOp | PureState
    probability: float

    def __post_init__(self):
        if self.kind not in RESOURCE_KINDS:
            raise ValueError(f"unknown resource kind {self.kind!r}")
        if not 0.0 < self.probability <= 1.0 + 1e-12:
            raise ValueError(f"preparation probability {self.probability} outside (0, 1]")

    @property
    def register(self) -> tuple[str, ...]:
        return self.state.register

    def target(self) -> PureState:
        return _TARGETS[self.kind](self.register)

    def fidelity(self) -> float:
        """Overlap with the analytic resource on the same register."""
        return fidelity(self.state, self.target())


def ideal_resource(kind: str) -> ResourceState:
    """The analytic resource, with unit probability."""
    if kind not in _TARGETS:
        raise ValueError(f"unknown resource kind {kind!r}")
    return ResourceState(kind, _TARGETS[kind](), 1.0)


def _single_branch(setup, kind: str, order) -> ResourceState:
    branches = evaluate(setup)
    br = branches.get(())
    if br is None or br.probability <= 0.0:
        raise PreparationError(f"{kind} pipeline has zero post-selection probability")
    state = br.state()
    if tuple(state.register) != tuple(order):
        state = state.reorder(order)
    return ResourceState(kind, state, br.probability)


def prepare_cluster_chi(
    ppbs=IDEAL_PPBS,
    overlap: float = 1.0,
    waveplates: bool = True,
    balance=BALANCE_PPBS,
) -> ResourceState:
    """Four-photon cluster from two Phi+ pairs and a PPBS network.

    ``ppbs`` holds the (T_H, T_V) transmissions of the two input ports of
    the overlapping splitter; ``overlap`` is the internal-mode overlap of the
    two interfering photons.
    """
    return _single_branch(cluster_setup(ppbs, overlap, waveplates, balance), "chi", CNOT_RESOURCE)


def prepare_lambda(overlap: float = 1.0) -> ResourceState:
    """Four-photon polarization state from one Phi+ pair and two |+> photons
    overlapped on two polarizing beamsplitters."""
    return _single_branch(lambda_setup(overlap), "lambda", CPHASE_RESOURCE)


def prepare_hyper_chi(overlap: float = 1.0) -> ResourceState:
    """The lambda state with photons 3 and 5 split into spatial rails, giving
    the polarization-spatial resource of the C-Phase gate."""
    return _single_branch(hyper_setup(overlap), "chi'", CPHASE_RESOURCE)
