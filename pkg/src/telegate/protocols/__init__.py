"""Teleported C-NOT and C-Phase gates: resources, Bell measurements,
corrections and reference unitaries."""

from .bsm import (
    bsm_effects,
    bsm_spatial_polarization,
    bsm_two_photon,
    sagnac_effects,
    sagnac_unitary,
)
from .corrections import (
    FAIL,
    OUTCOMES,
    CorrectionError,
    cnot_correction,
    correction,
    cphase_correction,
    diff_tables,
    oracle_table,
)
from .gate import BranchResult, GateRunResult, gate_result_from_matrices, run_gate
from .resources import (
    ResourceState,
    ideal_resource,
    prepare_cluster_chi,
    prepare_hyper_chi,
    prepare_lambda,
)
from .states import (
    chi_prime_state,
    chi_state,
    cnot_reference,
    cphase_reference,
    lambda_state,
    named_state,
    product_input,
    random_pure_state,
    reference_output,
)

__all__ = [
    "bsm_effects", "bsm_spatial_polarization", "bsm_two_photon", "sagnac_effects",
    "sagnac_unitary",
    "FAIL", "OUTCOMES", "CorrectionError", "cnot_correction", "correction",
    "cphase_correction", "diff_tables", "oracle_table",
    "BranchResult", "GateRunResult", "gate_result_from_matrices", "run_gate",
    "ResourceState", "ideal_resource", "prepare_cluster_chi", "prepare_hyper_chi",
    "prepare_lambda",
    "chi_prime_state", "chi_state", "cnot_reference", "cphase_reference", "lambda_state",
    "named_state", "product_input", "random_pure_state", "reference_output",
]
