"""Physical noise models and the reproducible shot engine."""

from .emission import EmissionConfig, emission_configs, sample_emission
from .engine import (
    INTERFERENCE_POINTS,
    LEVELS,
    NATIVE_BSM,
    gate_run,
    noisy_resource,
    physical_matrices,
    physical_setup,
    zero_noise_gap,
)
from .fit import FitReport, FitRow, axis_grid, fit_report, is_monotone_nonincreasing
from .params import IDEAL, NoiseError, NoiseParams
from .shots import BLOCK, ShotResult, binomial_sd, block_rng, run_shots, sample_categorical

__all__ = [
    "EmissionConfig", "emission_configs", "sample_emission",
    "INTERFERENCE_POINTS", "LEVELS", "NATIVE_BSM", "gate_run", "noisy_resource",
    "physical_matrices", "physical_setup", "zero_noise_gap",
    "FitReport", "FitRow", "axis_grid", "fit_report", "is_monotone_nonincreasing",
    "IDEAL", "NoiseError", "NoiseParams",
    "BLOCK", "ShotResult", "binomial_sd", "block_rng", "run_shots", "sample_categorical",
]
