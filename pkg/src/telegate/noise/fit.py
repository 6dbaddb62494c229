"""Grid search of noise parameters against target fidelities.

The search is exhaustive and returns every grid point with its residual, so
nothing is hidden behind an optimizer.  Fitted values are artifacts of the
noise model, not measured properties of an experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .params import NoiseParams

Model = Callable[[NoiseParams], Mapping[str, float]]


@dataclass(frozen=True)
class FitRow:
    params: NoiseParams
    predicted: dict
    residual: float

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "predicted": self.predicted,
                "residual": self.residual}


@dataclass(frozen=True)
class FitReport:
    targets: dict
    rows: tuple[FitRow, ...]

    @property
    def best(self) -> FitRow:
        # first minimum in grid order keeps ties deterministic
        return min(self.rows, key=lambda r: r.residual)

    def to_dict(self) -> dict:
        return {
            "targets": self.targets,
            "best": self.best.to_dict(),
            "rows": [r.to_dict() for r in self.rows],
            "note": "fitted parameters are model artifacts",
        }


def fit_report(targets: Mapping[str, float], grid: Iterable[NoiseParams], model: Model) -> FitReport:
    """Root-mean-square residual of ``model`` against ``targets`` at every
    grid point."""
    grid = list(grid)
    if not grid:
        raise ValueError("the parameter grid is empty")
    if not targets:
        raise ValueError("no target values")
    rows = []
    for params in grid:
        predicted = {k: float(v) for k, v in model(params).items()}
        missing = set(targets) - set(predicted)
        if missing:
            raise KeyError(f"model does not predict {sorted(missing)}")
        res = math.sqrt(np.mean([(predicted[k] - t) ** 2 for k, t in targets.items()]))
        rows.append(FitRow(params, predicted, res))
    return FitReport(dict(targets), tuple(rows))


def axis_grid(base: NoiseParams, axis: str, values: Sequence[float]) -> list[NoiseParams]:
    """Copies of ``base`` with one field swept over ``values``."""
    return [base.replace(**{axis: v}) for v in values]


def is_monotone_nonincreasing(values: Sequence[float], tol: float = 1e-12) -> bool:
    v = np.asarray(values, float)
    return bool(np.all(np.diff(v) <= tol))
