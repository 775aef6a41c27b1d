"""Reconstruction of missing services exports."""
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .config import FOREST, INTERPOLATE, KNN, METHODS, ImputerConfig
from .evaluate import MaeReport, evaluate_mae, evaluation_panel
from .forest import RandomForest, RegressionTree, forest_impute, forest_reconstruct
from .interpolate import interpolate_forward, interpolate_series
from .knn import knn_impute, knn_reconstruct, target_codes

RESIDUAL_COLUMNS = ["country", "activity", "year", "reason"]


@dataclass(frozen=True, eq=False)
class Imputation:
    """Reconstructed panel plus the cells that could not be filled."""

    panel: object
    residuals: pd.DataFrame
    flags: dict = field(default_factory=dict)

    def residuals_to_csv(self, path):
        self.residuals.to_csv(path, index=False, lineterminator="\n")


def _leftover(before, after, codes, reason):
    rows = []
    idx = [after.activities.index(c) for c in codes]
    for j, code in zip(idx, codes):
        still = np.isnan(after.values[:, j, :])
        for i, k in zip(*np.nonzero(still)):
            rows.append((after.countries[i], code, after.years[k], reason))
    return rows


def impute(panel, tree, cfg, jobs=1):
    """Run one reconstruction method on the complete-set codes of ``panel``.

    Present cells are never changed and imputed values are never negative.

    Returns
    -------
    Imputation
    """
    targets = target_codes(panel, tree)
    flags = {}
    if cfg.method == INTERPOLATE:
        out = interpolate_forward(panel.select(activities=targets))
        values = np.array(panel.values)
        cols = [panel.activities.index(c) for c in targets]
        values[:, cols, :] = out.values
        result = panel.with_values(values)
        residual = _leftover(panel, result, targets, "no previous observation")
    elif cfg.method == KNN:
        values, report = knn_reconstruct(panel, tree, cfg)
        result = panel.with_values(values)
        residual = list(report)
    else:
        values, flags = forest_reconstruct(panel, cfg, targets, jobs)
        result = panel.with_values(values)
        residual = _leftover(panel, result, targets, "no previous observation")
    df = pd.DataFrame(residual, columns=RESIDUAL_COLUMNS).sort_values(
        ["country", "activity", "year"], kind="stable", ignore_index=True)
    return Imputation(result, df, flags)


__all__ = [
    "ImputerConfig", "INTERPOLATE", "KNN", "FOREST", "METHODS",
    "Imputation", "impute",
    "interpolate_forward", "interpolate_series",
    "knn_impute", "knn_reconstruct",
    "forest_impute", "forest_reconstruct", "RandomForest", "RegressionTree",
    "MaeReport", "evaluate_mae", "evaluation_panel",
]
