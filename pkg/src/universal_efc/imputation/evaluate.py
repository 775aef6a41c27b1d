"""Masked-replica benchmark of the reconstruction methods."""
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .._parallel import map_tasks
from ..errors import CoverageError, EvaluationSetError
from ..panel import DEFAULT_MASK_FRACTION, mask_random
from ..taxonomy import rollup
from .config import ImputerConfig


@dataclass(frozen=True, eq=False)
class MaeReport:
    """Per-replica, per-layer mean absolute errors.

    ``rows`` has columns ``method, replica, layer, mae, cells, unfilled``;
    ``cells`` counts the cells that depend on a hidden leaf and
    ``unfilled`` those the method left missing (they are not part of the
    MAE). A layer with no affected cell in a replica has ``mae`` NaN.
    """

    rows: pd.DataFrame
    replicas: int

    def aggregate(self, quantiles=(0.25, 0.75)):
        """``method, layer, mean_mae, q25, q75`` over replicas."""
        lo, hi = quantiles
        g = self.rows.groupby(["method", "layer"], sort=False)["mae"]
        out = g.agg(mean_mae="mean",
                    q25=lambda s: s.quantile(lo),
                    q75=lambda s: s.quantile(hi)).reset_index()
        return out

    def mean_mae(self, method):
        """Mean MAE of one method over every replica and layer."""
        return float(self.rows.loc[self.rows["method"] == method, "mae"].mean())

    def to_csv(self, path):
        self.rows[["method", "replica", "layer", "mae"]].to_csv(
            path, index=False, lineterminator="\n")

    def aggregate_to_csv(self, path):
        self.aggregate().to_csv(path, index=False, lineterminator="\n")


def evaluation_panel(panel, tree):
    """Fully observed countries, leaves plus rolled-up aggregates.

    Raises
    ------
    EvaluationSetError
        If no country observes every complete-set code in every year.
    """
    absent = [c for c in tree.complete_set if c not in panel.activities]
    if absent:
        raise CoverageError(f"complete-set codes absent from panel: {absent}")
    leaves = panel.select(activities=tree.complete_set)
    full = [c for i, c in enumerate(leaves.countries) if not leaves.missing[i].any()]
    if not full:
        raise EvaluationSetError("no country has fully observed complete-set series")
    return rollup(tree, leaves.select(countries=full))


def _method(m):
    if isinstance(m, ImputerConfig):
        return m.label, m
    name, func = m
    return str(name), func


def _run_method(method, masked, tree):
    from . import impute
    if isinstance(method, ImputerConfig):
        return impute(masked, tree, method).panel
    return method(masked, tree)


def _replica(task):
    truth, tree, methods, fraction, seed, replica = task
    leaf_cols = [truth.activities.index(c) for c in tree.complete_set]
    eligible = np.zeros(truth.shape, bool)
    eligible[:, leaf_cols, :] = True
    masked, mask = mask_random(truth, fraction, seed, eligible=eligible)
    truth_roll = truth.values
    codes = truth.activities
    # cells whose value depends on a hidden leaf
    affected = np.zeros(truth.shape, bool)
    for j, code in enumerate(codes):
        kids = tree.complete_descendants(code)
        cols = [codes.index(k) for k in kids]
        affected[:, j, :] = mask.cells[:, cols, :].any(axis=1)
    layers = sorted({tree.layer(c) for c in codes})
    rows = []
    for name, method in methods:
        out = _run_method(method, masked, tree)
        leaves = out.select(activities=tree.complete_set)
        rebuilt = rollup(tree, leaves).select(activities=codes).values
        for layer in layers:
            cols = [j for j, c in enumerate(codes) if tree.layer(c) == layer]
            sel = affected[:, cols, :]
            if not sel.any():
                # nothing hidden below this layer: keep one row per replica
                rows.append((name, replica, layer, np.nan, 0, 0))
                continue
            est = rebuilt[:, cols, :][sel]
            ref = truth_roll[:, cols, :][sel]
            ok = ~np.isnan(est)
            mae = float(np.abs(est[ok] - ref[ok]).mean()) if ok.any() else np.nan
            rows.append((name, replica, layer, mae, int(sel.sum()), int((~ok).sum())))
    return rows


def evaluate_mae(panel, tree, methods, replicas=100, fraction=DEFAULT_MASK_FRACTION, seed=0,
                 jobs=1):
    """Benchmark reconstruction methods on artificially hidden cells.

    The evaluation set holds the countries whose complete-set series are
    fully observed, with every aggregate rebuilt from the leaves. Each
    replica hides ``fraction`` of the leaf cells, runs every method, rolls
    the reconstruction up the tree and scores each layer on the cells that
    depend on a hidden leaf.

    Parameters
    ----------
    methods : list
        :class:`ImputerConfig` objects or ``(name, callable)`` pairs where
        ``callable(masked_panel, tree)`` returns a reconstructed panel.
    replicas : int
    fraction : float
    seed : int
        Master seed; replica ``r`` uses the stream ``SeedSequence([seed, r])``.

    Returns
    -------
    MaeReport
    """
    truth = evaluation_panel(panel, tree)
    named = [_method(m) for m in methods]
    tasks = [(truth, tree, named, fraction, np.random.SeedSequence([int(seed), r]), r)
             for r in range(int(replicas))]
    rows = [row for batch in map_tasks(_replica, tasks, jobs) for row in batch]
    df = pd.DataFrame(rows, columns=["method", "replica", "layer", "mae", "cells",
                                     "unfilled"])
    return MaeReport(df, int(replicas))
