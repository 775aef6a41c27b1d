"""k-nearest-neighbour reconstruction over an economy-similarity network.

Rows are (country, year) pairs pooled over all years. Two rows are compared
on the upper-layer aggregates of the services tree; the missing leaf value
of a row is the weighted mean of the same leaf in its nearest rows that
observe it.
"""
import numpy as np

from ..errors import ConfigError, CoverageError
from ..taxonomy import rollup
from .config import KNN, ImputerConfig

_BLOCK = 512


def target_codes(panel, tree):
    """Complete-set codes present in the panel (the cells that get imputed)."""
    return [c for c in tree.complete_set if c in panel.activities]


def feature_values(panel, tree, codes):
    """Aggregate values used as similarity features, shape (C, Y, n_codes).

    Observed values of the panel are used where present; otherwise the sum
    of the complete-set descendants is used when all of them are present.
    """
    idx = {a: j for j, a in enumerate(panel.activities)}
    rolled = None
    complete = tree.complete_set
    if all(c in idx for c in complete):
        rolled = rollup(tree, panel.select(activities=complete))
    out = np.full((len(panel.countries), len(panel.years), len(codes)), np.nan)
    for f, code in enumerate(codes):
        observed = panel.values[:, idx[code], :] if code in idx else None
        derived = None
        if rolled is not None and code in rolled.activities:
            derived = rolled.values[:, rolled.activities.index(code), :]
        if observed is None and derived is None:
            raise CoverageError(f"feature code {code!r} is neither in the panel nor "
                                "derivable from the complete set")
        if observed is None:
            out[:, :, f] = derived
        elif derived is None:
            out[:, :, f] = observed
        else:
            out[:, :, f] = np.where(np.isnan(observed), derived, observed)
    return out


def nan_euclidean(a, b):
    """Distances between rows of ``a`` and ``b`` ignoring missing coordinates.

    The squared distance over co-observed coordinates is scaled by
    ``n_features / n_co_observed``; rows with nothing in common are at
    infinite distance.
    """
    n_f = a.shape[1]
    sq = np.zeros((a.shape[0], b.shape[0]))
    n_co = np.zeros((a.shape[0], b.shape[0]))
    for f in range(n_f):
        diff = a[:, f, None] - b[None, :, f]
        ok = ~np.isnan(diff)
        sq += np.where(ok, diff * diff, 0.0)
        n_co += ok
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.sqrt(sq * (n_f / n_co))
    d[n_co == 0] = np.inf
    return d


def _weights(dist, weighting):
    if weighting == "uniform":
        return np.ones_like(dist)
    zero = dist == 0
    if zero.any():
        return zero.astype(float)
    return 1.0 / dist


def knn_fill(values, features, targets, k, weighting="inverse"):
    """Fill missing target cells of a (rows, activities) array.

    Parameters
    ----------
    values : ndarray, shape (n_rows, n_activities)
        Rows must be ordered by the donor key used for tie-breaking.
    features : ndarray, shape (n_rows, n_features)
    targets : sequence of int
        Activity columns to impute.

    Returns
    -------
    filled : ndarray
    residual : list of (row, column)
        Cells without any eligible donor.
    """
    filled = np.array(values, dtype=float)
    residual = []
    need = np.isnan(values[:, targets]).any(axis=1)
    recipients = np.flatnonzero(need)
    for start in range(0, recipients.size, _BLOCK):
        block = recipients[start:start + _BLOCK]
        dist = nan_euclidean(features[block], features)
        for col in targets:
            miss = np.isnan(values[block, col])
            if not miss.any():
                continue
            donors = np.flatnonzero(~np.isnan(values[:, col]))
            rows = block[miss]
            if donors.size == 0:
                residual.extend((r, col) for r in rows)
                continue
            sub = dist[np.ix_(np.flatnonzero(miss), donors)]
            kk = min(k, donors.size)
            kth = np.partition(sub, kk - 1, axis=1)[:, kk - 1]
            for r, dist_row, thr in zip(rows, sub, kth):
                # candidates in donor-key order; the stable sort keeps that
                # order among equal distances
                cand = np.flatnonzero(dist_row <= thr)
                pick = cand[np.argsort(dist_row[cand], kind="stable")[:kk]]
                d = dist_row[pick]
                finite = np.isfinite(d)
                if not finite.any():
                    residual.append((r, col))
                    continue
                d = d[finite]
                w = _weights(d, weighting)
                v = values[donors[pick[finite]], col]
                filled[r, col] = np.dot(w, v) / w.sum()
    return filled, residual


def _rows(panel):
    """(C*Y, A) view ordered by (country, year) and the order used."""
    order = sorted(range(len(panel.countries)), key=lambda i: panel.countries[i])
    vals = panel.values[order].transpose(0, 2, 1)
    return vals.reshape(-1, len(panel.activities)), order


def knn_reconstruct(panel, tree, cfg):
    """kNN reconstruction with diagnostics.

    Returns
    -------
    values : ndarray, same shape as ``panel.values``
    residual : list of (country, activity, year, reason)
    """
    if cfg.method != KNN:
        raise ConfigError(f"knn_impute needs method='knn', got {cfg.method!r}")
    codes = cfg.feature_codes or tree.aggregate_codes
    targets = [panel.activities.index(c) for c in target_codes(panel, tree)]
    feats = feature_values(panel, tree, codes)
    if cfg.log_features:
        feats = np.log1p(feats)
    rows, order = _rows(panel)
    n_c, n_a, n_y = panel.shape
    feat_rows = feats[order].reshape(-1, len(codes))
    filled, residual = knn_fill(rows, feat_rows, targets, int(cfg.k), cfg.weighting)
    out = np.empty(panel.shape)
    out[order] = filled.reshape(n_c, n_y, n_a).transpose(0, 2, 1)
    report = []
    for r, col in residual:
        c = panel.countries[order[r // n_y]]
        report.append((c, panel.activities[col], panel.years[r % n_y], "no donor"))
    return out, report


def knn_impute(panel, tree, cfg=None):
    """Reconstruct missing complete-set cells by kNN.

    Present cells are untouched; cells without any donor stay missing (see
    :func:`universal_efc.imputation.impute` for the residual report).
    """
    cfg = cfg or ImputerConfig(method=KNN)
    values, _ = knn_reconstruct(panel, tree, cfg)
    return panel.with_values(values)
