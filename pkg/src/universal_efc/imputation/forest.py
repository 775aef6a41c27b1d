"""Temporal random forest reconstruction.

Rows are (country, year) pairs pooled over every year and country; each
complete-set code is regressed on the other codes with an ensemble of
randomised regression trees.
"""
import math

import numpy as np

from .._parallel import map_tasks
from ..errors import ConfigError
from .config import FOREST, ImputerConfig
from .interpolate import interpolate_series


class RegressionTree:
    """Least-squares regression tree.

    Parameters
    ----------
    min_leaf : int
        Minimum number of training rows in every leaf.
    max_features : int or None
        Number of candidate features drawn at each split (all when None).
        If none of them admits a valid split, further features are tried.
    """

    def __init__(self, min_leaf=5, max_features=None):
        self.min_leaf = int(min_leaf)
        self.max_features = max_features
        self.feature = self.threshold = self.left = self.right = self.value = None

    def fit(self, X, y, rng=None):
        rng = np.random.default_rng(rng)
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n, n_f = X.shape
        mtry = n_f if self.max_features is None else max(1, min(n_f, int(self.max_features)))
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(idx):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(float(y[idx].mean()))
            return len(value) - 1

        stack = [(new_node(np.arange(n)), np.arange(n))]
        while stack:
            node, idx = stack.pop()
            split = self._best_split(X[idx], y[idx], mtry, rng)
            if split is None:
                continue
            f, thr = split
            go_left = X[idx, f] <= thr
            li, ri = idx[go_left], idx[~go_left]
            feature[node] = f
            threshold[node] = thr
            left[node] = new_node(li)
            right[node] = new_node(ri)
            stack.append((right[node], ri))
            stack.append((left[node], li))
        self.feature = np.array(feature)
        self.threshold = np.array(threshold)
        self.left = np.array(left)
        self.right = np.array(right)
        self.value = np.array(value)
        return self

    def _best_split(self, X, y, mtry, rng):
        n = y.size
        m = self.min_leaf
        if n < 2 * m or np.all(y == y[0]):
            return None
        parent_sse = float(((y - y.mean()) ** 2).sum())
        best = None
        best_sse = parent_sse
        tried = 0
        for f in rng.permutation(X.shape[1]):
            if tried >= mtry:
                break
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            ys = y[order]
            pos = np.arange(m, n - m + 1)
            pos = pos[xs[pos - 1] < xs[pos]]
            if pos.size == 0:
                continue
            tried += 1
            cs = np.cumsum(ys)
            cs2 = np.cumsum(ys * ys)
            nl = pos.astype(float)
            nr = n - nl
            sl = cs[pos - 1]
            sr = cs[-1] - sl
            sse = (cs2[pos - 1] - sl * sl / nl) + ((cs2[-1] - cs2[pos - 1]) - sr * sr / nr)
            k = int(np.argmin(sse))
            if sse[k] < best_sse - 1e-12 * max(parent_sse, 1.0):
                best_sse = float(sse[k])
                i = pos[k]
                best = (int(f), 0.5 * (xs[i - 1] + xs[i]))
        return best

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=int)
        while True:
            inner = self.feature[node] >= 0
            if not inner.any():
                break
            rows = np.flatnonzero(inner)
            n = node[rows]
            go_left = X[rows, self.feature[n]] <= self.threshold[n]
            node[rows] = np.where(go_left, self.left[n], self.right[n])
        return self.value[node]


class RandomForest:
    """Bagged ensemble of :class:`RegressionTree` with sqrt feature sampling."""

    def __init__(self, n_trees=100, min_leaf=5, max_features="sqrt", bootstrap=True):
        self.n_trees = int(n_trees)
        self.min_leaf = int(min_leaf)
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.trees_ = []

    def fit(self, X, y, seed=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n, n_f = X.shape
        mtry = max(1, int(math.sqrt(n_f))) if self.max_features == "sqrt" else self.max_features
        if not isinstance(seed, np.random.SeedSequence):
            seed = np.random.SeedSequence(seed)
        seeds = seed.spawn(self.n_trees)
        self.trees_ = []
        for s in seeds:
            rng = np.random.default_rng(s)
            rows = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree = RegressionTree(self.min_leaf, mtry).fit(X[rows], y[rows], rng)
            self.trees_.append(tree)
        return self

    def predict(self, X):
        if not self.trees_:
            raise RuntimeError("forest is not fitted")
        return np.mean([t.predict(X) for t in self.trees_], axis=0)


def _fill_features(values):
    """Complete a (C, A, Y) array for use as predictors.

    Forward interpolation first, then leading gaps take the first observed
    value of their series, and series with no observation at all take the
    median of the activity.
    """
    out = interpolate_series(values)
    rev = interpolate_series(out[..., ::-1])[..., ::-1]
    out = np.where(np.isnan(out), rev, out)
    for a in range(out.shape[1]):
        col = out[:, a, :]
        if np.isnan(col).any():
            med = np.nanmedian(col) if not np.isnan(col).all() else 0.0
            col[np.isnan(col)] = med
    return out


def _fit_target(task):
    rows, X, col, cfg_tuple, seed = task
    trees, min_leaf, bootstrap = cfg_tuple
    y = rows[:, col]
    train = ~np.isnan(y)
    test = ~train
    if not test.any():
        return col, None, False
    if train.sum() < 2 * min_leaf:
        return col, None, True
    feats = np.delete(X, col, axis=1)
    if feats.shape[1] == 0:
        feats = np.zeros((X.shape[0], 1))
    forest = RandomForest(trees, min_leaf, "sqrt", bootstrap).fit(feats[train], y[train], seed)
    return col, forest.predict(feats[test]), False


def forest_reconstruct(panel, cfg, targets=None, jobs=1):
    """Random-forest reconstruction with diagnostics.

    Returns
    -------
    values : ndarray
    flags : dict
        ``fallback`` lists codes imputed by interpolation for lack of
        training rows; ``clipped`` counts negative predictions set to 0.
    """
    if cfg.method != FOREST:
        raise ConfigError(f"forest_impute needs method='forest', got {cfg.method!r}")
    codes = list(panel.activities) if targets is None else list(targets)
    cols = [panel.activities.index(c) for c in codes]
    n_c, n_a, n_y = panel.shape
    sub = panel.values[:, cols, :]
    rows = sub.transpose(0, 2, 1).reshape(-1, len(cols))
    X = _fill_features(sub).transpose(0, 2, 1).reshape(-1, len(cols))
    seeds = np.random.SeedSequence(int(cfg.seed)).spawn(len(cols))
    tasks = [(rows, X, j, (int(cfg.trees), int(cfg.min_leaf), bool(cfg.bootstrap)), s)
             for j, s in enumerate(seeds)]
    filled = rows.copy()
    fallback, clipped = [], 0
    interp = None
    for j, pred, fell_back in map_tasks(_fit_target, tasks, jobs):
        miss = np.isnan(rows[:, j])
        if fell_back:
            if interp is None:
                interp = interpolate_series(sub).transpose(0, 2, 1).reshape(-1, len(cols))
            filled[miss, j] = interp[miss, j]
            fallback.append(codes[j])
        elif pred is not None:
            clipped += int((pred < 0).sum())
            filled[miss, j] = np.maximum(pred, 0.0)
    out = np.array(panel.values)
    out[:, cols, :] = filled.reshape(n_c, n_y, len(cols)).transpose(0, 2, 1)
    return out, {"fallback": fallback, "clipped": clipped}


def forest_impute(panel, cfg=None, tree=None, jobs=1):
    """Reconstruct missing cells with a temporal random forest.

    With a taxonomy, only complete-set codes are modelled; otherwise every
    activity of the panel is.
    """
    cfg = cfg or ImputerConfig(method=FOREST)
    targets = None
    if tree is not None:
        targets = [c for c in tree.complete_set if c in panel.activities]
    values, _ = forest_reconstruct(panel, cfg, targets, jobs)
    return panel.with_values(values)
