"""Statistical validation of Assist Matrix links against the BiCM null.

For every base year ``t`` and lag ``delta`` the empirical Assist Matrix is
compared with Assist Matrices computed on pairs of matrices sampled from
BiCM fits at ``t`` and ``t + delta``. A link survives at ``(t, delta)`` when
its empirical weight is positive and strictly exceeds the requested
percentile of its own null distribution; it is validated at ``delta`` when
it survives for every ``t``. The progression network weights each link by
the number of lags at which it is validated.
"""
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .._parallel import map_tasks
from ..errors import AlignmentError, ConfigError, RangeError
from ..taxonomy import node_kind
from .assist import assist_array
from .bicm import DEFAULT_FIT_TOL, bicm_fit, bicm_sample

DEFAULT_ENSEMBLE = 1000
DEFAULT_PERCENTILE = 95.0
DEFAULT_MAX_DELTA = 10
MIN_ENSEMBLE = 20
PER_LINK, GLOBAL = "per-link", "global"

# empirical and null weights equal in exact arithmetic may differ by rounding
_TIE_EPS = 1e-12
_CHUNK = 100


def _stack(panels):
    """Sorted years, (n_years, C, A) array and activity labels from a year map."""
    if not panels:
        raise RangeError("no yearly matrices supplied")
    years = sorted(int(y) for y in panels)
    mats, labels = [], None
    for y in years:
        m = panels[y]
        cells = np.asarray(getattr(m, "cells", m), dtype=float)
        lab = (tuple(m.countries), tuple(m.activities)) if hasattr(m, "cells") else None
        if labels is None:
            labels = lab
            shape = cells.shape
        elif cells.shape != shape or (lab is not None and labels is not None
                                      and lab != labels):
            raise AlignmentError(f"year {y}: axes differ from year {years[0]}")
        if not np.isin(cells, (0.0, 1.0)).all():
            raise ConfigError(f"year {y}: matrix is not binary")
        mats.append(cells)
    activities = labels[1] if labels else tuple(range(shape[1]))
    return years, np.stack(mats), activities


def _check(ensemble, percentile, mode):
    if int(ensemble) < MIN_ENSEMBLE:
        raise ConfigError(f"ensemble must be >= {MIN_ENSEMBLE}, got {ensemble}")
    if not 0 <= percentile <= 100:
        raise ConfigError(f"percentile must lie in [0, 100], got {percentile}")
    if mode not in (PER_LINK, GLOBAL):
        raise ConfigError(f"mode must be {PER_LINK!r} or {GLOBAL!r}, got {mode!r}")


def _pair_seed(seed, t, delta):
    return np.random.SeedSequence([int(seed), int(t), int(delta)])


def _validate_pair(task):
    """Validated links for one (t, delta); run in worker processes."""
    m_t, m_td, p_t, p_td, t, delta, ensemble, percentile, seed, mode = task
    empirical = assist_array(m_t, m_td)
    rng = np.random.default_rng(_pair_seed(seed, t, delta))
    below = np.zeros(empirical.shape, dtype=np.int64)
    pooled = []
    done = 0
    while done < ensemble:
        size = min(_CHUNK, ensemble - done)
        s_t = (rng.random((size, *p_t.shape)) < p_t).astype(float)
        # delta = 0 compares a basket with itself: one sample on both sides
        s_td = s_t if delta == 0 else (rng.random((size, *p_td.shape)) < p_td).astype(float)
        null = assist_array(s_t, s_td)
        if mode == PER_LINK:
            below += (null < empirical - _TIE_EPS).sum(axis=0)
        else:
            pooled.append(null.ravel())
        done += size
    if mode == PER_LINK:
        keep = below * 100.0 >= percentile * ensemble
    elif percentile == 0:
        keep = np.ones(empirical.shape, bool)
    else:
        threshold = np.percentile(np.concatenate(pooled), percentile, method="inverted_cdf")
        keep = empirical > threshold + _TIE_EPS
    return keep & (empirical > 0)


def _fits(years, stack, needed, fit_tol):
    return {y: bicm_fit(stack[years.index(y)], fit_tol=fit_tol).probabilities
            for y in sorted(needed)}


def _tasks(years, stack, probs, delta, ensemble, percentile, seed, mode):
    pairs = [(t, t + delta) for t in years if t + delta in years]
    return [(stack[years.index(t)], stack[years.index(u)], probs[t], probs[u], t, delta,
             int(ensemble), float(percentile), seed, mode) for t, u in pairs]


def validate_delta(panels, delta, ensemble=DEFAULT_ENSEMBLE, percentile=DEFAULT_PERCENTILE,
                   seed=0, mode=PER_LINK, jobs=1, fit_tol=DEFAULT_FIT_TOL):
    """Links validated at every available base year for a fixed lag.

    Parameters
    ----------
    panels : mapping year -> binary matrix
        CompetitivenessMatrix objects of kind BINARY, or plain 0/1 arrays,
        on a common country x activity axis.
    delta : int
    ensemble : int
        Null samples per (t, delta); at least 20.
    percentile : float in [0, 100]
    seed : int
        Master seed; each (t, delta) draws from its own derived stream.
    mode : {"per-link", "global"}
        Compare each link to its own null distribution, or to the pooled
        null distribution of all links.
    jobs : int
        Worker processes; the result does not depend on it.

    Returns
    -------
    ndarray of bool, shape (n_activities, n_activities)
    """
    _check(ensemble, percentile, mode)
    years, stack, _ = _stack(panels)
    delta = int(delta)
    needed = {t for t in years if t + delta in years}
    if not needed:
        raise RangeError(f"no year pair (t, t+{delta}) in {years[0]}-{years[-1]}")
    probs = _fits(years, stack, needed | {t + delta for t in needed}, fit_tol)
    tasks = _tasks(years, stack, probs, delta, ensemble, percentile, seed, mode)
    result = None
    for keep in map_tasks(_validate_pair, tasks, jobs):
        result = keep if result is None else result & keep
    return result


@dataclass(frozen=True, eq=False)
class ProgressionNetwork:
    """Directed activity network weighted by the number of validating lags."""

    activities: tuple
    weights: np.ndarray
    validated: dict = field(repr=False)
    percentile: float = DEFAULT_PERCENTILE
    ensemble: int = DEFAULT_ENSEMBLE
    years: tuple = ()
    deltas: tuple = ()

    def edges(self):
        """Edge table ``source,target,weight,first_delta,last_delta``."""
        src, dst = np.nonzero(self.weights)
        rows = []
        for i, j in zip(src, dst):
            hits = [d for d in self.deltas if self.validated[d][i, j]]
            rows.append((self.activities[i], self.activities[j], int(self.weights[i, j]),
                         hits[0], hits[-1]))
        return pd.DataFrame(rows, columns=["source", "target", "weight", "first_delta",
                                           "last_delta"])

    def to_csv(self, path):
        self.edges().to_csv(path, index=False, lineterminator="\n")

    def node_table(self, tree=None):
        """Node attributes ``activity,kind,layer`` (layer blank for goods)."""
        rows = []
        for a in self.activities:
            a = str(a)
            layer = tree.layer(a) if tree is not None and a in tree else ""
            rows.append((a, node_kind(a), layer))
        return pd.DataFrame(rows, columns=["activity", "kind", "layer"])


def progression_network(panels, delta_range=(0, DEFAULT_MAX_DELTA), ensemble=DEFAULT_ENSEMBLE,
                        percentile=DEFAULT_PERCENTILE, seed=0, mode=PER_LINK, jobs=1,
                        fit_tol=DEFAULT_FIT_TOL):
    """Validate links at every lag in ``delta_range`` and count the hits.

    ``delta_range`` is an inclusive ``(low, high)`` pair or an iterable of
    lags. Every lag must have at least one usable year pair.
    """
    _check(ensemble, percentile, mode)
    if isinstance(delta_range, tuple) and len(delta_range) == 2:
        lo, hi = (int(v) for v in delta_range)
        if lo < 0 or hi < lo:
            raise ConfigError(f"invalid delta range {delta_range}")
        deltas = tuple(range(lo, hi + 1))
    else:
        deltas = tuple(sorted({int(d) for d in delta_range}))
        if not deltas or deltas[0] < 0:
            raise ConfigError(f"invalid delta range {delta_range}")
    years, stack, activities = _stack(panels)
    for d in deltas:
        if not any(t + d in years for t in years):
            raise RangeError(f"no year pair (t, t+{d}) in {years[0]}-{years[-1]}")
    probs = _fits(years, stack, set(years), fit_tol)
    tasks, owner = [], []
    for d in deltas:
        batch = _tasks(years, stack, probs, d, ensemble, percentile, seed, mode)
        tasks.extend(batch)
        owner.extend([d] * len(batch))
    validated = {}
    for d, keep in zip(owner, map_tasks(_validate_pair, tasks, jobs)):
        validated[d] = keep if d not in validated else validated[d] & keep
    weights = sum(validated[d].astype(int) for d in deltas)
    return ProgressionNetwork(tuple(activities), weights, validated, float(percentile),
                              int(ensemble), tuple(years), deltas)
