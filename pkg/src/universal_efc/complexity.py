"""Competitiveness matrices and the Fitness-Complexity algorithm."""
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import AlignmentError, ConfigError, DegenerateSliceError, KindError, StructureError
from .panel import exp_smooth

RCA, MS, BINARY = "RCA", "MS", "BINARY"
INTENSIVE, EXTENSIVE = "INTENSIVE", "EXTENSIVE"

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000
FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class CompetitivenessMatrix:
    """Country x activity matrix for one year.

    ``flags`` records provenance: how many missing export cells were read as
    zero, and which countries/activities had zero totals.
    """

    countries: tuple
    activities: tuple
    year: int
    kind: str
    cells: np.ndarray
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        cells = np.array(self.cells, dtype=float)
        cells.setflags(write=False)
        if cells.shape != (len(self.countries), len(self.activities)):
            raise StructureError(f"cells have shape {cells.shape}")
        if self.kind not in (RCA, MS, BINARY):
            raise KindError(f"unknown matrix kind {self.kind!r}")
        object.__setattr__(self, "countries", tuple(self.countries))
        object.__setattr__(self, "activities", tuple(self.activities))
        object.__setattr__(self, "cells", cells)

    def drop_empty(self):
        """Remove all-zero rows and columns repeatedly.

        Returns
        -------
        matrix : CompetitivenessMatrix
        dropped_countries, dropped_activities : list of str
        """
        cells = self.cells
        rows = np.ones(cells.shape[0], bool)
        cols = np.ones(cells.shape[1], bool)
        while True:
            sub = cells[np.ix_(rows, cols)]
            r = sub.sum(axis=1) > 0
            c = sub.sum(axis=0) > 0
            if r.all() and c.all():
                break
            rows[np.flatnonzero(rows)[~r]] = False
            cols[np.flatnonzero(cols)[~c]] = False
        dropped_c = [x for x, keep in zip(self.countries, rows) if not keep]
        dropped_a = [x for x, keep in zip(self.activities, cols) if not keep]
        m = CompetitivenessMatrix(
            [x for x, keep in zip(self.countries, rows) if keep],
            [x for x, keep in zip(self.activities, cols) if keep],
            self.year, self.kind, cells[np.ix_(rows, cols)],
            {**self.flags, "dropped_countries": dropped_c, "dropped_activities": dropped_a})
        return m, dropped_c, dropped_a


def _exports(panel, year):
    if year not in panel.years:
        raise KeyError(f"year {year} not in panel")
    e = panel.year_slice(year)
    n_missing = int(np.isnan(e).sum())
    e = np.nan_to_num(e, nan=0.0)
    if not e.sum() > 0:
        raise DegenerateSliceError(f"year {year}: no exports in the slice", year=year)
    return e, n_missing


def rca_array(e):
    """Balassa RCA of an exports array (countries on axis -2, activities on -1).

    Rows or columns with zero total give zeros.
    """
    e = np.asarray(e, dtype=float)
    row = e.sum(axis=-1, keepdims=True)
    col = e.sum(axis=-2, keepdims=True)
    tot = e.sum(axis=(-2, -1), keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (e / row) / (col / tot)
    return np.nan_to_num(out, nan=0.0, posinf=0.0)


def market_share_array(e):
    """Column-normalised exports (activity market shares)."""
    e = np.asarray(e, dtype=float)
    col = e.sum(axis=-2, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = e / col
    return np.nan_to_num(out, nan=0.0, posinf=0.0)


def _flags(e, n_missing):
    return {
        "missing_as_zero": n_missing,
        "zero_countries": np.flatnonzero(e.sum(axis=1) == 0).tolist(),
        "zero_activities": np.flatnonzero(e.sum(axis=0) == 0).tolist(),
    }


def rca(panel, year):
    """Revealed comparative advantage for one year of the panel."""
    e, n_missing = _exports(panel, year)
    return CompetitivenessMatrix(panel.countries, panel.activities, year, RCA,
                                 rca_array(e), _flags(e, n_missing))


def market_share(panel, year):
    """Market share matrix ``E_ca / sum_c E_ca`` for one year of the panel."""
    e, n_missing = _exports(panel, year)
    return CompetitivenessMatrix(panel.countries, panel.activities, year, MS,
                                 market_share_array(e), _flags(e, n_missing))


def binarize(m, threshold=1.0):
    """Binary matrix with ones where ``RCA >= threshold``."""
    if m.kind != RCA:
        raise KindError(f"binarize expects an RCA matrix, got {m.kind}")
    return CompetitivenessMatrix(m.countries, m.activities, m.year, BINARY,
                                 (m.cells >= threshold).astype(float), dict(m.flags))


def competitiveness_series(panel, kind=RCA, half_life=None):
    """RCA or MS matrices for every year, optionally smoothed over time.

    Smoothing runs on the continuous RCA/MS series; binarise afterwards.

    Returns
    -------
    dict
        year -> CompetitivenessMatrix
    """
    if kind not in (RCA, MS):
        raise KindError(f"kind must be RCA or MS, got {kind!r}")
    func = rca_array if kind == RCA else market_share_array
    series = np.empty(panel.shape)
    flags = {}
    for k, year in enumerate(panel.years):
        e, n_missing = _exports(panel, year)
        series[:, :, k] = func(e)
        flags[year] = _flags(e, n_missing)
    if half_life is not None:
        series = exp_smooth(series, half_life)
    return {year: CompetitivenessMatrix(panel.countries, panel.activities, year, kind,
                                        series[:, :, k], flags[year])
            for k, year in enumerate(panel.years)}


# ---------------------------------------------------------------------------
# Fitness and Complexity
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FitnessResult:
    """Fixed point of the Fitness-Complexity map.

    Attributes
    ----------
    fitness, complexity : ndarray
        Mean-normalised country fitness and activity complexity.
    iterations : int
    converged : bool
    residual : float
        Largest relative change of either vector at the last step.
    variant : {"INTENSIVE", "EXTENSIVE"}
    """

    countries: tuple
    activities: tuple
    fitness: np.ndarray
    complexity: np.ndarray
    iterations: int
    converged: bool
    residual: float
    variant: str
    year: int = None
    dropped_countries: tuple = ()
    dropped_activities: tuple = ()

    @property
    def fitness_ranks(self):
        return _ordinal_ranks(self.fitness, self.countries)[0]

    @property
    def complexity_ranks(self):
        return _ordinal_ranks(self.complexity, self.activities)[0]


def _as_matrix(m):
    if isinstance(m, CompetitivenessMatrix):
        return m.cells, m
    return np.asarray(m, dtype=float), None


def _rel_change(new, old):
    return float(np.max(np.abs(new - old) / old))


def fitness_complexity(m, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, initial_q=None,
                       callback=None):
    """Iterate the coupled Fitness-Complexity equations.

    ::

        F~_c = sum_a M_ca Q_a            F = F~ / mean(F~)
        Q~_a = 1 / sum_c M_ca / F_c      Q = Q~ / mean(Q~)

    Parameters
    ----------
    m : CompetitivenessMatrix or array_like
        Binary (intensive fitness) or market-share (extensive fitness)
        matrix with no all-zero row or column.
    tol : float
        Stop once the largest relative change of both F and Q falls below it.
    max_iter : int
    initial_q : array_like, optional
        Positive starting complexities; defaults to all ones.
    callback : callable, optional
        Called as ``callback(n, F, Q)`` after every iteration.

    Returns
    -------
    FitnessResult
    """
    cells, mat = _as_matrix(m)
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ConfigError(f"max_iter must be >= 1, got {max_iter}")
    if cells.ndim != 2 or cells.size == 0:
        raise StructureError("expected a non-empty 2-d matrix")
    if np.any(cells < 0) or not np.all(np.isfinite(cells)):
        raise StructureError("matrix entries must be finite and non-negative")
    if np.any(cells.sum(axis=1) == 0) or np.any(cells.sum(axis=0) == 0):
        raise StructureError("matrix has all-zero rows or columns; call drop_empty first")
    if mat is not None:
        variant = INTENSIVE if mat.kind == BINARY else EXTENSIVE
    else:
        variant = INTENSIVE if np.isin(cells, (0.0, 1.0)).all() else EXTENSIVE

    n_c, n_a = cells.shape
    if initial_q is None:
        q = np.ones(n_a)
    else:
        q = np.asarray(initial_q, dtype=float)
        if q.shape != (n_a,) or np.any(q <= 0):
            raise ConfigError("initial_q must be a positive vector over activities")
        q = q / q.mean()
    f = None
    converged = False
    residual = np.inf
    n = 0
    for n in range(1, max_iter + 1):
        f_new = cells @ q
        f_new = np.maximum(f_new / f_new.mean(), FLOOR)
        q_new = 1.0 / (cells.T @ (1.0 / f_new))
        q_new = np.maximum(q_new / q_new.mean(), FLOOR)
        residual = _rel_change(q_new, q)
        if f is not None:
            residual = max(residual, _rel_change(f_new, f))
        f, q = f_new, q_new
        if callback is not None:
            callback(n, f, q)
        if residual < tol and n > 1:
            converged = True
            break
    return FitnessResult(
        countries=mat.countries if mat else tuple(range(n_c)),
        activities=mat.activities if mat else tuple(range(n_a)),
        fitness=f, complexity=q, iterations=n, converged=converged,
        residual=residual, variant=variant, year=mat.year if mat else None,
        dropped_countries=tuple(mat.flags.get("dropped_countries", ())) if mat else (),
        dropped_activities=tuple(mat.flags.get("dropped_activities", ())) if mat else ())


def _ordinal_ranks(values, labels, rtol=1e-12):
    """Rank 1 for the largest value; ties broken by label, and flagged."""
    values = np.asarray(values, dtype=float)
    labels = [str(x) for x in labels]
    order = sorted(range(len(values)), key=lambda i: (-values[i], labels[i]))
    ranks = np.empty(len(values), dtype=int)
    ranks[order] = np.arange(1, len(values) + 1)
    tie = np.zeros(len(values), dtype=bool)
    sorted_vals = values[order]
    close = np.isclose(sorted_vals[1:], sorted_vals[:-1], rtol=rtol, atol=0.0)
    tie_sorted = np.zeros(len(values), dtype=bool)
    tie_sorted[1:] |= close
    tie_sorted[:-1] |= close
    tie[order] = tie_sorted
    return ranks, tie


def rank_series(results, by="complexity"):
    """Per-year ranking table of activities (or countries with ``by="fitness"``).

    Parameters
    ----------
    results : iterable of FitnessResult
        One result per year, all on the same label axis.

    Returns
    -------
    pandas.DataFrame
        Columns ``year, label, value, rank, tie``; rank 1 is the largest
        value.
    """
    results = list(results)
    if by not in ("complexity", "fitness"):
        raise ValueError("by must be 'complexity' or 'fitness'")
    frames = []
    axis = None
    for k, res in enumerate(results):
        labels = res.activities if by == "complexity" else res.countries
        values = res.complexity if by == "complexity" else res.fitness
        if axis is None:
            axis = labels
        elif labels != axis:
            raise AlignmentError(f"result {k} has a different {by} label axis")
        ranks, tie = _ordinal_ranks(values, labels)
        frames.append(pd.DataFrame({
            "year": res.year if res.year is not None else k,
            "label": list(labels), "value": values, "rank": ranks, "tie": tie}))
    if not frames:
        return pd.DataFrame(columns=["year", "label", "value", "rank", "tie"])
    return pd.concat(frames, ignore_index=True)


def fitness_table(results, by="fitness"):
    """Long table ``year,label,value,rank,variant,converged`` for CSV export."""
    rows = []
    for res in results:
        labels = res.countries if by == "fitness" else res.activities
        values = res.fitness if by == "fitness" else res.complexity
        ranks, _ = _ordinal_ranks(values, labels)
        rows.append(pd.DataFrame({
            "year": res.year, "label": list(labels), "value": values, "rank": ranks,
            "variant": res.variant.lower(), "converged": res.converged}))
    if not rows:
        return pd.DataFrame(columns=["year", "label", "value", "rank", "variant",
                                     "converged"])
    return pd.concat(rows, ignore_index=True)


def yearly_fitness(panel, variant=INTENSIVE, half_life=None, threshold=1.0,
                   tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Fitness and complexity for every year of a panel.

    RCA (intensive) or MS (extensive) series are smoothed when ``half_life``
    is given; intensive matrices are then binarised. Empty rows and
    columns are dropped year by year and listed in the results.
    """
    variant = variant.upper()
    if variant not in (INTENSIVE, EXTENSIVE):
        raise ConfigError(f"variant must be intensive or extensive, got {variant!r}")
    kind = RCA if variant == INTENSIVE else MS
    series = competitiveness_series(panel, kind, half_life)
    out = []
    for year, m in series.items():
        if variant == INTENSIVE:
            m = binarize(m, threshold)
        m, _, _ = m.drop_empty()
        if not m.countries or not m.activities:
            raise DegenerateSliceError(f"year {year}: empty matrix after dropping zeros",
                                       year=year)
        out.append(fitness_complexity(m, tol=tol, max_iter=max_iter))
    return out
