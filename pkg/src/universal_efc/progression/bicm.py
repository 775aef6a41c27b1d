"""Bipartite Configuration Model: maximum-entropy null with fixed expected degrees.

Each cell of the binary matrix is an independent Bernoulli variable with
``p_ca = x_c y_a / (1 + x_c y_a)``; the multipliers are chosen so that the
expected row and column degrees equal the observed ones.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, FitError, StructureError

DEFAULT_FIT_TOL = 1e-8
DEFAULT_FIT_MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class BicmModel:
    """Fitted BiCM.

    ``row_params``/``col_params`` hold the multipliers of the free block;
    rows or columns split off before fitting carry ``inf`` when they are
    full and ``0`` otherwise (their cells are fixed at the observed 0/1).
    """

    row_params: np.ndarray
    col_params: np.ndarray
    probabilities: np.ndarray
    residual: float
    iterations: int
    row_degrees: np.ndarray
    col_degrees: np.ndarray

    @property
    def shape(self):
        return self.probabilities.shape

    def expected_row_degrees(self):
        return self.probabilities.sum(axis=1)

    def expected_col_degrees(self):
        return self.probabilities.sum(axis=0)


def _peel(cells):
    """Split off rows/columns that are forced full (p=1) or empty (p=0).

    Returns the partially filled probability matrix (NaN on the free
    block), the masks of free rows/columns and the residual degrees.
    """
    n_r, n_c = cells.shape
    p = np.full(cells.shape, np.nan)
    free_r = np.ones(n_r, bool)
    free_c = np.ones(n_c, bool)
    while free_r.any() and free_c.any():
        block = cells[np.ix_(free_r, free_c)]
        kr = block.sum(axis=1)
        kc = block.sum(axis=0)
        rows = np.flatnonzero(free_r)
        cols = np.flatnonzero(free_c)
        forced_r = (kr == 0) | (kr == len(cols))
        forced_c = (kc == 0) | (kc == len(rows))
        if forced_r.any():
            for i in rows[forced_r]:
                p[i, free_c] = cells[i, free_c]
            free_r[rows[forced_r]] = False
        elif forced_c.any():
            for j in cols[forced_c]:
                p[free_r, j] = cells[free_r, j]
            free_c[cols[forced_c]] = False
        else:
            break
    # once one side is exhausted the rest is fully determined by the data
    rest = np.isnan(p)
    if not (free_r.any() and free_c.any()):
        p[rest] = cells[rest]
        free_r[:] = False
        free_c[:] = False
    block = cells[np.ix_(free_r, free_c)]
    return p, free_r, free_c, block.sum(axis=1), block.sum(axis=0)


def _solve(kr, kc, tol, max_iter, damping):
    """Fixed-point iteration on the reduced (unique-degree) system."""
    ur, inv_r, mult_r = np.unique(kr, return_inverse=True, return_counts=True)
    uc, inv_c, mult_c = np.unique(kc, return_inverse=True, return_counts=True)
    total = kr.sum()
    x = ur / np.sqrt(total)
    y = uc / np.sqrt(total)
    residual = np.inf
    for it in range(1, max_iter + 1):
        xy = np.outer(x, y)
        x_new = ur / ((mult_c * y / (1.0 + xy)).sum(axis=1))
        x = x ** (1.0 - damping) * x_new ** damping
        xy = np.outer(x, y)
        y_new = uc / ((mult_r[:, None] * x[:, None] / (1.0 + xy)).sum(axis=0))
        y = y ** (1.0 - damping) * y_new ** damping
        if it % 10 == 0 or it == max_iter:
            p = np.outer(x, y)
            p = p / (1.0 + p)
            residual = max(np.max(np.abs((p * mult_c).sum(axis=1) - ur)),
                           np.max(np.abs((p * mult_r[:, None]).sum(axis=0) - uc)))
            if residual <= tol:
                return x[inv_r], y[inv_c], residual, it
    raise FitError(f"BiCM fit did not converge in {max_iter} iterations "
                   f"(residual {residual:.3e})", residual=residual)


def bicm_fit(m, fit_tol=DEFAULT_FIT_TOL, max_iter=DEFAULT_FIT_MAX_ITER, damping=1.0):
    """Fit the BiCM to a binary matrix.

    Full and empty rows/columns are split off first and get ``p = 1`` /
    ``p = 0`` exactly; rows (columns) with equal degree share one
    multiplier. The remaining system is solved by damped fixed-point
    iteration in log space.

    Parameters
    ----------
    m : array_like or CompetitivenessMatrix
        Binary matrix.
    fit_tol : float
        Maximum absolute error on expected degrees.
    max_iter : int
    damping : float in (0, 1]
        Step weight in log space; 1 is the plain fixed-point map.

    Returns
    -------
    BicmModel
    """
    cells = np.asarray(getattr(m, "cells", m), dtype=float)
    if cells.ndim != 2:
        raise StructureError("expected a 2-d binary matrix")
    if not np.isin(cells, (0.0, 1.0)).all():
        raise StructureError("BiCM needs a binary matrix")
    if not 0 < damping <= 1:
        raise ConfigError("damping must lie in (0, 1]")
    if not fit_tol > 0:
        raise ConfigError("fit_tol must be positive")
    k_rows = cells.sum(axis=1)
    k_cols = cells.sum(axis=0)
    p, free_r, free_c, kr, kc = _peel(cells)
    # forced multipliers: inf where the row/column is all ones, 0 where empty
    x = np.where(k_rows == cells.shape[1], np.inf, 0.0)
    y = np.where(k_cols == cells.shape[0], np.inf, 0.0)
    iterations = 0
    if free_r.any() and free_c.any():
        xs, ys, _, iterations = _solve(kr, kc, fit_tol, max_iter, damping)
        x[free_r] = xs
        y[free_c] = ys
        block = np.outer(xs, ys)
        p[np.ix_(free_r, free_c)] = block / (1.0 + block)
    residual = max(float(np.max(np.abs(p.sum(axis=1) - k_rows), initial=0.0)),
                   float(np.max(np.abs(p.sum(axis=0) - k_cols), initial=0.0)))
    if residual > fit_tol:
        raise FitError(f"BiCM degrees off by {residual:.3e}", residual=residual)
    return BicmModel(x, y, p, residual, iterations, k_rows, k_cols)


def bicm_sample(model, seed=None, size=None):
    """Draw binary matrices from a fitted model.

    Parameters
    ----------
    model : BicmModel
    seed : int, numpy Generator or SeedSequence
    size : int, optional
        Number of matrices; ``None`` returns a single 2-d matrix.

    Returns
    -------
    ndarray of float (0./1.)
    """
    rng = np.random.default_rng(seed)
    shape = model.shape if size is None else (size, *model.shape)
    return (rng.random(shape) < model.probabilities).astype(float)
