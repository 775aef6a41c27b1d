"""Time-lagged Assist Matrix between activities."""
from dataclasses import dataclass, field

import numpy as np

from ..errors import AlignmentError


@dataclass(frozen=True, eq=False)
class AssistMatrix:
    """``B[a, a']`` for base year ``t`` and lag ``delta``.

    ``zero_rows`` lists activities with zero ubiquity at ``t``; their rows
    are all zero.
    """

    activities: tuple
    t: int
    delta: int
    cells: np.ndarray
    zero_rows: tuple = field(default=())


def assist_array(m_t, m_td):
    """Assist weights for binary matrices, batched over leading axes.

    ``B = sum_c M_ca(t)/d_a(t) * M_ca'(t+D)/u_c(t+D)`` where ``d`` are
    column sums at ``t`` and ``u`` row sums at ``t+D``. Zero degrees
    contribute zero.

    Parameters
    ----------
    m_t, m_td : ndarray, shape (..., n_countries, n_activities)

    Returns
    -------
    ndarray, shape (..., n_activities, n_activities)
    """
    m_t = np.asarray(m_t, dtype=float)
    m_td = np.asarray(m_td, dtype=float)
    d = m_t.sum(axis=-2, keepdims=True)
    u = m_td.sum(axis=-1, keepdims=True)
    left = np.divide(m_t, d, out=np.zeros_like(m_t), where=d > 0)
    right = np.divide(m_td, u, out=np.zeros_like(m_td), where=u > 0)
    return np.swapaxes(left, -1, -2) @ right


def _cells_and_labels(m):
    if hasattr(m, "cells"):
        return np.asarray(m.cells, float), tuple(m.countries), tuple(m.activities), m.year
    arr = np.asarray(m, float)
    return arr, None, None, None


def assist_matrix(m_t, m_t_delta, t=None, delta=None):
    """Assist Matrix between the baskets at ``t`` and ``t + delta``.

    Parameters
    ----------
    m_t, m_t_delta : CompetitivenessMatrix or ndarray
        Binary matrices on identical country and activity axes.
    """
    a, ca, aa, ya = _cells_and_labels(m_t)
    b, cb, ab, yb = _cells_and_labels(m_t_delta)
    if a.shape != b.shape:
        raise AlignmentError(f"matrix shapes differ: {a.shape} vs {b.shape}")
    if ca is not None and cb is not None and (ca != cb or aa != ab):
        raise AlignmentError("country or activity axes differ")
    if t is None:
        t = ya
    if delta is None and ya is not None and yb is not None:
        delta = yb - ya
    activities = aa or ab or tuple(range(a.shape[1]))
    zero_rows = tuple(activities[i] for i in np.flatnonzero(a.sum(axis=0) == 0))
    return AssistMatrix(tuple(activities), t, delta, assist_array(a, b), zero_rows)
