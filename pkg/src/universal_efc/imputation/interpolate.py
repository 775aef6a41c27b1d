import numpy as np

from ..panel import ExportPanel


def interpolate_series(values):
    """Forward-only linear fill along the last axis of an array.

    Gaps between two present values are filled linearly, trailing gaps
    repeat the last present value, leading gaps stay NaN.
    """
    # C order so that the reshape below is a view, not a copy
    out = np.array(values, dtype=float, order="C")
    flat = out.reshape(-1, out.shape[-1])
    t = np.arange(out.shape[-1], dtype=float)
    gaps = np.isnan(flat)
    for row, gap in zip(flat, gaps):
        if not gap.any() or gap.all():
            continue
        known = ~gap
        first = np.argmax(known)
        fill = gap & (t >= first)
        row[fill] = np.interp(t[fill], t[known], row[known])
    return out


def interpolate_forward(panel):
    """Linear interpolation of every (country, activity) series, forward only.

    Present cells are never modified.
    """
    if isinstance(panel, ExportPanel):
        return panel.with_values(interpolate_series(panel.values))
    return interpolate_series(panel)
