"""Lagged correlation between country indicators (fitness vs GDP)."""
import csv
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ._parallel import map_tasks
from .errors import ConfigError, InsufficientDataError, ParseError

POOLED, PER_COUNTRY = "pooled", "per-country"
MIN_REPLICAS = 50
MIN_COUNTRIES = 5


@dataclass(frozen=True, eq=False)
class IndicatorSeries:
    """One indicator per country over a contiguous year range (NaN = absent)."""

    countries: tuple
    years: tuple
    values: np.ndarray
    name: str = "value"

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        years = tuple(int(y) for y in self.years)
        if list(years) != sorted(years) or len(set(years)) != len(years):
            raise ConfigError("years must be strictly ascending")
        if values.shape != (len(self.countries), len(years)):
            raise ConfigError(f"values have shape {values.shape}")
        if np.isinf(values).any():
            raise ConfigError("indicator values must be finite")
        object.__setattr__(self, "countries", tuple(str(c) for c in self.countries))
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_frame(cls, df, country="country", year="year", value="value", name=None):
        """Build from a long table; duplicated (country, year) pairs are an error."""
        if df.duplicated([country, year]).any():
            raise ConfigError("duplicated (country, year) rows")
        wide = df.pivot(index=country, columns=year, values=value).sort_index()
        years = list(range(int(wide.columns.min()), int(wide.columns.max()) + 1))
        wide = wide.reindex(columns=years)
        return cls(tuple(wide.index), years, wide.to_numpy(dtype=float), name or value)

    @classmethod
    def from_results(cls, results, name="fitness"):
        """Country fitness series from a list of yearly FitnessResult."""
        rows = [(c, r.year, f) for r in results for c, f in zip(r.countries, r.fitness)]
        return cls.from_frame(pd.DataFrame(rows, columns=["country", "year", "value"]),
                              name=name)

    def value(self, country, year):
        return self.values[self.countries.index(country), self.years.index(year)]


def load_indicator(path, name=None):
    """Read ``country,year,value`` CSV, or a fitness table with ``label`` columns."""
    df = pd.read_csv(path, dtype={"country": str, "label": str})
    if {"country", "year", "value"} <= set(df.columns):
        pass
    elif {"label", "year", "value"} <= set(df.columns):
        df = df.rename(columns={"label": "country"})
    else:
        raise ParseError("expected columns country,year,value", 1, path)
    for col in ("year", "value"):
        num = pd.to_numeric(df[col], errors="coerce")
        bad = num.isna() & df[col].notna()
        if bad.any():
            raise ParseError(f"non-numeric {col} {df[col][bad].iloc[0]!r}",
                             int(np.flatnonzero(bad)[0]) + 2, path)
        df[col] = num
    return IndicatorSeries.from_frame(df[["country", "year", "value"]], name=name)


def _aligned(x, y):
    countries = sorted(set(x.countries) & set(y.countries))
    if not countries:
        raise InsufficientDataError("the two indicators share no country")
    xi = [x.countries.index(c) for c in countries]
    yi = [y.countries.index(c) for c in countries]
    return countries, x.values[xi], y.values[yi]


def _pairs(xv, yv, x_years, y_years, lag):
    """Per-country (x_t, y_{t+lag}) arrays over common years."""
    ymap = {yr: k for k, yr in enumerate(y_years)}
    xi, yi = [], []
    for k, yr in enumerate(x_years):
        j = ymap.get(yr + lag)
        if j is not None:
            xi.append(k)
            yi.append(j)
    return xv[:, xi], yv[:, yi]


def _lag_stats(xs, ys, mode):
    """Correlation for one lag from per-country pair arrays (rows=countries)."""
    zx, zy, per = [], [], []
    excluded = 0
    for a, b in zip(xs, ys):
        ok = ~(np.isnan(a) | np.isnan(b))
        a, b = a[ok], b[ok]
        if a.size == 0:
            continue
        sa, sb = a.std(), b.std()
        if a.size < 2 or sa == 0 or sb == 0:
            excluded += 1
            continue
        za = (a - a.mean()) / sa
        zb = (b - b.mean()) / sb
        zx.append(za)
        zy.append(zb)
        per.append(float(np.mean(za * zb)))
    n_pairs = int(sum(len(v) for v in zx))
    if n_pairs < 3:
        return np.nan, n_pairs, excluded, "too few pairs"
    if mode == PER_COUNTRY:
        corr = float(np.mean(per))
    else:
        zx = np.concatenate(zx)
        zy = np.concatenate(zy)
        corr = float(np.dot(zx, zy) / np.sqrt(np.dot(zx, zx) * np.dot(zy, zy)))
    return float(np.clip(corr, -1.0, 1.0)), n_pairs, excluded, ""


def lagged_correlation(x, y, lags, mode=POOLED):
    """Pearson correlation of ``x_c(t)`` with ``y_c(t + lag)`` for each lag.

    Each country's overlapping segment is standardised (population std)
    before pooling, so large economies do not dominate. ``mode="per-country"``
    averages the per-country coefficients instead. Countries with a
    constant segment are excluded at that lag; lags with fewer than three
    pairs are reported as NaN.

    Returns
    -------
    pandas.DataFrame
        Columns ``lag, correlation, pairs, excluded, note``.
    """
    if mode not in (POOLED, PER_COUNTRY):
        raise ConfigError(f"mode must be {POOLED!r} or {PER_COUNTRY!r}")
    lags = [int(v) for v in lags]
    if not lags:
        raise ConfigError("no lag requested")
    _, xv, yv = _aligned(x, y)
    rows = []
    for lag in lags:
        xs, ys = _pairs(xv, yv, x.years, y.years, lag)
        corr, n, excluded, note = _lag_stats(xs, ys, mode)
        rows.append((lag, corr, n, excluded, note))
    return pd.DataFrame(rows, columns=["lag", "correlation", "pairs", "excluded", "note"])


def _replica(task):
    xv, yv, x_years, y_years, lags, mode, seed = task
    rng = np.random.default_rng(seed)
    pick = rng.integers(0, xv.shape[0], size=xv.shape[0])
    xs_all, ys_all = xv[pick], yv[pick]
    out = []
    for lag in lags:
        xs, ys = _pairs(xs_all, ys_all, x_years, y_years, lag)
        out.append(_lag_stats(xs, ys, mode)[0])
    return out


def bootstrap_band(x, y, lags, replicas=200, quantiles=(0.25, 0.75), seed=0, mode=POOLED,
                   jobs=1):
    """Country-bootstrap quantile band of the lagged correlation.

    Countries are resampled with replacement ``replicas`` times and the
    lagged correlation is recomputed on each resample.

    Returns
    -------
    pandas.DataFrame
        Columns ``lag, correlation, pairs, q25, q75, mode`` (quantile column
        names follow ``quantiles``).
    """
    if replicas < MIN_REPLICAS:
        raise ConfigError(f"replicas must be >= {MIN_REPLICAS}, got {replicas}")
    lo, hi = (float(q) for q in quantiles)
    if not 0 <= lo <= hi <= 1:
        raise ConfigError(f"invalid quantiles {quantiles}")
    point = lagged_correlation(x, y, lags, mode)
    countries, xv, yv = _aligned(x, y)
    if len(countries) < MIN_COUNTRIES:
        raise InsufficientDataError(f"need at least {MIN_COUNTRIES} common countries, "
                                    f"got {len(countries)}")
    lags = [int(v) for v in lags]
    seeds = np.random.SeedSequence(int(seed)).spawn(int(replicas))
    tasks = [(xv, yv, x.years, y.years, lags, mode, s) for s in seeds]
    draws = np.array(map_tasks(_replica, tasks, jobs), dtype=float)
    q = np.full((2, len(lags)), np.nan)
    for k in range(len(lags)):
        col = draws[:, k]
        col = col[~np.isnan(col)]
        if col.size:
            q[:, k] = np.quantile(col, [lo, hi])
    return pd.DataFrame({
        "lag": point["lag"], "correlation": point["correlation"], "pairs": point["pairs"],
        f"q{round(lo * 100):02d}": q[0], f"q{round(hi * 100):02d}": q[1], "mode": mode})


def write_correlation_csv(table, path, mode=POOLED):
    """Write ``lag,correlation,pairs,q25,q75,mode``; missing bands stay empty."""
    cols = ["lag", "correlation", "pairs", "q25", "q75", "mode"]
    out = table.copy()
    for c in ("q25", "q75"):
        if c not in out:
            out[c] = np.nan
    out["mode"] = mode
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in out[cols].itertuples(index=False):
            writer.writerow(["" if isinstance(v, float) and np.isnan(v) else
                             (repr(v) if isinstance(v, float) else v) for v in row])
