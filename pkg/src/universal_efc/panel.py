"""Country x activity x year export panels.

A panel stores export values in a dense ``float64`` array of shape
``(n_countries, n_activities, n_years)``. Missing cells are ``NaN``; a
recorded zero is a real observation and is never confused with a missing
entry.
"""
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AxisCollisionError,
    ConfigError,
    ConflictError,
    DomainError,
    EmptyIntersectionError,
    ParseError,
    StructureError,
)

MISSING = np.nan

#: masking fraction used by the reconstruction benchmarks
DEFAULT_MASK_FRACTION = 0.10

#: half-life (years) of the smoothing applied to RCA and market-share series
DEFAULT_HALF_LIFE = 3.0


def _frozen(array, dtype=float):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ExportPanel:
    """Immutable export panel.

    Parameters
    ----------
    countries : sequence of str
        Country codes, unique.
    activities : sequence of str
        Activity codes (goods chapters or service codes), unique.
    years : sequence of int
        Contiguous ascending range of calendar years.
    values : array_like, shape (n_countries, n_activities, n_years)
        Export values; ``NaN`` marks a missing cell.
    """

    countries: tuple
    activities: tuple
    years: tuple
    values: np.ndarray

    def __post_init__(self):
        countries = tuple(str(c) for c in self.countries)
        activities = tuple(str(a) for a in self.activities)
        years = tuple(int(y) for y in self.years)
        values = _frozen(self.values)
        for name, axis in (("country", countries), ("activity", activities),
                           ("year", years)):
            if len(set(axis)) != len(axis):
                raise StructureError(f"duplicate {name} labels")
        if years and list(years) != list(range(years[0], years[0] + len(years))):
            raise StructureError("years must form a contiguous ascending range")
        shape = (len(countries), len(activities), len(years))
        if values.shape != shape:
            raise StructureError(
                f"values have shape {values.shape}, axes imply {shape}")
        present = values[~np.isnan(values)]
        if not np.all(np.isfinite(present)):
            raise DomainError("export values must be finite")
        if np.any(present < 0):
            raise DomainError("export values must be non-negative")
        object.__setattr__(self, "countries", countries)
        object.__setattr__(self, "activities", activities)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape

    @property
    def missing(self):
        """Boolean array, True where the cell is missing."""
        return np.isnan(self.values)

    @property
    def n_missing(self):
        return int(self.missing.sum())

    @property
    def n_present(self):
        return int(self.values.size - self.n_missing)

    def with_values(self, values):
        """Return a panel with the same axes and new values."""
        return ExportPanel(self.countries, self.activities, self.years, values)

    def year_index(self, year):
        try:
            return self.years.index(int(year))
        except ValueError:
            raise KeyError(f"year {year} not in panel") from None

    def year_slice(self, year):
        """Country x activity array for one year (NaN for missing)."""
        return np.array(self.values[:, :, self.year_index(year)])

    def select(self, countries=None, activities=None, years=None):
        """Sub-panel restricted to the given labels (kept in the given order)."""
        c_idx = _indices(self.countries, countries)
        a_idx = _indices(self.activities, activities)
        y_idx = _indices(self.years, None if years is None else [int(y) for y in years])
        vals = self.values[np.ix_(c_idx, a_idx, y_idx)]
        return ExportPanel([self.countries[i] for i in c_idx],
                           [self.activities[i] for i in a_idx],
                           [self.years[i] for i in y_idx], vals)

    def equals(self, other):
        """Exact equality of axes and values (missing cells compare equal)."""
        return (self.countries == other.countries
                and self.activities == other.activities
                and self.years == other.years
                and np.array_equal(self.values, other.values, equal_nan=True))


def _indices(axis, labels):
    if labels is None:
        return list(range(len(axis)))
    lookup = {lab: i for i, lab in enumerate(axis)}
    try:
        return [lookup[lab] for lab in labels]
    except KeyError as exc:
        raise KeyError(f"label {exc.args[0]!r} not in axis") from None


@dataclass(frozen=True, eq=False)
class PanelMask:
    """Cells hidden on purpose from a panel (same axes as the panel)."""

    countries: tuple
    activities: tuple
    years: tuple
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "cells", _frozen(self.cells, dtype=bool))

    @property
    def count(self):
        return int(self.cells.sum())


@dataclass(frozen=True)
class SmoothingConfig:
    """Exponential smoothing parametrised by its half-life in years."""

    half_life: float = DEFAULT_HALF_LIFE

    def __post_init__(self):
        hl = float(self.half_life)
        if not (hl > 0 and math.isfinite(hl)):
            raise ConfigError(f"half_life must be a positive number, got {self.half_life!r}")
        object.__setattr__(self, "half_life", hl)

    @property
    def alpha(self):
        """Smoothing factor ``1 - 2**(-1/half_life)``."""
        return 1.0 - 2.0 ** (-1.0 / self.half_life)


# ---------------------------------------------------------------------------
# CSV input/output
# ---------------------------------------------------------------------------

LONG_HEADER = ["country", "activity", "year", "value"]


def _parse_value(text, line, path):
    text = text.strip()
    if text == "":
        return MISSING
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"cannot parse value {text!r}", line, path) from None
    if not math.isfinite(value):
        raise DomainError(f"non-finite value {text!r}", line, path)
    if value < 0:
        raise DomainError(f"negative export value {text!r}", line, path)
    return value


def _parse_year(text, line, path):
    try:
        return int(text.strip())
    except ValueError:
        raise ParseError(f"cannot parse year {text!r}", line, path) from None


def _build(records, path):
    """records: dict (country, activity, year) -> value."""
    if not records:
        raise ParseError("no data rows", path=path)
    countries = sorted({k[0] for k in records})
    activities = sorted({k[1] for k in records})
    ys = {k[2] for k in records}
    years = list(range(min(ys), max(ys) + 1))
    ci = {c: i for i, c in enumerate(countries)}
    ai = {a: i for i, a in enumerate(activities)}
    y0 = years[0]
    values = np.full((len(countries), len(activities), len(years)), MISSING)
    for (c, a, y), v in records.items():
        values[ci[c], ai[a], y - y0] = v
    return ExportPanel(countries, activities, years, values)


def _store(records, key, value, line, path):
    old = records.get(key)
    if old is not None and not (old == value or (np.isnan(old) and np.isnan(value))):
        raise ConflictError(f"duplicate entry {key} with conflicting values "
                            f"{old!r} and {value!r}", line, path)
    records[key] = value


def load_panel(path, format="long", year=None):
    """Read an export panel from CSV.

    Parameters
    ----------
    path : str or Path
    format : {"long", "matrix"}
        ``long`` files have the header ``country,activity,year,value``.
        ``matrix`` files hold row labels in the first column and activity
        codes in the first row. Row labels are ``COUNTRY|YEAR``, or plain
        country codes when ``year`` is given.
    year : int, optional
        Year of a single-year matrix file.

    Returns
    -------
    ExportPanel
        Axes sorted; triples absent from the file are missing. Empty value
        fields are read as missing too.
    """
    path = Path(path)
    if format not in ("long", "matrix"):
        raise ConfigError(f"unknown panel format {format!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1, path) from None
        records = {}
        if format == "long":
            if [h.strip() for h in header] != LONG_HEADER:
                raise ParseError(f"expected header {','.join(LONG_HEADER)}", 1, path)
            for line, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 4:
                    raise ParseError(f"expected 4 fields, got {len(row)}", line, path)
                c, a = row[0].strip(), row[1].strip()
                if not c or not a:
                    raise ParseError("empty country or activity", line, path)
                y = _parse_year(row[2], line, path)
                _store(records, (c, a, y), _parse_value(row[3], line, path), line, path)
        else:
            activities = [h.strip() for h in header[1:]]
            if not activities or any(not a for a in activities):
                raise ParseError("empty activity label in header", 1, path)
            for line, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ParseError(f"expected {len(header)} fields, got {len(row)}",
                                     line, path)
                label = row[0].strip()
                if year is None:
                    if "|" not in label:
                        raise ParseError(f"row label {label!r} is not COUNTRY|YEAR",
                                         line, path)
                    c, ytext = label.rsplit("|", 1)
                    y = _parse_year(ytext, line, path)
                else:
                    c, y = label, int(year)
                if not c:
                    raise ParseError("empty row label", line, path)
                for a, text in zip(activities, row[1:]):
                    _store(records, (c, a, y), _parse_value(text, line, path), line, path)
    return _build(records, path)


def _fmt(v):
    return "" if np.isnan(v) else repr(float(v))


def write_panel(panel, path, format="long", include_missing=False):
    """Write a panel as CSV (LF line endings, trailing newline).

    In ``long`` format missing cells are omitted unless ``include_missing``
    is set, in which case they are written with an empty value field.
    Values are written with ``repr`` so that reading them back is exact.
    """
    if format not in ("long", "matrix"):
        raise ConfigError(f"unknown panel format {format!r}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        vals = panel.values
        if format == "long":
            writer.writerow(LONG_HEADER)
            for i, c in enumerate(panel.countries):
                for j, a in enumerate(panel.activities):
                    for k, y in enumerate(panel.years):
                        v = vals[i, j, k]
                        if np.isnan(v) and not include_missing:
                            continue
                        writer.writerow([c, a, y, _fmt(v)])
        else:
            writer.writerow(["country|year", *panel.activities])
            for i, c in enumerate(panel.countries):
                for k, y in enumerate(panel.years):
                    writer.writerow([f"{c}|{y}", *(_fmt(v) for v in vals[i, :, k])])


# ---------------------------------------------------------------------------
# Panel operations
# ---------------------------------------------------------------------------

def merge_universal(goods, services):
    """Concatenate goods and services activities on common countries and years.

    The country and year axes of the result are the intersections of the
    inputs (countries sorted); goods activities come first. Values are
    copied unchanged.
    """
    overlap = set(goods.activities) & set(services.activities)
    if overlap:
        raise AxisCollisionError(f"activity codes present in both panels: {sorted(overlap)}")
    countries = sorted(set(goods.countries) & set(services.countries))
    if not countries:
        raise EmptyIntersectionError("goods and services share no country")
    years = sorted(set(goods.years) & set(services.years))
    if not years:
        raise EmptyIntersectionError("goods and services share no year")
    g = goods.select(countries=countries, years=years)
    s = services.select(countries=countries, years=years)
    values = np.concatenate([g.values, s.values], axis=1)
    return ExportPanel(countries, goods.activities + services.activities, years, values)


def exp_smooth(data, cfg=None):
    """Exponentially smooth every series along the year (last) axis.

    ``s_0`` is the first present value and ``s_t = a*x_t + (1-a)*s_{t-1}``
    with ``a = 1 - 2**(-1/half_life)``. Missing cells stay missing and are
    skipped by the recursion (the state is carried over the gap).

    Parameters
    ----------
    data : ExportPanel or ndarray
        Any array whose last axis is time, or a panel.
    cfg : SmoothingConfig or float, optional
        Half-life configuration; a bare number is read as the half-life.

    Returns
    -------
    Same type as ``data``.
    """
    if cfg is None:
        cfg = SmoothingConfig()
    elif not isinstance(cfg, SmoothingConfig):
        cfg = SmoothingConfig(cfg)
    alpha = cfg.alpha
    x = data.values if isinstance(data, ExportPanel) else np.asarray(data, dtype=float)
    out = np.full(x.shape, np.nan)
    state = np.full(x.shape[:-1], np.nan)
    for t in range(x.shape[-1]):
        xt = x[..., t]
        present = ~np.isnan(xt)
        fresh = present & np.isnan(state)
        upd = present & ~fresh
        state = np.where(fresh, xt, state)
        # s + a*(x - s) keeps constant series exactly constant
        state = np.where(upd, state + alpha * (xt - state), state)
        out[..., t] = np.where(present, state, np.nan)
    if isinstance(data, ExportPanel):
        return data.with_values(out)
    return out


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def mask_random(panel, fraction=DEFAULT_MASK_FRACTION, seed=0, eligible=None):
    """Hide a random subset of the present cells.

    Exactly ``round(fraction * n_present)`` cells are chosen uniformly
    without replacement (``n_present`` counts present cells inside
    ``eligible`` when given).

    Returns
    -------
    masked : ExportPanel
    mask : PanelMask
    """
    fraction = float(fraction)
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"fraction must lie in (0, 1), got {fraction}")
    present = ~panel.missing
    if eligible is not None:
        present &= np.asarray(eligible, dtype=bool)
    flat = np.flatnonzero(present)
    if flat.size == 0:
        raise ConfigError("panel has no present value to mask")
    n = _round_half_up(fraction * flat.size)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(flat, size=n, replace=False)
    cells = np.zeros(panel.shape, dtype=bool)
    cells.flat[chosen] = True
    values = np.array(panel.values)
    values[cells] = MISSING
    mask = PanelMask(panel.countries, panel.activities, panel.years, cells)
    return panel.with_values(values), mask
