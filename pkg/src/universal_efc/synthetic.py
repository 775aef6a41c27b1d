"""Deterministic synthetic data for tests, benchmarks and demos.

Real BOP and COMTRADE extracts cannot be redistributed, so every workflow
of the package can also run on data generated here. All generators are
pure functions of their seed.
"""
import itertools
import string

import numpy as np
import pandas as pd

from .analysis import IndicatorSeries
from .panel import ExportPanel
from .taxonomy import GOODS_CODES, parse_taxonomy, rollup


def country_codes(n):
    """``n`` distinct three-letter codes (AAA, AAB, ...)."""
    letters = string.ascii_uppercase
    return ["".join(t) for t in itertools.islice(itertools.product(letters, repeat=3), n)]


def _capabilities(rng, n_countries, n_years):
    """Country log-size and capability paths, shape (C, Y)."""
    size = rng.normal(0.0, 1.0, n_countries)
    growth = rng.normal(0.03, 0.02, n_countries)
    theta = rng.normal(0.0, 1.0, n_countries)
    drift = rng.normal(0.02, 0.03, n_countries)
    t = np.arange(n_years)
    log_size = size[:, None] + growth[:, None] * t
    capability = theta[:, None] + drift[:, None] * t
    return log_size, capability


def _exports(rng, log_size, capability, complexity, scale, noise, kappa=1.5):
    """log E = size + log scale - kappa * max(0, complexity - capability) + noise."""
    gap = np.maximum(0.0, complexity[None, :, None] - capability[:, None, :])
    logv = (log_size[:, None, :] + np.log(scale)[None, :, None] - kappa * gap
            + noise * rng.standard_normal(gap.shape))
    return np.exp(logv)


def correlated_services_panel(tree=None, n_countries=40, years=range(2000, 2020), seed=0,
                              n_clusters=4, noise=0.3):
    """Complete-set services panel of clustered, correlated economies.

    Economies of one cluster share a sector profile; each cell gets
    independent lognormal noise every year. No value is missing.
    """
    tree = tree or parse_taxonomy()
    rng = np.random.default_rng(seed)
    years = list(years)
    codes = tree.complete_set
    n_a, n_y = len(codes), len(years)
    log_size, _ = _capabilities(rng, n_countries, n_y)
    cluster = rng.integers(0, n_clusters, n_countries)
    profiles = rng.dirichlet(np.full(n_a, 0.8), n_clusters) * n_a
    own = profiles[cluster] * np.exp(0.1 * rng.standard_normal((n_countries, n_a)))
    eps = noise * rng.standard_normal((n_countries, n_a, n_y))
    values = 1e3 * np.exp(log_size[:, None, :] + eps) * own[:, :, None]
    return ExportPanel(country_codes(n_countries), codes, years, values)


def universal_dataset(seed=0, n_countries=160, goods_years=(1996, 2018),
                      services_years=(1990, 2018), tree=None):
    """Goods panel, raw services panel with gaps, and a GDP table.

    Services include every code of the tree (aggregates consistent with the
    leaves where observed) and mimic the missing-data pattern of BOP: late
    starting series, scattered gaps and a few never reported codes.
    Aggregates are reported more often than leaves.

    Returns
    -------
    goods : ExportPanel
    services : ExportPanel
    gdp : pandas.DataFrame
        Columns ``country, year, value``; GDP follows total exports with a
        five-year delay.
    """
    tree = tree or parse_taxonomy()
    rng = np.random.default_rng(seed)
    g0, g1 = goods_years
    s0, s1 = services_years
    y0, y1 = min(g0, s0), max(g1, s1)
    all_years = list(range(y0, y1 + 1))
    n_y = len(all_years)
    countries = country_codes(n_countries)
    log_size, capability = _capabilities(rng, n_countries, n_y)

    goods_cplx = rng.normal(0.0, 1.0, len(GOODS_CODES))
    goods_scale = 1e3 * np.exp(rng.normal(0.0, 0.7, len(GOODS_CODES)))
    goods = _exports(rng, log_size, capability, goods_cplx, goods_scale, 0.15)
    gsel = slice(g0 - y0, g1 - y0 + 1)
    goods_panel = ExportPanel(countries, GOODS_CODES, range(g0, g1 + 1), goods[:, :, gsel])

    leaves = tree.complete_set
    serv_cplx = rng.normal(0.3, 1.0, len(leaves))
    serv_scale = 5e2 * np.exp(rng.normal(0.0, 0.7, len(leaves)))
    serv_all = _exports(rng, log_size, capability, serv_cplx, serv_scale, 0.2)
    serv = serv_all[:, :, s0 - y0:s1 - y0 + 1]
    s_years = list(range(s0, s1 + 1))
    full = rollup(tree, ExportPanel(countries, leaves, s_years, serv))
    values = np.array(full.values)
    n_s = len(s_years)
    leaf_cols = np.array([full.activities.index(c) for c in leaves])
    is_leaf = np.zeros(len(full.activities), bool)
    is_leaf[leaf_cols] = True
    # late starting reporters
    start = np.where(rng.random(n_countries) < 0.4, rng.integers(0, 15, n_countries), 0)
    for i in range(n_countries):
        values[i, :, :start[i]] = np.nan
        lag = rng.integers(0, 4, len(full.activities)) * is_leaf
        for j in range(len(full.activities)):
            values[i, j, :start[i] + lag[j]] = np.nan
    # scattered short gaps, mostly in leaves
    p_gap = np.where(is_leaf, 0.04, 0.01)
    for j in range(len(full.activities)):
        holes = rng.random((n_countries, n_s)) < p_gap[j]
        values[:, j, :][holes] = np.nan
    # a few leaves never reported by a country
    never = rng.random((n_countries, len(leaves))) < 0.02
    for i, k in zip(*np.nonzero(never)):
        values[i, leaf_cols[k], :] = np.nan
    services_panel = ExportPanel(countries, full.activities, s_years, values)

    total = goods.sum(axis=1) + serv_all.sum(axis=1)
    lead = 5
    gdp = np.empty_like(total)
    gdp[:, lead:] = 3.0 * total[:, :-lead]
    gdp[:, :lead] = 3.0 * total[:, :1]
    gdp *= np.exp(0.05 * rng.standard_normal(gdp.shape))
    ci, yi = np.meshgrid(range(n_countries), range(n_y), indexing="ij")
    gdp_df = pd.DataFrame({"country": np.asarray(countries)[ci.ravel()],
                           "year": np.asarray(all_years)[yi.ravel()],
                           "value": gdp.ravel()})
    gdp_df = gdp_df[(gdp_df["year"] >= g0) & (gdp_df["year"] <= g1)].reset_index(drop=True)
    return goods_panel, services_panel, gdp_df


def nested_matrix(n_countries, n_activities=None):
    """Perfectly nested binary matrix: country i exports the first i+1 activities
    (scaled to the number of activities)."""
    n_activities = n_activities or n_countries
    ks = np.ceil((np.arange(1, n_countries + 1) * n_activities) / n_countries).astype(int)
    m = np.zeros((n_countries, n_activities))
    for i, k in enumerate(ks):
        m[i, :k] = 1.0
    return m


def nested_panel(n_countries=6, years=range(2000, 2004), value=100.0):
    """Export panel whose binarised RCA is perfectly nested.

    Country i exports ``value`` in activities 0..i and nothing else. Every
    exported cell then has RCA >= (n+1)/(2n), every other cell RCA = 0, so
    binarising at a threshold of 0.5 recovers the triangle. (With the
    usual threshold of 1 a nested triangle cannot arise from RCA: the full
    row and the full column would both need RCA exactly 1.)
    """
    years = list(years)
    m = nested_matrix(n_countries)
    values = np.repeat((value * m)[:, :, None], len(years), axis=2)
    return ExportPanel(country_codes(n_countries), [f"{a + 1:02d}" for a in range(n_countries)],
                       years, values)


def planted_progression(seed=0, n_countries=30, n_activities=10, years=range(2000, 2006),
                        density=0.3, source=0, target=1):
    """Yearly binary matrices where ``target`` at t+1 copies ``source`` at t."""
    rng = np.random.default_rng(seed)
    years = list(years)
    m = (rng.random((len(years), n_countries, n_activities)) < density).astype(float)
    for k in range(1, len(years)):
        m[k, :, target] = m[k - 1, :, source]
    return {y: m[k] for k, y in enumerate(years)}


def lead_lag_indicators(seed=0, n_countries=30, years=range(1990, 2020), lead=5):
    """Noise indicator ``x`` and ``y`` with ``y_c(t) = x_c(t - lead)``."""
    rng = np.random.default_rng(seed)
    years = list(years)
    n_y = len(years)
    raw = rng.standard_normal((n_countries, n_y + lead)) + rng.normal(0, 3, (n_countries, 1))
    x = raw[:, lead:]
    y = raw[:, :n_y]
    countries = country_codes(n_countries)
    return (IndicatorSeries(countries, years, x, "fitness"),
            IndicatorSeries(countries, years, y, "gdp"))
