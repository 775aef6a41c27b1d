"""Lagged correlation between an indicator and a series it leads by five years.

Run: python3 demos/05_fitness_gdp_correlation.py
"""
from universal_efc.analysis import bootstrap_band
from universal_efc.synthetic import lead_lag_indicators

x, y = lead_lag_indicators(seed=0, n_countries=40, lead=5)
band = bootstrap_band(x, y, range(0, 11), replicas=200, seed=0)
for row in band.itertuples(index=False):
    bar = "#" * max(0, round(20 * row.correlation))
    print(f"lag {row.lag:2d}  r={row.correlation:6.3f}  [{row.q25:6.3f}, {row.q75:6.3f}]  {bar}")
