"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline;
they are also written when output is captured.
"""
import csv
import filecmp
import subprocess
import sys
import time

import numpy as np
from scipy.stats import rankdata

from universal_efc.analysis import bootstrap_band, lagged_correlation
from universal_efc.complexity import fitness_complexity
from universal_efc.imputation import ImputerConfig, evaluate_mae
from universal_efc.imputation.config import INTERPOLATE
from universal_efc.imputation.evaluate import evaluation_panel
from universal_efc.panel import SmoothingConfig, exp_smooth
from universal_efc.progression import (assist_matrix, bicm_fit, bicm_sample,
                                       progression_network, validate_delta)
from universal_efc.progression.assist import assist_array
from universal_efc.synthetic import (correlated_services_panel, lead_lag_indicators,
                                     nested_matrix, planted_progression)
from universal_efc.taxonomy import check_sum_consistency, parse_taxonomy, rollup


def report(capsys, n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def spearman(a, b):
    """Pearson correlation of average ranks; identical ranks give exactly 1.0."""
    ra = rankdata(a) - (len(a) + 1) / 2
    rb = rankdata(b) - (len(b) + 1) / 2
    return float(np.dot(ra, rb) / np.sqrt(np.dot(ra, ra) * np.dot(rb, rb)))


def test_criterion_01_fitness_fixed_point(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    converged, worst = 0, 0.0
    for _ in range(100):
        m = (rng.random((50, 100)) < 0.3).astype(float)
        m = m[m.sum(axis=1) > 0]
        m = m[:, m.sum(axis=0) > 0]
        base = fitness_complexity(m, tol=1e-10, max_iter=1000)
        converged += base.converged
        for _ in range(10):
            q0 = rng.uniform(0.01, 10.0, m.shape[1])
            other = fitness_complexity(m, tol=1e-10, max_iter=1000, initial_q=q0)
            worst = max(worst, np.abs(other.fitness - base.fitness).max(),
                        np.abs(other.complexity - base.complexity).max())
    elapsed = time.perf_counter() - t0
    ok = converged >= 99 and worst <= 1e-8 and elapsed <= 60
    report(capsys, 1, ok, f"{converged}/100 converged, max restart deviation {worst:.2e}, "
                          f"{elapsed:.1f}s")


def test_criterion_02_nestedness_ordering(capsys):
    shapes = [(n, n) for n in range(2, 31)] + [(10, 30), (30, 10), (17, 23), (30, 29)]
    worst_f = worst_q = 1.0
    for n_c, n_a in shapes:
        m = nested_matrix(n_c, n_a)
        res = fitness_complexity(m)
        worst_f = min(worst_f, spearman(res.fitness, m.sum(axis=1)))
        worst_q = min(worst_q, spearman(res.complexity, -m.sum(axis=0)))
    ok = worst_f == 1.0 and worst_q == 1.0
    report(capsys, 2, ok, f"{len(shapes)} nested shapes, min rho(F, diversification)="
                          f"{worst_f!r}, min rho(Q, -ubiquity)={worst_q!r}")


def test_criterion_03_symmetry(capsys):
    worst = 0.0
    for shape in [(1, 1), (1, 7), (7, 1), (3, 5), (50, 100), (123, 17)]:
        res = fitness_complexity(np.ones(shape), max_iter=1)
        worst = max(worst, np.abs(res.fitness - 1).max(), np.abs(res.complexity - 1).max())
    report(capsys, 3, worst <= 1e-12, f"all-ones F, Q after one iteration, max |x-1| {worst:.1e}")


def test_criterion_04_assist_identity(capsys):
    rng = np.random.default_rng(4)
    worst = 0.0
    done = 0
    while done < 1000:
        n_c, n_a = rng.integers(2, 30, 2)
        a = (rng.random((n_c, n_a)) < rng.uniform(0.2, 0.8)).astype(float)
        b = (rng.random((n_c, n_a)) < rng.uniform(0.2, 0.8)).astype(float)
        if (a.sum(0) == 0).any() or (a.sum(1) == 0).any() or (b.sum(0) == 0).any() \
                or (b.sum(1) == 0).any():
            continue
        worst = max(worst, np.abs(assist_array(a, b).sum(axis=1) - 1).max())
        done += 1
    eye = assist_matrix(np.eye(2), np.eye(2)).cells
    half = assist_matrix(np.ones((2, 2)), np.ones((2, 2))).cells
    ok = worst <= 1e-9 and np.array_equal(eye, np.eye(2)) and np.array_equal(half,
                                                                              np.full((2, 2), .5))
    report(capsys, 4, ok, f"1000 pairs, max |row sum - 1| {worst:.1e}; 2x2 hand cases exact")


def test_criterion_05_bicm_fidelity(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst_fit, worst_share = 0.0, 1.0
    for _ in range(50):
        m = (rng.random((40, 80)) < rng.uniform(0.1, 0.5)).astype(float)
        model = bicm_fit(m)
        worst_fit = max(worst_fit, np.abs(model.expected_row_degrees() - m.sum(1)).max(),
                        np.abs(model.expected_col_degrees() - m.sum(0)).max())
        samples = bicm_sample(model, seed=int(rng.integers(2**32)), size=1000)
        p = model.probabilities
        inside = []
        for axis, expected in ((2, p.sum(1)), (1, p.sum(0))):
            mean = samples.sum(axis=axis).mean(axis=0)
            se = np.sqrt((p * (1 - p)).sum(axis=axis - 1) / 1000)
            inside.append(np.where(se > 0, np.abs(mean - expected) <= 3 * se,
                                   mean == expected))
        worst_share = min(worst_share, float(np.concatenate(inside).mean()))
    elapsed = time.perf_counter() - t0
    ok = worst_fit <= 1e-6 and worst_share >= 0.95 and elapsed <= 120
    report(capsys, 5, ok, f"max degree error {worst_fit:.1e}, worst share within 3 SE "
                          f"{worst_share:.3f}, {elapsed:.1f}s")


def test_criterion_06_validation_sanity(capsys):
    nested = 0
    for s in range(20):
        rng = np.random.default_rng([6, s])
        panels = {2000 + k: (rng.random((25, 8)) < 0.35).astype(float) for k in range(4)}
        for delta in (0, 1, 2):
            v95 = validate_delta(panels, delta, ensemble=200, percentile=95, seed=s)
            v99 = validate_delta(panels, delta, ensemble=200, percentile=99, seed=s)
            nested += bool(np.all(v95 | ~v99))
    recovered = 0
    for s in range(20):
        net = progression_network(planted_progression(seed=s), (1, 1), ensemble=1000,
                                  percentile=95, seed=s)
        recovered += net.weights[0, 1] >= 1
    ok = nested == 60 and recovered >= 19
    report(capsys, 6, ok, f"99%-set within 95%-set in {nested}/60 cases, planted link "
                          f"recovered in {recovered}/20 seeds")


def test_criterion_07_imputation_ordering(capsys):
    t0 = time.perf_counter()
    tree = parse_taxonomy()
    wins = 0
    for seed in range(10):
        panel = correlated_services_panel(tree, n_countries=40, years=range(2000, 2020),
                                          seed=seed)
        rep = evaluate_mae(panel, tree, [ImputerConfig(k=5), ImputerConfig(method=INTERPOLATE)],
                           replicas=100, fraction=0.10, seed=seed)
        wins += rep.mean_mae("knn-k5") < rep.mean_mae("interpolate")
    panel = correlated_services_panel(tree, seed=0)
    truth = evaluation_panel(panel, tree)
    oracle = evaluate_mae(panel, tree, [("oracle", lambda masked, t: truth)], replicas=100)
    oracle_zero = bool((oracle.rows["mae"].dropna() == 0).all())
    elapsed = time.perf_counter() - t0
    ok = wins >= 8 and oracle_zero and elapsed <= 300
    report(capsys, 7, ok, f"kNN beats interpolation in {wins}/10 seeds, oracle MAE zero: "
                          f"{oracle_zero}, {elapsed:.1f}s")


def test_criterion_08_smoothing(capsys):
    cfg = SmoothingConfig(3)
    closed = (1 - cfg.alpha) ** 3
    impulse = float(exp_smooth(np.array([1.0, 0.0, 0.0, 0.0]), cfg)[3])
    const = exp_smooth(np.full((3, 2, 12), 7.25), cfg)
    # (1 - alpha)**3 is 0.5 only up to the rounding of 2**(-1/3)
    ok = (impulse == closed and abs(impulse - 0.5) <= 4 * np.finfo(float).eps
          and np.array_equal(const, np.full((3, 2, 12), 7.25)))
    report(capsys, 8, ok, f"impulse after 3 steps {impulse!r} (closed form {closed!r}); "
                          f"constant series unchanged")


def _independent_rollup(leaves_panel, path):
    """Parent values by walking the taxonomy CSV directly."""
    with open(path, newline="", encoding="utf-8") as fh:
        parent = {r["code"]: r["parent"] for r in csv.DictReader(fh)}
    totals = {}
    for j, code in enumerate(leaves_panel.activities):
        node = code
        while node:
            totals[node] = totals.get(node, 0.0) + leaves_panel.values[:, j, :]
            node = parent.get(node, "")
    return totals


def test_criterion_09_taxonomy_fixture(capsys):
    from importlib.resources import files
    tree = parse_taxonomy()
    leaves = correlated_services_panel(tree, n_countries=12, years=range(2000, 2008), seed=9)
    full = rollup(tree, leaves)
    expected = _independent_rollup(leaves, files("universal_efc") / "data" / "bop_taxonomy.csv")
    worst = max(float(np.max(np.abs(full.values[:, full.activities.index(c), :] - v) / v))
                for c, v in expected.items())
    again = rollup(tree, full)
    consistent = check_sum_consistency(tree, full).ok
    ok = (len(tree.complete_set) == 27 and worst <= 1e-6 and consistent
          and np.array_equal(again.values, full.values) and again.activities == full.activities)
    report(capsys, 9, ok, f"{len(tree.complete_set)} complete-set codes, max parent rel. "
                          f"error {worst:.1e}, rollup idempotent")


def test_criterion_10_lagged_correlation(capsys):
    x, y = lead_lag_indicators(seed=10, lead=5)
    lags = list(range(11))
    table = lagged_correlation(x, y, lags).set_index("lag")["correlation"].astype(float)
    band = bootstrap_band(x, y, lags, replicas=200, seed=3)
    again = bootstrap_band(x, y, lags, replicas=200, seed=3)
    parallel = bootstrap_band(x, y, lags, replicas=200, seed=3, jobs=2)
    ordered = bool((band["q25"] <= band["q75"]).all())
    same = band.equals(again) and band.equals(parallel)
    ok = (abs(table[5] - 1.0) <= 1e-12 and table[0] < 0.5 and table[10] < 0.5
          and ordered and same)
    report(capsys, 10, ok, f"corr lag5={float(table[5])!r}, lag0={table[0]:.3f}, lag10={table[10]:.3f}; "
                           f"bands ordered: {ordered}; deterministic: {same}")


def _pipeline(workdir, data, jobs):
    workdir.mkdir()
    cli = [sys.executable, "-m", "universal_efc.cli"]
    steps = [
        ["impute", "--services", data / "services.csv", "--goods", data / "goods.csv",
         "--out", workdir / "universal.csv", "--residuals", workdir / "residuals.csv",
         "--method", "knn", "--jobs", jobs],
        ["metrics", "--panel", workdir / "universal.csv", "--out-fitness",
         workdir / "fitness.csv", "--out-complexity", workdir / "complexity.csv"],
        ["network", "--panel", workdir / "universal.csv", "--out-edges", workdir / "edges.csv",
         "--out-nodes", workdir / "nodes.csv", "--seed", "0", "--ensemble", "100",
         "--delta-min", "0", "--delta-max", "10", "--jobs", jobs],
        ["correlate", "--x", workdir / "fitness.csv", "--y", data / "gdp.csv",
         "--out", workdir / "correlation.csv", "--lags", "0:10", "--bootstrap", "200",
         "--seed", "0", "--jobs", jobs],
    ]
    t0 = time.perf_counter()
    for step in steps:
        subprocess.run(cli + [str(a) for a in step], check=True, capture_output=True)
    return time.perf_counter() - t0


def test_criterion_11_pipeline_reproducibility(capsys, tmp_path):
    data = tmp_path / "data"
    subprocess.run([sys.executable, "-m", "universal_efc.cli", "synth", "--out-dir", str(data),
                    "--seed", "0"], check=True, capture_output=True)
    times = {name: _pipeline(tmp_path / name, data, jobs)
             for name, jobs in (("a", "1"), ("b", "1"), ("c", "4"))}
    names = ["universal.csv", "residuals.csv", "fitness.csv", "complexity.csv", "edges.csv",
             "nodes.csv", "correlation.csv"]
    _, mismatch_ab, _ = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    _, mismatch_ac, _ = filecmp.cmpfiles(tmp_path / "a", tmp_path / "c", names, shallow=False)
    with open(tmp_path / "a" / "edges.csv") as fh:
        n_edges = sum(1 for _ in fh) - 1
    ok = not mismatch_ab and not mismatch_ac and max(times.values()) <= 600
    report(capsys, 11, ok, f"{len(names)} outputs identical across runs "
                           f"({not mismatch_ab}) and jobs 1 vs 4 ({not mismatch_ac}); "
                           f"{n_edges} edges; run times "
                           + ", ".join(f"{t:.0f}s" for t in times.values()))
