"""Hide 10% of the leaf cells of a complete panel and score three reconstructions.

kNN borrows the shape of similar economies, forward interpolation only
looks back in time, and the forest regresses each code on the others.

Run: python3 demos/02_reconstruction_benchmark.py
"""
from universal_efc.imputation import FOREST, INTERPOLATE, ImputerConfig, evaluate_mae
from universal_efc.synthetic import correlated_services_panel
from universal_efc.taxonomy import parse_taxonomy

tree = parse_taxonomy()
panel = correlated_services_panel(tree, n_countries=40, years=range(2000, 2020), seed=1)
methods = [ImputerConfig(k=5), ImputerConfig(method=INTERPOLATE),
           ImputerConfig(method=FOREST, trees=20, seed=1)]
report = evaluate_mae(panel, tree, methods, replicas=10, seed=1)

table = report.aggregate()
print(table.pivot(index="layer", columns="method", values="mean_mae").round(1).to_string())
print()
for name in ("knn-k5", "interpolate", table["method"].iloc[-1]):
    print(f"{name:>14}: mean MAE {report.mean_mae(name):9.1f}")
