"""Fill the services gaps, merge with goods and rank countries by fitness.

Run: python3 demos/03_fitness_ranking.py
"""
from universal_efc.complexity import rank_series, yearly_fitness
from universal_efc.imputation import ImputerConfig, impute
from universal_efc.panel import merge_universal
from universal_efc.synthetic import universal_dataset
from universal_efc.taxonomy import node_kind, parse_taxonomy

tree = parse_taxonomy()
goods, services, _ = universal_dataset(seed=0, n_countries=80)
filled = impute(services, tree, ImputerConfig(k=5))
print(f"imputation left {len(filled.residuals)} cells unfilled")

leaves = filled.panel.select(activities=tree.complete_set)
universal = merge_universal(goods, leaves)
print(f"universal panel: {universal.shape}")

results = yearly_fitness(universal, half_life=3)
last = results[-1]
print(f"\n{last.year}: converged={last.converged} after {last.iterations} iterations")

fit = rank_series([last], by="fitness").sort_values("rank")
print("\ntop 10 countries")
print(fit.head(10)[["label", "value", "rank"]].to_string(index=False))

cx = rank_series([last]).sort_values("rank")
cx["kind"] = [node_kind(a) for a in cx["label"]]
print("\nmost complex activities")
print(cx.head(10)[["label", "kind", "value"]].to_string(index=False))
print("\nmedian complexity rank by kind")
print(cx.groupby("kind")["rank"].median().to_string())
