"""Walk the services taxonomy and look at where the raw data has holes.

Run: python3 demos/01_taxonomy_and_gaps.py
"""
from universal_efc.synthetic import universal_dataset
from universal_efc.taxonomy import check_sum_consistency, missing_share, parse_taxonomy

tree = parse_taxonomy()
print(f"taxonomy: {len(tree.codes)} codes, depth {tree.depth}, "
      f"{len(tree.complete_set)} complete-set leaves")
for layer in range(tree.depth + 1):
    print(f"  layer {layer}: {', '.join(tree.codes_at_layer(layer))}")

goods, services, gdp = universal_dataset(seed=0, n_countries=60)
print(f"\ngoods {goods.shape}, services {services.shape}, gdp rows {len(gdp)}")

# aggregates are reported more often than the leaves they are made of
print("\nmissing share by layer")
print(missing_share(services, tree, "layer").round(3).to_string())

by_year = missing_share(services, tree, "year")
print("\nmissing complete-set share, first and last years")
print(by_year.iloc[[0, 1, 2, -3, -2, -1]].round(3).to_string())

rep = check_sum_consistency(tree, services)
print(f"\nsum consistency on the raw panel: {'OK' if rep.ok else 'violations'} "
      f"({len(rep.rows)} rows checked against children)")
