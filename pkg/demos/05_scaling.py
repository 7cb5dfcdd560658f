# ## How the savings scale with the map
# Square grids of growing size, five goals placed at random.
from tlrelax.bench import PHI_FIVE, nodes_ratio, scaling_sweep

records = scaling_sweep([25, 100, 2500, 10000], PHI_FIVE, gamma=10, seed=0)
for r in records:
    print(f"{r.scenario:>10} {r.heuristic:>9} nodes={r.nodes_explored:7d} cost={r.cost_total:g} "
          f"runtime={r.runtime:.3f}s")
print("informed / uninformed nodes:", {k: round(v, 3) for k, v in nodes_ratio(records).items()})
