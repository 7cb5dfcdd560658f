# ## Trading optimality for search effort
# Larger gamma pushes the search toward automaton progress.  Cost stays put
# for a while, then may grow a little; the node count drops sharply.
from tlrelax.bench import FIXTURES, run_scenario

records = run_scenario(FIXTURES["gamma50"])
base = records[0]
print(f"{'heuristic':>10} {'gamma':>6} {'cost':>6} {'nodes':>7} {'ratio':>6} {'delta':>6}")
for r in records:
    print(f"{r.heuristic:>10} {r.gamma:6g} {r.cost_total:6g} {r.nodes_explored:7d} "
          f"{r.nodes_explored / base.nodes_explored:6.2f} {r.delta:6.3f}")
