# ## Comparing heuristics
# `info_on_demand` looks up the distance to the nearest cell carrying a
# useful label at every expansion.  It explores fewer nodes but each
# expansion costs a graph search, so wall time goes up.
from tlrelax.bench import FIXTURES, run_scenario

for r in run_scenario(FIXTURES["heur30"]):
    print(f"{r.heuristic:>16} nodes={r.nodes_explored:6d} cost={r.cost_total:g} "
          f"runtime={r.runtime:.3f}s precompute={r.precompute_time:.3f}s")
