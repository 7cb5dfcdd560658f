# ## Planning when the map cannot satisfy the task
# The environment has no cell labeled `b` or `e`.  Preference rules say how
# the task may be bent: visit `k` (penalty 3) or `j` (penalty 5) instead of `b`,
# and skip `e` altogether for 2.
from tlrelax.bench import FIXTURES, build_env
from tlrelax.search import Problem, SearchConfig, check_result
from tlrelax.wfse import parse_rules

s = FIXTURES["relax20"]
ts = build_env(s.env, s.seed)
print("task:", s.formula)
print("rules:\n" + s.rules)

problem = Problem.build(ts, s.formula, parse_rules(s.rules))
base = problem.solve(SearchConfig(gamma=0))
print("uninformed: cost", base.cost_total, "motion", base.cost_motion, "penalty", base.cost_penalty,
      "nodes", base.metrics.nodes_explored)
for op in base.edit_ops:
    if op.weight:
        print("  edit", sorted(op.inp or ()), "->", sorted(op.out or ()), "penalty", op.weight)

# ## Same task with the automaton-distance heuristic
fast = problem.solve(SearchConfig(gamma=15))
print("gamma=15:   cost", fast.cost_total, "penalty", fast.cost_penalty, "nodes", fast.metrics.nodes_explored)
print("independent check passes:", check_result(problem.formula, problem.es, fast, ts))
