import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tlrelax.bench import FIXTURES, build_env
from tlrelax.errors import Infeasible, NodeCapExceeded
from tlrelax.formula import compile_formula, parse, symbol
from tlrelax.oracle import explicit_optimum
from tlrelax.search import (InfoHeuristic, PlanResult, Problem, SearchConfig, UNPLACED,
                            check_result, dumps_result, h_info, plan_task, validate_result)
from tlrelax.ts import make_grid
from tlrelax.wfse import build_edit_system, parse_rules

from _instances import random_instance


def without_runtime(r: PlanResult) -> dict:
    doc = r.to_json()
    doc["metrics"].pop("runtime")
    doc["metrics"].pop("precompute_time")
    return doc


def chain():
    return make_grid(1, 3, 1.0, {(0, 2): ["a"]})


def test_chain_plan():
    r = plan_task(chain(), "F a")
    assert r.trajectory == [0, 1, 2]
    assert r.cost_total == 2 and r.cost_penalty == 0
    assert r.env_word == [symbol(), symbol(), symbol("a")]
    assert check_result(parse("F a"), build_edit_system([]), r, chain())


def test_initial_label_counts():
    ts = make_grid(1, 3, 1.0, {(0, 0): ["a"]})
    r = plan_task(ts, "F a")
    assert r.trajectory == [0] and r.cost_total == 0


def test_relaxation_fixture():
    s = FIXTURES["relax20"]
    ts = build_env(s.env, s.seed)
    problem = Problem.build(ts, s.formula, parse_rules(s.rules))
    base = problem.solve(SearchConfig(gamma=0))
    assert base.cost_penalty == 5
    used = sorted((tuple(sorted(op.inp or ())), tuple(sorted(op.out or ()))) for op in base.edit_ops
                  if op.weight > 0)
    assert used == [(("b",), ("k",)), (("e",), ())]
    fast = problem.solve(SearchConfig(gamma=15))
    assert check_result(problem.formula, problem.es, fast, ts)
    assert fast.cost_total >= base.cost_total
    assert fast.metrics.nodes_explored < base.metrics.nodes_explored


def test_infeasible_without_rules():
    ts = make_grid(3, 3, 1.0, {(1, 1): ["a"]})
    with pytest.raises(Infeasible) as info:
        plan_task(ts, "F a && F z")
    assert info.value.metrics is not None


def test_node_cap():
    ts = make_grid(10, 10, 1.0, {(9, 9): ["a"]})
    with pytest.raises(NodeCapExceeded):
        plan_task(ts, "F a", cfg=SearchConfig(node_cap=5))


def test_config_validation():
    assert SearchConfig(heuristic="info").heuristic == "info_on_demand"
    for bad in (dict(gamma=-1), dict(lam=-0.5), dict(heuristic="greedy"), dict(node_cap=0)):
        with pytest.raises(ValueError):
            SearchConfig(**bad)


def test_tampered_result_fails_check():
    s = FIXTURES["relax20"]
    ts = build_env(s.env, s.seed)
    problem = Problem.build(ts, s.formula, parse_rules(s.rules))
    r = problem.solve(SearchConfig(gamma=0))
    dropped = replace(r, edit_ops=[op for op in r.edit_ops if op.weight == 0])
    assert not check_result(problem.formula, problem.es, dropped, ts)
    wrong_cost = replace(r, cost_total=r.cost_total + 1)
    assert validate_result(problem.formula, problem.es, wrong_cost, ts) == \
        ["total cost is not motion + penalty"]
    bad_path = replace(r, trajectory=r.trajectory[:1] + r.trajectory[2:])
    assert not check_result(problem.formula, problem.es, bad_path, ts)


def test_json_round_trip():
    ts = chain()
    r = plan_task(ts, "F a")
    back = PlanResult.from_json(r.to_json(ts), ts)
    assert back.trajectory == r.trajectory and back.edit_ops == r.edit_ops
    assert dumps_result(back, ts) == dumps_result(r, ts)


def test_determinism():
    s = FIXTURES["tl20"]
    ts = build_env(s.env, s.seed)
    runs = [plan_task(ts, s.formula, cfg=SearchConfig(gamma=15)) for _ in range(2)]
    assert without_runtime(runs[0]) == without_runtime(runs[1])


def test_trace_stops_at_first_accepting_pop():
    s = FIXTURES["tl20"]
    ts = build_env(s.env, s.seed)
    problem = Problem.build(ts, s.formula)
    r = problem.solve(SearchConfig(gamma=15, trace=True))
    assert r.metrics.nodes_explored <= r.metrics.nodes_pushed
    x, q, g, h, f = r.trace[-1]
    assert q in problem.automaton.accepting and x == r.trajectory[-1] and g == r.cost_total
    assert all(not math.isinf(row[3]) for row in r.trace)
    assert sum(1 for row in r.trace if row[1] in problem.automaton.accepting and row[0] != UNPLACED) == 1


def test_info_heuristic_values():
    ts = make_grid(1, 6, 1.0, {(0, 5): ["a"]})
    problem = Problem.build(ts, "F a")
    a = problem.automaton
    info = InfoHeuristic(ts, a, problem.htable)
    assert info(0, a.initial) == 5
    assert h_info(ts, a, (2, a.initial), info) == 3
    for q in a.accepting:
        assert info(0, q) == 0


@pytest.mark.parametrize("seed", range(5))
def test_info_modes_agree(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, max_side=6, min_side=3)
    problem = Problem.build(inst.ts, inst.formula, inst.rules)
    lazy = InfoHeuristic(inst.ts, problem.automaton, problem.htable)
    eager = InfoHeuristic(inst.ts, problem.automaton, problem.htable, precomputed=True)
    eager.precompute()
    for x in range(inst.ts.n_states):
        for q in range(problem.automaton.n_states):
            assert lazy(x, q) == eager(x, q)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_baseline_matches_explicit_oracle(seed):
    inst = random_instance(np.random.default_rng(seed))
    es = build_edit_system(inst.rules)
    try:
        want, _ = explicit_optimum(inst.ts, es, compile_formula(inst.formula))
    except Infeasible:
        want = None
    try:
        got = plan_task(inst.ts, inst.formula, inst.rules, SearchConfig(gamma=0, heuristic="zero"))
        assert check_result(inst.formula, es, got, inst.ts)
        got = got.cost_total
    except Infeasible:
        got = None
    assert got == want


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 50), st.sampled_from(
    ["proposed", "zero", "info_on_demand", "info_precomputed"]), st.sampled_from([0.5, 1.0, 2.0]))
def test_every_plan_is_sound(seed, gamma, heuristic, lam):
    inst = random_instance(np.random.default_rng(seed))
    es = build_edit_system(inst.rules)
    cfg = SearchConfig(gamma=gamma, lam=lam, heuristic=heuristic)
    try:
        r = plan_task(inst.ts, inst.formula, inst.rules, cfg)
    except Infeasible:
        return
    assert validate_result(inst.formula, es, r, inst.ts) == []
