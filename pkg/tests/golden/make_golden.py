"""Regenerate the golden fixtures.  Run only when a behavior change is intended:

    python3 tests/golden/make_golden.py
"""
from pathlib import Path

from tlrelax import bench
from tlrelax.search import Problem, SearchConfig, dumps_result
from tlrelax.ts import save_graph

HERE = Path(__file__).resolve().parent


def main():
    for name, s in bench.FIXTURES.items():
        records = bench.run_scenario(s)
        (HERE / f"{name}.records.json").write_text(bench.records_json(records, deterministic_only=True))
        print(name, len(records), "records")
    bench.save_scenarios(list(bench.FIXTURES.values()), HERE / "bench.json")

    s = bench.FIXTURES["tl20"]
    ts = bench.build_env(s.env, s.seed)
    save_graph(ts, HERE / "tl20.csv")
    problem = Problem.build(ts, s.formula)
    for gamma in (0, 15):
        r = problem.solve(SearchConfig(gamma=gamma))
        (HERE / f"tl20.plan.g{gamma}.json").write_text(dumps_result(r, ts))

    s = bench.FIXTURES["relax20"]
    ts = bench.build_env(s.env, s.seed)
    save_graph(ts, HERE / "relax20.csv")
    (HERE / "relax20.rules").write_text(s.rules)


if __name__ == "__main__":
    main()
