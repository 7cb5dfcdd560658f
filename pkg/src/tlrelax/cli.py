"""Command-line entry point: ``tlrelax {compile,plan,bench,sweep,validate}``.

Exit codes: 0 success, 1 infeasible task (or a failed validation), 2 usage
or parse error, 3 capacity error.  ``TLRELAX_NODE_CAP`` overrides the search
node cap for ``plan``, ``bench`` and ``sweep``.

``--formula`` and ``--rules`` accept either literal text or a path to a file
holding it.  Rule files use the preference DSL::

    sub b -> k penalty 3
    del e penalty 2
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from . import bench
from .errors import CapacityError, Infeasible, TLRelaxError
from .formula import compile_formula, parse
from .search import PlanResult, Problem, SearchConfig, validate_result, write_trace
from .ts import load_graph
from .wfse import build_edit_system, parse_rules

NODE_CAP_ENV = "TLRELAX_NODE_CAP"
EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3
TIMING = ("runtime", "precompute_time")


def _text(value: Optional[str]) -> str:
    if not value:
        return ""
    p = Path(value)
    if p.is_file():
        return p.read_text(encoding="utf-8")
    return value


def _node_cap(default: int = 50_000_000) -> int:
    raw = os.environ.get(NODE_CAP_ENV)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{NODE_CAP_ENV} must be an integer, got {raw!r}")


def cmd_compile(args) -> int:
    dfa = compile_formula(parse(_text(args.formula)))
    if args.out:
        Path(args.out).write_text(json.dumps(dfa.dump(), indent=1) + "\n", encoding="utf-8")
    print(f"states: {dfa.n_states}  transitions: {dfa.n_transitions}  accepting: {len(dfa.accepting)}")
    return EXIT_OK


def cmd_plan(args) -> int:
    ts = load_graph(args.env)
    cfg = SearchConfig(gamma=args.gamma, lam=args.lam, heuristic=args.heuristic,
                       node_cap=_node_cap(), trace=bool(args.trace))
    problem = Problem.build(ts, _text(args.formula), parse_rules(_text(args.rules)), lam=args.lam)
    r = problem.solve(cfg)
    if args.trace:
        write_trace(r.trace, args.trace)
    m = r.metrics
    summary = (f"cost total={r.cost_total:g} motion={r.cost_motion:g} penalty={r.cost_penalty:g}\n"
               f"nodes explored={m.nodes_explored} pushed={m.nodes_pushed} "
               f"runtime={m.runtime:.4f}s precompute={m.precompute_time:.4f}s\n")
    doc = r.to_json(ts)
    if args.deterministic:
        for k in TIMING:
            doc["metrics"].pop(k)
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        sys.stdout.write(summary)
    else:
        sys.stdout.write(text)
        sys.stderr.write(summary)
    return EXIT_OK


def cmd_validate(args) -> int:
    ts = load_graph(args.env)
    doc = json.loads(Path(args.result).read_text(encoding="utf-8"))
    r = PlanResult.from_json(doc, ts)
    phi = parse(_text(args.formula))
    es = build_edit_system(parse_rules(_text(args.rules)))
    problems = validate_result(phi, es, r, ts)
    if args.gamma is not None:
        # optional optimality cross-check against a fresh search
        ref = Problem.build(ts, phi, es=es, lam=r.lam).solve(
            SearchConfig(gamma=args.gamma, lam=r.lam, node_cap=_node_cap()))
        if abs(ref.cost_total - r.cost_total) > 1e-9:
            problems.append(f"cost mismatch: result {r.cost_total:g}, re-planned {ref.cost_total:g}")
    if problems:
        print(f"FAIL: {problems[0]}")
        return EXIT_INFEASIBLE
    print("PASS")
    return EXIT_OK


def _emit_records(records, args) -> None:
    det = args.deterministic
    if args.out_csv:
        Path(args.out_csv).write_text(bench.records_csv(records, det), encoding="utf-8")
    if args.out_json:
        Path(args.out_json).write_text(bench.records_json(records, det), encoding="utf-8")
    if not (args.out_csv or args.out_json):
        sys.stdout.write(bench.records_csv(records, det))


def cmd_bench(args) -> int:
    scenarios = []
    for path in args.scenarios:
        scenarios.extend(bench.load_scenarios(path))
    for name in args.fixture:
        if name not in bench.FIXTURES:
            raise ValueError(f"unknown fixture {name!r}; choose from {sorted(bench.FIXTURES)}")
        scenarios.append(bench.FIXTURES[name])
    if not scenarios:
        raise ValueError("give at least one scenario file or --fixture")
    cap = _node_cap(0)
    if cap:
        scenarios = [replace(s, node_cap=cap) for s in scenarios]
    _emit_records(bench.run_many(scenarios, args.jobs), args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    records = bench.scaling_sweep(args.sizes, _text(args.formula), args.gamma, args.seed,
                                  _text(args.rules), jobs=args.jobs)
    _emit_records(records, args)
    for sid, ratio in bench.nodes_ratio(records).items():
        sys.stderr.write(f"{sid}: informed/baseline nodes = {ratio:.3f}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tlrelax", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="translate a formula into a DFA")
    c.add_argument("--formula", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compile)

    pl = sub.add_parser("plan", help="plan a minimum-cost (relaxed) trajectory")
    pl.add_argument("--env", required=True, help="graph file (.csv or .json)")
    pl.add_argument("--formula", required=True)
    pl.add_argument("--rules", default="")
    pl.add_argument("--gamma", type=float, default=0.0)
    pl.add_argument("--lambda", dest="lam", type=float, default=1.0)
    pl.add_argument("--heuristic", default="proposed",
                    choices=["zero", "proposed", "info", "info_on_demand", "info_precomputed"])
    pl.add_argument("--trace", help="write the pop log (x,q,g,h,f) as CSV")
    pl.add_argument("--out", help="PlanResult JSON (stdout when omitted)")
    pl.add_argument("--deterministic", action="store_true",
                    help="omit wall-clock fields so identical runs give identical files")
    pl.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="run benchmark scenarios")
    b.add_argument("scenarios", nargs="*", help="bench.json scenario files")
    b.add_argument("--fixture", action="append", default=[], help="built-in scenario name")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out-csv")
    b.add_argument("--out-json")
    b.add_argument("--deterministic", action="store_true",
                   help="omit wall-clock fields so identical runs give identical files")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("sweep", help="environment-size scaling sweep")
    s.add_argument("--sizes", type=int, nargs="+", required=True)
    s.add_argument("--formula", default=bench.PHI_FIVE)
    s.add_argument("--rules", default="")
    s.add_argument("--gamma", type=float, default=10.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out-csv")
    s.add_argument("--out-json")
    s.add_argument("--deterministic", action="store_true",
                   help="omit wall-clock fields so identical runs give identical files")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="independently re-check a PlanResult")
    v.add_argument("--result", required=True)
    v.add_argument("--env", required=True)
    v.add_argument("--formula", required=True)
    v.add_argument("--rules", default="")
    v.add_argument("--gamma", type=float, help="also re-plan at this gamma and compare cost")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (TLRelaxError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
