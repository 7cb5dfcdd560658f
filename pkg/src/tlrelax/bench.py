"""Seeded benchmark scenarios, gamma sweeps and scaling runs.

A scenario fully determines a run: environment, formula, preference rules,
seed, gamma grid, lambda and the heuristics to compare.  Scenario files are
JSON objects with these keys::

    {"id": "gamma50",
     "env": {"grid": [50, 50], "random_aps": {"a": 1, "b": 1}},
     "formula": "F a && F b",
     "rules": "sub b -> k penalty 3",
     "seed": 3,
     "gamma_grid": [0, 1, 2, 4],
     "lambda": 1.0,
     "heuristics": ["proposed"]}

``env`` is either ``{"grid": [rows, cols], "labels": {"r,c": [aps]}}``,
``{"grid": [rows, cols], "random_aps": {ap: count}}`` or
``{"file": "path/to/graph.csv"}``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from .errors import Infeasible, NodeCapExceeded, PlacementError
from .formula import atoms, parse
from .search import Problem, SearchConfig, check_result
from .ts import TransitionSystem, load_graph, make_grid
from .wfse import parse_rules

PHI_FIVE = "F a && F b && F c && F d && F e"
PHI_CASE = "F a && F (b && F c) && F (d && F e) && F h && (!i U h)"
RULES_CASE = "sub b -> k penalty 3\nsub b -> j penalty 5\ndel e penalty 2\n"

# fields that must reproduce bit-for-bit between executions
DETERMINISTIC = ("scenario", "heuristic", "gamma", "feasible", "cost_total", "cost_motion",
                 "cost_penalty", "nodes_explored", "nodes_pushed", "delta", "check_ok")


@dataclass
class Scenario:
    id: str
    env: dict
    formula: str
    rules: str = ""
    seed: int = 0
    gamma_grid: List[float] = field(default_factory=lambda: [0.0])
    lam: float = 1.0
    heuristics: List[str] = field(default_factory=lambda: ["proposed"])
    node_cap: int = 50_000_000

    def to_json(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_json(cls, doc: Mapping) -> "Scenario":
        doc = dict(doc)
        if "lambda" in doc:
            doc["lam"] = doc.pop("lambda")
        return cls(**doc)


@dataclass
class RunRecord:
    scenario: str
    heuristic: str
    gamma: float
    feasible: bool
    cost_total: float = math.nan
    cost_motion: float = math.nan
    cost_penalty: float = math.nan
    nodes_explored: int = 0
    nodes_pushed: int = 0
    runtime: float = 0.0
    precompute_time: float = 0.0
    delta: float = math.nan
    check_ok: bool = False

    def key(self) -> tuple:
        return tuple(getattr(self, k) for k in DETERMINISTIC)


def random_ap_assignment(ts: TransitionSystem, ap_counts: Mapping[str, int], seed: int,
                         exclude_initial: bool = True) -> TransitionSystem:
    """Place ``ap_counts[p]`` copies of each proposition on distinct unlabeled states."""
    free = [x for x, lab in enumerate(ts.labels)
            if not lab and not (exclude_initial and x == ts.initial)]
    total = sum(int(c) for c in ap_counts.values())
    if any(int(c) < 0 for c in ap_counts.values()):
        raise PlacementError("negative proposition count")
    if total > len(free):
        raise PlacementError(f"{total} labels requested but only {len(free)} free states")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(free), size=total, replace=False)
    placed: Dict[int, List[str]] = {}
    k = 0
    for p in sorted(ap_counts):
        for _ in range(int(ap_counts[p])):
            placed[free[int(picks[k])]] = [p]
            k += 1
    return ts.with_labels(placed)


def random_ap_counts(aps: Iterable[str], seed: int, low: int = 1, high: int = 4) -> Dict[str, int]:
    rng = np.random.default_rng(seed)
    return {p: int(rng.integers(low, high + 1)) for p in sorted(aps)}


def build_env(env: Mapping, seed: int = 0) -> TransitionSystem:
    if "file" in env:
        return load_graph(env["file"], env.get("format"))
    rows, cols = env["grid"]
    labels = {}
    for cell, props in env.get("labels", {}).items():
        r, c = (int(v) for v in cell.split(","))
        labels[(r, c)] = props
    ts = make_grid(rows, cols, env.get("edge_weight", 1.0), labels, tuple(env.get("initial", (0, 0))))
    if "random_aps" in env:
        ts = random_ap_assignment(ts, env["random_aps"], seed)
    return ts


def _delta(cost, base):
    if base == 0:
        return 0.0 if cost == 0 else math.inf
    return (cost - base) / base


def run_scenario(s: Scenario, ts: Optional[TransitionSystem] = None) -> List[RunRecord]:
    """Baseline (h = 0) first, then one record per (heuristic, gamma)."""
    ts = ts if ts is not None else build_env(s.env, s.seed)
    rules = parse_rules(s.rules)
    problem = Problem.build(ts, s.formula, rules, lam=s.lam)
    runs = [("zero", 0.0)]
    for h in s.heuristics:
        for g in (s.gamma_grid if h != "zero" else [0.0]):
            if (h, float(g)) not in runs:
                runs.append((h, float(g)))
    records = []
    base = None
    for h, g in runs:
        cfg = SearchConfig(gamma=g, lam=s.lam, heuristic=h, node_cap=s.node_cap)
        try:
            r = problem.solve(cfg)
        except (Infeasible, NodeCapExceeded) as exc:
            m = getattr(exc, "metrics", None)
            records.append(RunRecord(s.id, h, g, False,
                                     nodes_explored=m.nodes_explored if m else 0,
                                     nodes_pushed=m.nodes_pushed if m else 0,
                                     runtime=m.runtime if m else 0.0))
            continue
        if base is None:
            base = r.cost_total
        records.append(RunRecord(
            s.id, h, g, True, r.cost_total, r.cost_motion, r.cost_penalty,
            r.metrics.nodes_explored, r.metrics.nodes_pushed, r.metrics.runtime,
            r.metrics.precompute_time, _delta(r.cost_total, base),
            check_result(problem.formula, problem.es, r, ts)))
    return records


def run_many(scenarios: Sequence[Scenario], jobs: int = 1) -> List[RunRecord]:
    if jobs <= 1:
        out = []
        for s in scenarios:
            out.extend(run_scenario(s))
        return out
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        chunks = list(pool.map(run_scenario, scenarios))
    return [r for chunk in chunks for r in chunk]


def scaling_sweep(sizes: Sequence[int], formula: str = PHI_FIVE, gamma: float = 10.0,
                  seed: int = 0, rules: str = "", ap_counts: Optional[Mapping[str, int]] = None,
                  jobs: int = 1) -> List[RunRecord]:
    """Baseline vs. proposed heuristic on near-square grids of growing size."""
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    counts = dict(ap_counts) if ap_counts else {p: 1 for p in sorted(atoms(parse(formula)))}
    scenarios = []
    for n in sizes:
        rows = max(1, math.isqrt(n))
        cols = max(1, n // rows)
        scenarios.append(Scenario(f"size{rows * cols}", {"grid": [rows, cols], "random_aps": counts},
                                  formula, rules, seed, [gamma]))
    return run_many(scenarios, jobs)


def nodes_ratio(records: Sequence[RunRecord]) -> Dict[str, float]:
    """Informed / baseline explored-node ratio per scenario."""
    out = {}
    by = {}
    for r in records:
        by.setdefault(r.scenario, []).append(r)
    for sid, rs in by.items():
        base = next(r for r in rs if r.heuristic == "zero")
        inf = [r for r in rs if r.heuristic != "zero"]
        if inf and base.nodes_explored:
            out[sid] = inf[-1].nodes_explored / base.nodes_explored
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def records_csv(records: Sequence[RunRecord], deterministic_only: bool = False) -> str:
    buf = io.StringIO()
    names = list(DETERMINISTIC) if deterministic_only else [f.name for f in fields(RunRecord)]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in records:
        w.writerow([getattr(r, n) for n in names])
    return buf.getvalue()


def records_json(records: Sequence[RunRecord], deterministic_only: bool = False) -> str:
    if deterministic_only:
        rows = [dict(zip(DETERMINISTIC, r.key())) for r in records]
    else:
        rows = [asdict(r) for r in records]
    return json.dumps(rows, indent=1) + "\n"


def load_scenarios(path) -> List[Scenario]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(doc, dict) and "scenarios" in doc:
        doc = doc["scenarios"]
    if isinstance(doc, dict):
        doc = [doc]
    return [Scenario.from_json(d) for d in doc]


def save_scenarios(scenarios: Sequence[Scenario], path) -> None:
    Path(path).write_text(json.dumps({"scenarios": [s.to_json() for s in scenarios]}, indent=1) + "\n",
                          encoding="utf-8")


# ---------------------------------------------------------------------------
# Built-in fixtures (seeds frozen; see tests/golden)
# ---------------------------------------------------------------------------

def _one_each(aps):
    return {p: 1 for p in aps}


FIXTURES: Dict[str, Scenario] = {
    "tl20": Scenario("tl20", {"grid": [20, 20], "random_aps": _one_each("abcdehi")},
                     PHI_CASE, "", seed=11, gamma_grid=[0, 15]),
    "relax20": Scenario("relax20", {"grid": [20, 20], "random_aps": _one_each("acdhijk")},
                        PHI_CASE, RULES_CASE, seed=1, gamma_grid=[0, 15]),
    "gamma50": Scenario("gamma50", {"grid": [50, 50], "random_aps": _one_each("abcde")},
                        PHI_FIVE, "", seed=1, gamma_grid=[0, 1, 2, 4, 8, 16]),
    "delta100": Scenario("delta100", {"grid": [100, 100], "random_aps": _one_each("abcdehi")},
                         PHI_CASE, "", seed=5,
                         gamma_grid=[0, 1, 2, 4, 8, 15, 50, 100, 500, 1000, 5000, 30000]),
    "heur30": Scenario("heur30", {"grid": [30, 30], "random_aps": _one_each("abcdehi")},
                       PHI_CASE, "", seed=7, gamma_grid=[4],
                       heuristics=["proposed", "info_on_demand", "info_precomputed"]),
}
