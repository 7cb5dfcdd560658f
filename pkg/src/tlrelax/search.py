"""A* over the implicit product of a transition system and a relaxed automaton.

Search nodes are pairs ``(x, q)``.  Before the robot is placed, ``x`` is
:data:`UNPLACED`; the first environment move reads the label of the initial
state, so the observed word is ``l(x0) l(x1) ...`` for the trajectory
``x0 x1 ...``.  Moving along a TS edge ``x -> x'`` pairs with an automaton
transition whose output matches ``l(x')``; epsilon (deletion) transitions
leave the robot where it is.

The expanded-set semantics follow the classic closed-list A*: a node is
expanded at most once, so with an inadmissible heuristic (large ``gamma``)
the returned plan may be suboptimal.  Ties on ``f`` go to the lower ``h``,
then to the earlier push.
"""
from __future__ import annotations

import heapq
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .errors import Infeasible, InvalidEditRun, InvalidTrajectory, NodeCapExceeded
from .formula import Formula, compile_formula, evaluate, parse
from .product import HeuristicTable, RelaxedAutomaton, build_product, heuristic_table
from .ts import TransitionSystem, multi_source_distance, output_word, trajectory_weight
from .wfse import EditOp, EditSystem, PreferenceRule, apply_edits, build_edit_system

Symbol = FrozenSet[str]
INF = math.inf
UNPLACED = -1
HEURISTICS = ("proposed", "zero", "info_on_demand", "info_precomputed")


@dataclass
class SearchConfig:
    gamma: float = 0.0
    lam: float = 1.0
    heuristic: str = "proposed"
    node_cap: int = 50_000_000
    trace: bool = False

    def __post_init__(self):
        if self.heuristic == "info":
            self.heuristic = "info_on_demand"
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.gamma < 0 or self.lam < 0:
            raise ValueError("gamma and lambda must be non-negative")
        if self.node_cap <= 0:
            raise ValueError("node_cap must be positive")


@dataclass
class SearchMetrics:
    nodes_explored: int = 0
    nodes_pushed: int = 0
    runtime: float = 0.0
    precompute_time: float = 0.0


@dataclass
class PlanResult:
    trajectory: List[int]
    env_word: List[Symbol]
    spec_word: List[Symbol]
    edit_ops: List[EditOp]
    cost_total: float
    cost_motion: float
    cost_penalty: float
    lam: float = 1.0
    metrics: SearchMetrics = field(default_factory=SearchMetrics)
    trace: Optional[List[Tuple]] = None

    def to_json(self, ts: Optional[TransitionSystem] = None) -> dict:
        names = ts.names if ts is not None else None
        return {
            "trajectory": [names[x] if names else x for x in self.trajectory],
            "env_word": [sorted(s) for s in self.env_word],
            "spec_word": [sorted(s) for s in self.spec_word],
            "edits": [op.to_json() for op in self.edit_ops],
            "costs": {
                "total": self.cost_total,
                "motion": self.cost_motion,
                "penalty": self.cost_penalty,
                "lambda": self.lam,
            },
            "metrics": asdict(self.metrics),
        }

    @classmethod
    def from_json(cls, doc: dict, ts: Optional[TransitionSystem] = None) -> "PlanResult":
        traj = [ts.index(n) if ts is not None else n for n in doc["trajectory"]]
        costs = doc["costs"]
        return cls(
            trajectory=traj,
            env_word=[frozenset(s) for s in doc["env_word"]],
            spec_word=[frozenset(s) for s in doc["spec_word"]],
            edit_ops=[EditOp.from_json(e) for e in doc["edits"]],
            cost_total=float(costs["total"]),
            cost_motion=float(costs["motion"]),
            cost_penalty=float(costs["penalty"]),
            lam=float(costs.get("lambda", 1.0)),
            metrics=SearchMetrics(**doc.get("metrics", {})),
        )


class InfoHeuristic:
    """Distance in the environment to the nearest state carrying a label that
    moves the automaton closer to acceptance.

    With ``precomputed=False`` each query runs a shortest-path search from
    ``x`` that stops at the first state carrying a progress label; answers are
    memoized per ``(x, label set)`` and target sets per label.  With
    ``precomputed=True`` :meth:`precompute` builds a distance table per label
    up front and queries become lookups.  Both modes return the same values.
    """

    def __init__(self, ts: TransitionSystem, a: RelaxedAutomaton, htable: HeuristicTable,
                 precomputed: bool = False):
        self.ts = ts
        self.a = a
        self.dmin = htable.dmin
        self.labels = ts.label_set()
        self.precomputed = precomputed
        self.tables: Dict[Symbol, np.ndarray] = {}
        self.progress: Dict[int, Optional[Tuple[Symbol, ...]]] = {}
        self.memo: Dict[Tuple[int, Tuple[Symbol, ...]], float] = {}

    def precompute(self) -> None:
        for lab in self.labels:
            self.table(lab)

    def table(self, lab: Symbol) -> np.ndarray:
        t = self.tables.get(lab)
        if t is None:
            t = multi_source_distance(self.ts, self.ts.states_with(lab))
            self.tables[lab] = t
        return t

    def progress_labels(self, q: int) -> Optional[Tuple[Symbol, ...]]:
        """Labels that make progress from ``q``; ``None`` if no move is needed."""
        if q in self.progress:
            return self.progress[q]
        d = self.dmin[q]
        if q in self.a.accepting or any(self.dmin[q2] < d for q2, _, _ in self.a.eps[q]):
            out = None
        else:
            out = tuple(lab for lab in self.labels
                        if any(self.dmin[q2] < d for q2, _, _ in self.a.successors(q, lab)))
        self.progress[q] = out
        return out

    def nearest(self, x: int, labs: Tuple[Symbol, ...]) -> float:
        """Shortest-path distance from ``x`` to any state labeled with one of ``labs``."""
        key = (x, labs)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        wanted = set(labs)
        labels, succ = self.ts.labels, self.ts.succ
        dist = {x: 0.0}
        heap = [(0.0, x)]
        best = INF
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            if labels[u] in wanted:
                best = d
                break
            for v, w in succ[u]:
                nd = d + w
                if nd < dist.get(v, INF):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        self.memo[key] = best
        return best

    def __call__(self, x: int, q: int) -> float:
        labs = self.progress_labels(q)
        if labs is None:
            return 0.0
        if x == UNPLACED:
            x = self.ts.initial
        if not labs:
            return INF
        if not self.precomputed:
            return self.nearest(x, labs)
        best = INF
        for lab in labs:
            v = self.table(lab)[x]
            if v < best:
                best = v
        return float(best)


def h_info(ts: TransitionSystem, a: RelaxedAutomaton, node: Tuple[int, int],
           caches: InfoHeuristic) -> float:
    """Functional form of :class:`InfoHeuristic` for a single node."""
    return caches(*node)


def plan(ts: TransitionSystem, a: RelaxedAutomaton, htable: HeuristicTable,
         cfg: Optional[SearchConfig] = None) -> PlanResult:
    """Best-first search from ``(x0, q0)``; raises :class:`Infeasible` if none exists."""
    cfg = cfg or SearchConfig()
    metrics = SearchMetrics()
    dmin = htable.dmin
    gamma, lam = cfg.gamma, cfg.lam
    info = None
    if cfg.heuristic.startswith("info"):
        t0 = time.perf_counter()
        info = InfoHeuristic(ts, a, htable, precomputed=cfg.heuristic == "info_precomputed")
        if info.precomputed:
            info.precompute()
        metrics.precompute_time = time.perf_counter() - t0
    use_dmin = cfg.heuristic != "zero" and gamma > 0

    def heur(x, q):
        h = gamma * dmin[q] if use_dmin else 0.0
        if info is not None:
            h += info(x, q)
        return h

    t_start = time.perf_counter()
    nq = a.n_states
    succ, labels = ts.succ, ts.labels
    accepting = a.accepting
    x0 = ts.initial
    start = a.initial  # key for (UNPLACED, q0) is (x + 1) * nq + q
    g_scores = {start: 0.0}
    explored = set()
    parent: Dict[int, Tuple[int, tuple]] = {}
    trace = [] if cfg.trace else None
    if dmin[a.initial] == INF:
        metrics.runtime = time.perf_counter() - t_start
        raise Infeasible("the relaxed automaton cannot reach acceptance", metrics)
    h0 = heur(UNPLACED, a.initial)
    heap = [(h0, h0, 0, 0.0, start, -1, None)]
    tick = 1
    metrics.nodes_pushed = 1

    while heap:
        f, h, _, g, key, pkey, edge = heapq.heappop(heap)
        xi, q = divmod(key, nq)
        x = xi - 1
        if trace is not None:
            trace.append((x, q, g, h, f))
        if q in accepting and x != UNPLACED:
            parent[key] = (pkey, edge)
            metrics.nodes_explored = len(explored)
            metrics.runtime = time.perf_counter() - t_start
            return _reconstruct(key, parent, start, g, lam, metrics, trace)
        if key in explored:
            continue
        explored.add(key)
        parent[key] = (pkey, edge)
        if len(explored) > cfg.node_cap:
            metrics.nodes_explored = len(explored)
            metrics.runtime = time.perf_counter() - t_start
            raise NodeCapExceeded(f"explored more than {cfg.node_cap} nodes")

        moves = []
        if x == UNPLACED:
            for q2, w, op in a.successors(q, labels[x0]):
                moves.append((x0, q2, lam * w, 0.0, op))
        else:
            for x2, wt in succ[x]:
                for q2, w, op in a.successors(q, labels[x2]):
                    if x2 == x and q2 == q:
                        continue
                    moves.append((x2, q2, wt + lam * w, wt, op))
        for q2, w, op in a.eps[q]:
            moves.append((x, q2, lam * w, 0.0, op))

        for x2, q2, cost, wt, op in moves:
            if dmin[q2] == INF:
                continue
            key2 = (x2 + 1) * nq + q2
            if key2 in explored:
                continue
            g2 = g + cost
            old = g_scores.get(key2)
            if old is not None and old <= g2:
                continue
            g_scores[key2] = g2
            h2 = heur(x2, q2)
            heapq.heappush(heap, (g2 + h2, h2, tick, g2, key2, key, (x2, wt, op)))
            tick += 1
            metrics.nodes_pushed += 1

    metrics.nodes_explored = len(explored)
    metrics.runtime = time.perf_counter() - t_start
    raise Infeasible("search space exhausted without reaching acceptance", metrics)


def _reconstruct(key, parent, start, g, lam, metrics, trace) -> PlanResult:
    edges = []
    while key != start:
        pkey, edge = parent[key]
        edges.append(edge)
        key = pkey
    edges.reverse()
    traj, env, spec, ops = [], [], [], []
    motion = 0.0
    penalty = 0.0
    for x2, wt, op in edges:
        if op.out is not None:
            traj.append(x2)
            env.append(op.out)
            motion += wt
        if op.inp is not None:
            spec.append(op.inp)
        ops.append(op)
        penalty += op.weight
    penalty *= lam
    return PlanResult(traj, env, spec, ops, motion + penalty, motion, penalty, lam, metrics, trace)


# ---------------------------------------------------------------------------
# Result checking
# ---------------------------------------------------------------------------

def _close(a, b):
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)


def validate_result(phi: Formula, es: EditSystem, r: PlanResult,
                    ts: Optional[TransitionSystem] = None) -> List[str]:
    """Independently re-check a plan; returns the violated invariants (empty if sound)."""
    problems = []
    if not evaluate(phi, r.spec_word):
        problems.append("spec word does not satisfy the formula")
    try:
        env, total = apply_edits(es, r.spec_word, r.edit_ops)
        if env != list(r.env_word):
            problems.append("edits do not map the spec word onto the environment word")
        if not _close(r.lam * total, r.cost_penalty):
            problems.append(f"penalty {r.cost_penalty} != lambda * edit weight {r.lam * total}")
    except InvalidEditRun as exc:
        problems.append(f"invalid edit run: {exc}")
    if ts is not None:
        try:
            if output_word(ts, r.trajectory) != list(r.env_word):
                problems.append("environment word differs from the trajectory's labels")
            motion = trajectory_weight(ts, r.trajectory)
            if not _close(motion, r.cost_motion):
                problems.append(f"motion cost {r.cost_motion} != trajectory weight {motion}")
        except InvalidTrajectory as exc:
            problems.append(f"invalid trajectory: {exc}")
    if not _close(r.cost_motion + r.cost_penalty, r.cost_total):
        problems.append("total cost is not motion + penalty")
    return problems


def check_result(phi: Formula, es: EditSystem, r: PlanResult,
                 ts: Optional[TransitionSystem] = None) -> bool:
    return not validate_result(phi, es, r, ts)


# ---------------------------------------------------------------------------
# End-to-end helpers
# ---------------------------------------------------------------------------

@dataclass
class Problem:
    """Compiled planning problem: everything :func:`plan` needs, built once."""

    ts: TransitionSystem
    formula: Formula
    es: EditSystem
    automaton: RelaxedAutomaton
    htable: HeuristicTable
    precompute_time: float

    @classmethod
    def build(cls, ts: TransitionSystem, formula, rules=(), es: Optional[EditSystem] = None,
              mode: str = "hops", lam: float = 1.0) -> "Problem":
        phi = parse(formula) if isinstance(formula, str) else formula
        if es is None:
            es = build_edit_system(list(rules))
        a = build_product(es, compile_formula(phi))
        t0 = time.perf_counter()
        htable = heuristic_table(a, mode=mode, lam=lam, labels=ts.label_set())
        return cls(ts, phi, es, a, htable, time.perf_counter() - t0)

    def solve(self, cfg: Optional[SearchConfig] = None) -> PlanResult:
        r = plan(self.ts, self.automaton, self.htable, cfg)
        r.metrics.precompute_time += self.precompute_time
        return r


def plan_task(ts: TransitionSystem, formula, rules: Sequence[PreferenceRule] = (),
              cfg: Optional[SearchConfig] = None, es: Optional[EditSystem] = None) -> PlanResult:
    """Compile, build the relaxed automaton and plan in one call."""
    cfg = cfg or SearchConfig()
    return Problem.build(ts, formula, rules, es, lam=cfg.lam).solve(cfg)


def write_trace(trace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,q,g,h,f\n")
        for x, q, g, h, f in trace:
            fh.write(f"{x},{q},{g!r},{h!r},{f!r}\n")


def dumps_result(r: PlanResult, ts: Optional[TransitionSystem] = None) -> str:
    return json.dumps(r.to_json(ts), indent=1) + "\n"
