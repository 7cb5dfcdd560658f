"""Ground-truth engines for small instances (tests and acceptance runs only).

Neither engine goes through :mod:`tlrelax.product`: the explicit optimum
materializes ``T x E x A_phi`` directly from the edit families' forward
semantics, and :func:`enumerate_relaxations` works from the preference rules
and the reference evaluator alone.
"""
from __future__ import annotations

import heapq
import itertools
import math
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .errors import CapacityError, Infeasible
from .formula import Formula, SpecDfa, atoms, evaluate, subsets
from .ts import TransitionSystem
from .wfse import EditSystem, PreferenceRule

Symbol = FrozenSet[str]
UNPLACED = -1


def _env_moves(es: EditSystem, dfa: SpecDfa, z: int, s: int, label: Symbol, extra: FrozenSet[str]):
    """(z', s', weight) for every edit from z whose output is ``label``."""
    out = []
    for e in es.edits[z]:
        if e.apply(None) == label:
            out.append((e.dst, s, e.weight))
        for cand in subsets(label | extra):
            res = e.apply(cand)
            if res is not False and res == label:
                out.append((e.dst, dfa.step(s, cand), e.weight))
    return out


def _eps_moves(es: EditSystem, dfa: SpecDfa, z: int, s: int, extra: FrozenSet[str]):
    out = []
    for e in es.edits[z]:
        for cand in subsets(extra):
            if e.apply(cand) is None:
                out.append((e.dst, dfa.step(s, cand), e.weight))
    return out


def explicit_optimum(ts: TransitionSystem, es: EditSystem, dfa: SpecDfa, lam: float = 1.0,
                     cap: int = 2 * 10**6) -> Tuple[float, List[int]]:
    """Exact minimum of motion cost + ``lam`` x penalty by Dijkstra on the full product."""
    if ts.n_states * es.n_states * dfa.n_states > cap:
        raise CapacityError(
            f"explicit product bound {ts.n_states}x{es.n_states}x{dfa.n_states} exceeds {cap}")
    extra = frozenset(es.aps()) | frozenset(dfa.aps)
    env_cache: Dict[tuple, list] = {}
    eps_cache: Dict[tuple, list] = {}

    def env(z, s, label):
        key = (z, s, label)
        if key not in env_cache:
            env_cache[key] = _env_moves(es, dfa, z, s, label, extra)
        return env_cache[key]

    def eps(z, s):
        key = (z, s)
        if key not in eps_cache:
            eps_cache[key] = _eps_moves(es, dfa, z, s, extra)
        return eps_cache[key]

    # materialize the reachable product graph
    start = (UNPLACED, es.initial, dfa.initial)
    ids = {start: 0}
    nodes = [start]
    edges: List[List[Tuple[int, float, bool]]] = []
    i = 0
    while i < len(nodes):
        x, z, s = nodes[i]
        out = []
        if x == UNPLACED:
            steps = [(ts.initial, 0.0)]
        else:
            steps = ts.succ[x]
        for x2, wt in steps:
            for z2, s2, w in env(z, s, ts.labels[x2]):
                out.append(((x2, z2, s2), wt + lam * w, True))
        for z2, s2, w in eps(z, s):
            out.append(((x, z2, s2), lam * w, False))
        resolved = []
        for node, cost, moved in out:
            if node not in ids:
                if len(nodes) >= cap:
                    raise CapacityError(f"explicit product exceeds {cap} states")
                ids[node] = len(nodes)
                nodes.append(node)
            resolved.append((ids[node], cost, moved))
        edges.append(resolved)
        i += 1

    dist = [math.inf] * len(nodes)
    pred: List[Optional[Tuple[int, bool]]] = [None] * len(nodes)
    dist[0] = 0.0
    heap = [(0.0, 0)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        x, z, s = nodes[u]
        if x != UNPLACED and z in es.accepting and s in dfa.accepting:
            traj = []
            while u != 0:
                p, moved = pred[u]
                if moved:
                    traj.append(nodes[u][0])
                u = p
            return d, traj[::-1]
        for v, cost, moved in edges[u]:
            nd = d + cost
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = (u, moved)
                heapq.heappush(heap, (nd, v))
    raise Infeasible("no accepting state in the explicit product")


def _rule_options(sym: Symbol, rules: Sequence[PreferenceRule], delete_membership: bool):
    yield sym, 0.0
    for r in rules:
        if r.kind == "sub" and r.frm in sym:
            yield (sym - {r.frm}) | {r.to}, float(r.penalty)
        elif r.kind == "del":
            hit = r.frm in sym if delete_membership else sym == frozenset([r.frm])
            if hit:
                yield None, float(r.penalty)


def enumerate_relaxations(f: Formula, rules: Sequence[PreferenceRule], max_len: int,
                          alphabet: Optional[Sequence[Symbol]] = None,
                          max_spec_len: Optional[int] = None,
                          delete_membership: bool = False) -> Dict[Tuple[Symbol, ...], float]:
    """Minimal penalty of every environment word reachable from a model of ``f``.

    Spec words (length <= ``max_spec_len``, default ``max_len``) and edit
    runs are both enumerated exhaustively.
    """
    if max_len > 8:
        raise CapacityError("enumerate_relaxations is exhaustive; keep max_len <= 8")
    if max_spec_len is None:
        max_spec_len = max_len
    if alphabet is None:
        universe = set(atoms(f))
        for r in rules:
            universe |= {p for p in (r.frm, r.to) if p is not None}
        alphabet = subsets(sorted(universe))
    alphabet = [frozenset(s) for s in alphabet]
    allowed = set(alphabet)
    best: Dict[Tuple[Symbol, ...], float] = {}
    for n in range(max_spec_len + 1):
        for word in itertools.product(alphabet, repeat=n):
            if not evaluate(f, word):
                continue
            options = [list(_rule_options(sym, rules, delete_membership)) for sym in word]
            for run in itertools.product(*options):
                env = tuple(o for o, _ in run if o is not None)
                if len(env) > max_len or any(o not in allowed for o in env):
                    continue
                cost = sum(w for _, w in run)
                if cost < best.get(env, math.inf):
                    best[env] = cost
    return best
