"""Relaxed specification automaton: edit system x specification DFA.

A product state ``(z, s)`` pairs an edit-system state with a DFA state.  An
edit ``(in, out)`` advances the DFA on the *input* (specification) track and
is matched against the environment on the *output* track.  Edits whose
output is a symbol become environment transitions; deletions (output eps)
become epsilon transitions that the planner takes without moving the robot.

Environment transitions are not enumerated over ``2^AP``.  They are resolved
on demand by :meth:`RelaxedAutomaton.successors` for the concrete label the
robot observes, and cached per ``(state, label)``.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import CapacityError, EpsilonCycleError
from .formula import SpecDfa, subsets
from .wfse import EditOp, EditSystem

Symbol = FrozenSet[str]
INF = math.inf
Move = Tuple[int, float, EditOp]


@dataclass(eq=False)
class RelaxedAutomaton:
    es: EditSystem
    dfa: SpecDfa
    pairs: Tuple[Tuple[int, int], ...]
    index: Dict[Tuple[int, int], int]
    accepting: FrozenSet[int]
    eps: Tuple[Tuple[Move, ...], ...]
    env_edges: Tuple[Tuple[Tuple[int, float], ...], ...]
    initial: int = 0
    _cache: Dict[Tuple[int, Symbol], Tuple[Move, ...]] = field(default_factory=dict, repr=False)

    @property
    def n_states(self) -> int:
        """Materialized states, not counting the virtual final state."""
        return len(self.pairs)

    @property
    def final(self) -> int:
        """Index of the virtual final state."""
        return len(self.pairs)

    def is_accepting(self, q: int) -> bool:
        return q in self.accepting

    def transitions(self, q: int, label: Symbol) -> List[Move]:
        """Every environment transition from ``q`` whose output is ``label``."""
        z, s = self.pairs[q]
        out = []
        for e in self.es.edits[z]:
            if not e.emits:
                continue
            for inp in e.preimages(label):
                s2 = s if inp is None else self.dfa.step(s, inp)
                out.append((self.index[(e.dst, s2)], e.weight, EditOp(inp, label, e.weight)))
        return out

    def successors(self, q: int, label: Symbol) -> Tuple[Move, ...]:
        """Distinct ``(q', weight, edit)`` moves on ``label``; memoized."""
        key = (q, label)
        hit = self._cache.get(key)
        if hit is None:
            seen = set()
            moves = []
            for q2, w, op in self.transitions(q, label):
                if (q2, w) not in seen:
                    seen.add((q2, w))
                    moves.append((q2, w, op))
            hit = tuple(moves)
            self._cache[key] = hit
        return hit

    def dump(self) -> str:
        """Human-readable listing of states and transitions (for debugging)."""
        lines = [f"# relaxed automaton: {self.n_states} states + virtual final {self.final}"]
        for q, (z, s) in enumerate(self.pairs):
            flag = " accepting" if q in self.accepting else ""
            lines.append(f"state {q} = (z={self.es.state_names[z]}, s={s}){flag}")
            for q2, w in self.env_edges[q]:
                lines.append(f"  {q} -> {q2} [env, w={w}]")
            for q2, w, op in self.eps[q]:
                lines.append(f"  {q} -> {q2} [{op}]")
            if q in self.accepting:
                lines.append(f"  {q} -> {self.final} [virtual, w=0]")
        return "\n".join(lines) + "\n"


def build_product(es: EditSystem, dfa: SpecDfa, state_cap: int = 10**6) -> RelaxedAutomaton:
    """Materialize the states of ``es x dfa`` reachable from ``(z0, s0)``."""
    start = (es.initial, dfa.initial)
    index = {start: 0}
    pairs = [start]
    eps_all: List[Tuple[Move, ...]] = []
    env_all: List[Tuple[Tuple[int, float], ...]] = []

    def intern(pair):
        if pair not in index:
            if len(pairs) >= state_cap:
                raise CapacityError(f"relaxed automaton exceeds {state_cap} states")
            index[pair] = len(pairs)
            pairs.append(pair)
        return index[pair]

    i = 0
    while i < len(pairs):
        z, s = pairs[i]
        props = dfa.guards[s].props
        env, eps = {}, {}
        for e in es.edits[z]:
            for rep in e.input_classes(props):
                s2 = s if rep is None else dfa.step(s, rep)
                q2 = intern((e.dst, s2))
                if e.emits:
                    env.setdefault((q2, e.weight), None)
                elif q2 != i:
                    eps.setdefault((q2, e.weight), EditOp(rep, None, e.weight))
        env_all.append(tuple(env))
        eps_all.append(tuple((q2, w, op) for (q2, w), op in eps.items()))
        i += 1

    accepting = frozenset(q for q, (z, s) in enumerate(pairs)
                          if z in es.accepting and s in dfa.accepting)
    a = RelaxedAutomaton(es, dfa, tuple(pairs), index, accepting, tuple(eps_all), tuple(env_all))
    _check_eps_cycles(a)
    return a


def _check_eps_cycles(a: RelaxedAutomaton) -> None:
    zero = [[q2 for q2, w, _ in a.eps[q] if w == 0] for q in range(a.n_states)]
    color = [0] * a.n_states
    for root in range(a.n_states):
        if color[root]:
            continue
        stack = [(root, iter(zero[root]))]
        color[root] = 1
        while stack:
            q, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[q] = 2
                stack.pop()
            elif color[nxt] == 1:
                raise EpsilonCycleError(f"zero-weight epsilon cycle through state {nxt}")
            elif color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(zero[nxt])))


@dataclass(frozen=True)
class HeuristicTable:
    """Distance from each automaton state to the virtual final state.

    ``dmin[a.final] == 0``; unreachable states hold ``inf``.
    """

    dmin: Tuple[float, ...]
    mode: str = "hops"

    def __getitem__(self, q: int) -> float:
        return self.dmin[q]


def _edges(a: RelaxedAutomaton, labels: Optional[Sequence[Symbol]]):
    for q in range(a.n_states):
        if labels is None:
            for q2, w in a.env_edges[q]:
                yield q, q2, w
        else:
            for lab in labels:
                for q2, w, _ in a.successors(q, lab):
                    yield q, q2, w
        for q2, w, _ in a.eps[q]:
            yield q, q2, w
        if q in a.accepting:
            yield q, a.final, 0.0


def heuristic_table(a: RelaxedAutomaton, mode: str = "hops", lam: float = 1.0,
                    labels: Optional[Iterable[Symbol]] = None) -> HeuristicTable:
    """Backward search from the virtual final state.

    ``hops`` counts transitions; ``weighted`` sums ``lam * weight``.  When
    ``labels`` is given, only environment transitions on those labels are
    considered (pass the environment's label set to ignore symbols that can
    never be observed).
    """
    if mode not in ("hops", "weighted"):
        raise ValueError(f"unknown heuristic mode {mode!r}")
    labels = None if labels is None else list(dict.fromkeys(frozenset(l) for l in labels))
    n = a.n_states + 1
    rev: List[List[Tuple[int, float]]] = [[] for _ in range(n)]
    for q, q2, w in _edges(a, labels):
        rev[q2].append((q, w))
    dist = [INF] * n
    dist[a.final] = 0
    if mode == "hops":
        queue = deque([a.final])
        while queue:
            u = queue.popleft()
            for v, _ in rev[u]:
                if dist[v] == INF:
                    dist[v] = dist[u] + 1
                    queue.append(v)
    else:
        heap = [(0.0, a.final)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, w in rev[u]:
                nd = d + lam * w
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
    return HeuristicTable(tuple(dist), mode)


def symbols_over(aps: Iterable[str]) -> List[Symbol]:
    return subsets(sorted(set(aps)))


def accepted_env_words(a: RelaxedAutomaton, max_len: int,
                       alphabet: Optional[Sequence[Symbol]] = None,
                       max_spec_len: Optional[int] = None) -> Dict[Tuple[Symbol, ...], float]:
    """Cheapest accepting run for every environment word of length <= ``max_len``.

    Runs consume at most ``max_spec_len`` specification symbols (default
    ``max_len``).  ``alphabet`` restricts both tracks; it defaults to every
    symbol over the propositions of the DFA and the edit system.
    """
    if max_len > 8:
        raise CapacityError("accepted_env_words is an exhaustive oracle; keep max_len <= 8")
    if max_spec_len is None:
        max_spec_len = max_len
    if alphabet is None:
        alphabet = symbols_over(set(a.dfa.aps) | a.es.aps())
    alphabet = [frozenset(s) for s in alphabet]
    allowed = set(alphabet)
    live = heuristic_table(a)
    start = (a.initial, (), 0)
    dist = {start: 0.0}
    heap = [(0.0, 0, start)]
    tick = 1
    best: Dict[Tuple[Symbol, ...], float] = {}
    while heap:
        d, _, cfg = heapq.heappop(heap)
        if d > dist[cfg]:
            continue
        q, word, used = cfg
        if q in a.accepting and word not in best:
            best[word] = d
        moves = []
        if used < max_spec_len:
            for q2, w, op in a.eps[q]:
                if op.inp in allowed:
                    moves.append((q2, w, word, used + 1))
        if len(word) < max_len:
            for lab in alphabet:
                for q2, w, op in a.transitions(q, lab):
                    if op.inp is None:
                        moves.append((q2, w, word + (lab,), used))
                    elif op.inp in allowed and used < max_spec_len:
                        moves.append((q2, w, word + (lab,), used + 1))
        for q2, w, word2, used2 in moves:
            if live[q2] == INF:
                continue
            nxt = (q2, word2, used2)
            nd = d + w
            if nd < dist.get(nxt, INF):
                dist[nxt] = nd
                heapq.heappush(heap, (nd, tick, nxt))
                tick += 1
    return best
