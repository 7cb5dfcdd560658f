"""Weighted transition systems: grids, graph files and distance queries.

Two on-disk formats are supported.

Edge-list CSV (``.csv``)::

    # initial: 0
    0,1,2.5
    1,2,1.0
    # labels
    2=fuel
    1=coffee lunch

Lines starting with ``#`` are comments except the ``# initial:`` directive
and the ``# labels`` marker; every line after the marker is ``node=ap ap``.
An optional ``src,dst,weight`` header row is skipped.

JSON (``.json``)::

    {"states": [{"id": 0, "labels": ["a"]}, ...],
     "initial": 0,
     "edges": [{"src": 0, "dst": 1, "w": 1.0}, ...]}

Every state gets a zero-weight self-loop on load.  Saving omits those
implicit self-loops, so ``save_graph(load_graph(p))`` reproduces a file that
was itself written by :func:`save_graph`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DimensionError, GraphParseError, InvalidTrajectory, NegativeWeightError

Symbol = FrozenSet[str]
EMPTY: Symbol = frozenset()


@dataclass(frozen=True, eq=False)
class TransitionSystem:
    """Labeled weighted directed graph with integer state indices.

    ``succ[x]`` lists ``(x', weight)`` pairs; the first entry is always the
    zero-weight self-loop.  ``names[x]`` is the external node id.
    """

    names: Tuple[Hashable, ...]
    succ: Tuple[Tuple[Tuple[int, float], ...], ...]
    labels: Tuple[Symbol, ...]
    initial: int = 0
    shape: Optional[Tuple[int, int]] = None
    _index: Dict[Hashable, int] = field(default=None, repr=False)

    def __post_init__(self):
        if self._index is None:
            object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    @property
    def n_states(self) -> int:
        return len(self.names)

    @property
    def n_edges(self) -> int:
        return sum(len(s) for s in self.succ)

    def index(self, name: Hashable) -> int:
        return self._index[name]

    def weight(self, x: int, y: int) -> Optional[float]:
        for t, w in self.succ[x]:
            if t == y:
                return w
        return None

    def label_set(self) -> List[Symbol]:
        """Distinct labels in first-occurrence order."""
        seen = {}
        for lab in self.labels:
            seen.setdefault(lab, None)
        return list(seen)

    def aps(self) -> FrozenSet[str]:
        out = frozenset()
        for lab in self.labels:
            out |= lab
        return out

    def states_with(self, label: Symbol) -> List[int]:
        return [x for x, lab in enumerate(self.labels) if lab == label]

    def cell(self, r: int, c: int) -> int:
        return r * self.shape[1] + c

    def coord(self, x: int) -> Tuple[int, int]:
        return divmod(x, self.shape[1])

    def reversed_csr(self) -> csr_matrix:
        rows, cols, data = [], [], []
        for x, out in enumerate(self.succ):
            for y, w in out:
                if y != x:
                    rows.append(y)
                    cols.append(x)
                    data.append(w)
        n = self.n_states
        return csr_matrix((np.asarray(data, dtype=float), (rows, cols)), shape=(n, n))

    def with_labels(self, labels: Mapping[int, Iterable[str]]) -> "TransitionSystem":
        """Copy with the given states' labels replaced."""
        new = list(self.labels)
        for x, props in labels.items():
            new[x] = frozenset(props)
        return TransitionSystem(self.names, self.succ, tuple(new), self.initial, self.shape, self._index)


def _build(names, edges, labels, initial, shape=None) -> TransitionSystem:
    """``edges`` is an iterable of (src_idx, dst_idx, w); self-loops are added."""
    n = len(names)
    best: List[Dict[int, float]] = [dict() for _ in range(n)]
    for s, d, w in edges:
        if not (w >= 0) or math.isinf(w):
            raise NegativeWeightError(f"edge {names[s]}->{names[d]} has weight {w}")
        if s == d:
            if w != 0:
                raise GraphParseError(f"self-loop on {names[s]} must have weight 0, got {w}")
            continue
        prev = best[s].get(d)
        if prev is None or w < prev:
            best[s][d] = float(w)
    # successors sorted by target index so search tie-breaks do not depend on edge order
    succ = tuple(((x, 0.0),) + tuple(sorted(best[x].items())) for x in range(n))
    return TransitionSystem(tuple(names), succ, tuple(labels), initial, shape)


def make_grid(rows: int, cols: int, edge_weight: float = 1.0,
              labels: Optional[Mapping[Tuple[int, int], Iterable[str]]] = None,
              initial: Tuple[int, int] = (0, 0)) -> TransitionSystem:
    """4-connected ``rows x cols`` grid; state ``r * cols + c`` is cell (r, c)."""
    if rows <= 0 or cols <= 0:
        raise DimensionError(f"grid must be non-empty, got {rows}x{cols}")
    if edge_weight < 0:
        raise NegativeWeightError(f"edge weight {edge_weight}")
    lab = [EMPTY] * (rows * cols)
    for (r, c), props in (labels or {}).items():
        if not (0 <= r < rows and 0 <= c < cols):
            raise DimensionError(f"label cell {(r, c)} outside {rows}x{cols} grid")
        lab[r * cols + c] = frozenset(props)
    edges = []
    for r in range(rows):
        for c in range(cols):
            x = r * cols + c
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    edges.append((x, rr * cols + cc, edge_weight))
    r0, c0 = initial
    return _build(list(range(rows * cols)), edges, lab, r0 * cols + c0, shape=(rows, cols))


def from_edges(edges: Iterable[Tuple[Hashable, Hashable, float]],
               labels: Optional[Mapping[Hashable, Iterable[str]]] = None,
               initial: Optional[Hashable] = None,
               nodes: Sequence[Hashable] = ()) -> TransitionSystem:
    """Build a transition system from named edges."""
    index: Dict[Hashable, int] = {}
    names: List[Hashable] = []

    def idx(name):
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    for n in nodes:
        idx(n)
    triples = [(idx(s), idx(d), w) for s, d, w in edges]
    labels = labels or {}
    for n in labels:
        idx(n)
    if initial is not None:
        idx(initial)
    if not names:
        raise GraphParseError("graph has no states")
    lab = [EMPTY] * len(names)
    for n, props in labels.items():
        lab[index[n]] = frozenset(props)
    x0 = index[initial] if initial is not None else 0
    return _build(names, triples, lab, x0)


def _name_key(name):
    return (0, name, "") if isinstance(name, int) else (1, 0, str(name))


def _node_token(tok: str):
    tok = tok.strip()
    try:
        return int(tok)
    except ValueError:
        return tok


def load_graph(path, format: Optional[str] = None) -> TransitionSystem:
    path = Path(path)
    fmt = format or ("json" if path.suffix == ".json" else "csv")
    text = path.read_text(encoding="utf-8")
    if fmt == "json":
        return _load_json(text)
    if fmt in ("csv", "edge-list-csv"):
        return _load_csv(text)
    raise ValueError(f"unknown graph format {fmt!r}")


def _load_csv(text: str) -> TransitionSystem:
    edges, labels, initial = [], {}, None
    in_labels = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.lower() == "labels":
                in_labels = True
            elif body.lower().startswith("initial:"):
                initial = _node_token(body.split(":", 1)[1])
            continue
        if in_labels:
            if "=" not in line:
                raise GraphParseError(f"expected node=labels, got {line!r}", lineno)
            node, props = line.split("=", 1)
            labels[_node_token(node)] = props.replace(";", " ").replace(",", " ").split()
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise GraphParseError(f"expected src,dst,weight, got {line!r}", lineno)
        if parts == ["src", "dst", "weight"]:
            continue
        try:
            w = float(parts[2])
        except ValueError:
            raise GraphParseError(f"bad weight {parts[2]!r}", lineno) from None
        if w < 0:
            raise NegativeWeightError(f"line {lineno}: negative weight {w}")
        edges.append((_node_token(parts[0]), _node_token(parts[1]), w))
    nodes = {n for s, d, _ in edges for n in (s, d)} | set(labels)
    if initial is not None:
        nodes.add(initial)
    return from_edges(edges, labels, initial, nodes=sorted(nodes, key=_name_key))


def _load_json(text: str) -> TransitionSystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(str(exc), exc.lineno) from None
    try:
        states = doc.get("states", [])
        nodes = [s["id"] for s in states]
        labels = {s["id"]: s.get("labels", []) for s in states if s.get("labels")}
        edges = []
        for e in doc.get("edges", []):
            w = float(e.get("w", 1.0))
            if w < 0:
                raise NegativeWeightError(f"negative weight {w} on {e['src']}->{e['dst']}")
            edges.append((e["src"], e["dst"], w))
    except (KeyError, TypeError, AttributeError) as exc:
        raise GraphParseError(f"malformed transition system document: {exc}") from None
    return from_edges(edges, labels, doc.get("initial"), nodes=nodes)


def _fmt_w(w: float) -> str:
    return repr(float(w))


def save_graph(ts: TransitionSystem, path, format: Optional[str] = None) -> None:
    path = Path(path)
    fmt = format or ("json" if path.suffix == ".json" else "csv")
    path.write_text(dumps_graph(ts, fmt), encoding="utf-8")


def dumps_graph(ts: TransitionSystem, format: str = "csv") -> str:
    if format == "json":
        doc = {
            "states": [{"id": n, "labels": sorted(ts.labels[x])} for x, n in enumerate(ts.names)],
            "initial": ts.names[ts.initial],
            "edges": [
                {"src": ts.names[x], "dst": ts.names[y], "w": w}
                for x, out in enumerate(ts.succ) for y, w in out if y != x
            ],
        }
        return json.dumps(doc, indent=1) + "\n"
    # canonical order: nodes by name, then successors by name
    names = ts.names
    order = sorted(range(ts.n_states), key=lambda x: _name_key(names[x]))
    lines = [f"# initial: {names[ts.initial]}"]
    for x in order:
        for y, w in sorted(ts.succ[x], key=lambda e: _name_key(names[e[0]])):
            if y != x:
                lines.append(f"{names[x]},{names[y]},{_fmt_w(w)}")
    lines.append("# labels")
    for x in order:
        if ts.labels[x]:
            lines.append(f"{names[x]}={' '.join(sorted(ts.labels[x]))}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

def check_trajectory(ts: TransitionSystem, traj: Sequence[int]) -> None:
    if not traj:
        raise InvalidTrajectory("empty trajectory")
    if traj[0] != ts.initial:
        raise InvalidTrajectory(f"trajectory starts at {traj[0]}, not the initial state {ts.initial}")
    for k in range(1, len(traj)):
        if ts.weight(traj[k - 1], traj[k]) is None:
            raise InvalidTrajectory(f"no transition {traj[k - 1]} -> {traj[k]} (step {k})")


def trajectory_weight(ts: TransitionSystem, traj: Sequence[int]) -> float:
    check_trajectory(ts, traj)
    return sum(ts.weight(traj[k - 1], traj[k]) for k in range(1, len(traj)))


def output_word(ts: TransitionSystem, traj: Sequence[int]) -> List[Symbol]:
    """Labels observed along a trajectory, one symbol per visited state."""
    check_trajectory(ts, traj)
    return [ts.labels[x] for x in traj]


def multi_source_distance(ts: TransitionSystem, targets: Iterable[int]) -> np.ndarray:
    """Shortest distance from every state to the nearest target (``inf`` if none)."""
    targets = sorted(set(targets))
    if not targets:
        raise ValueError("targets must be non-empty")
    return dijkstra(ts.reversed_csr(), directed=True, indices=targets, min_only=True)
