"""Weighted finite-state edit systems built from relaxation preferences.

Preference rules use a one-rule-per-line DSL::

    # bread from the bakery instead of the supermarket
    sub bread_s -> bread_bakery penalty 5
    del ice_cream_s penalty 12

``sub a -> b`` rewrites proposition ``a`` into ``b`` in any symbol that
contains ``a``; the other propositions of the symbol pass through unchanged.
``del a`` removes a step whose symbol is exactly ``{a}``.

Multi-state preference automata can be given as JSON::

    {"states": ["z0", "z1"], "initial": "z0", "accepting": ["z0", "z1"],
     "edits": [{"from": "z0", "to": "z1", "in": ["a"], "out": ["b"], "w": 3},
               {"from": "z1", "to": "z1", "in": "eps", "out": ["c"], "w": 1}]}

Every state always carries a zero-weight pass-through loop.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import GraphParseError, InvalidEditRun, NegativeWeightError, UnknownAP
from .formula import subsets

Symbol = FrozenSet[str]
EPS = None


def _sym_text(s: Optional[Symbol]) -> str:
    if s is None:
        return "eps"
    return "{" + ",".join(sorted(s)) + "}"


@dataclass(frozen=True)
class PreferenceRule:
    kind: str  # "sub" or "del"
    frm: str
    to: Optional[str]
    penalty: float

    def __post_init__(self):
        if self.kind not in ("sub", "del"):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.penalty < 0:
            raise NegativeWeightError(f"rule penalty must be >= 0, got {self.penalty}")
        if self.kind == "sub" and (self.to is None or self.to == self.frm):
            raise ValueError("substitution needs a distinct target proposition")

    def __str__(self):
        p = _num_text(self.penalty)
        if self.kind == "sub":
            return f"sub {self.frm} -> {self.to} penalty {p}"
        return f"del {self.frm} penalty {p}"


def substitute(frm: str, to: str, penalty: float) -> PreferenceRule:
    return PreferenceRule("sub", frm, to, penalty)


def delete(frm: str, penalty: float) -> PreferenceRule:
    return PreferenceRule("del", frm, None, penalty)


def _num_text(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


_SUB_RE = re.compile(r"^sub\s+(\w+)\s*->\s*(\w+)\s+penalty\s+(\S+)$")
_DEL_RE = re.compile(r"^del\s+(\w+)\s+penalty\s+(\S+)$")


def parse_rules(text: str) -> List[PreferenceRule]:
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            m = _SUB_RE.match(line)
            if m:
                rules.append(substitute(m.group(1), m.group(2), float(m.group(3))))
                continue
            m = _DEL_RE.match(line)
            if m:
                rules.append(delete(m.group(1), float(m.group(2))))
                continue
        except ValueError as exc:
            raise GraphParseError(str(exc), lineno) from None
        raise GraphParseError(f"cannot parse preference rule {line!r}", lineno)
    return rules


def rules_text(rules: Iterable[PreferenceRule]) -> str:
    return "".join(f"{r}\n" for r in rules)


@dataclass(frozen=True)
class EditOp:
    """One edit step: input (spec) symbol, output (environment) symbol, weight."""

    inp: Optional[Symbol]
    out: Optional[Symbol]
    weight: float

    def __post_init__(self):
        if self.inp is None and self.out is None:
            raise ValueError("an edit cannot be (eps, eps)")

    def to_json(self) -> dict:
        return {
            "in": "eps" if self.inp is None else sorted(self.inp),
            "out": "eps" if self.out is None else sorted(self.out),
            "w": self.weight,
        }

    @classmethod
    def from_json(cls, doc) -> "EditOp":
        return cls(_sym_from_json(doc["in"]), _sym_from_json(doc["out"]), float(doc["w"]))

    def __str__(self):
        return f"{_sym_text(self.inp)}->{_sym_text(self.out)}/{_num_text(self.weight)}"


def _sym_from_json(v) -> Optional[Symbol]:
    if v == "eps" or v is None:
        return None
    if isinstance(v, str):
        return frozenset([v])
    return frozenset(v)


# ---------------------------------------------------------------------------
# Edit families
# ---------------------------------------------------------------------------
# An edit family is a set of (input, output) pairs sharing a source state,
# target state and weight.  ``props`` arguments are the propositions the
# specification automaton inspects in its current state; input classes are
# subsets of them.

class Edit:
    src: int
    dst: int
    weight: float
    emits = True  # output is a symbol, not eps
    rule: Optional[PreferenceRule] = None

    def apply(self, inp: Optional[Symbol]):
        """Output for a concrete input, or ``False`` when the family does not apply."""
        raise NotImplementedError

    def preimages(self, out: Symbol) -> List[Optional[Symbol]]:
        raise NotImplementedError

    def input_classes(self, props: Sequence[str]) -> List[Optional[Symbol]]:
        """One representative input per distinguishable class."""
        raise NotImplementedError


@dataclass(frozen=True)
class PassThrough(Edit):
    src: int
    dst: int
    weight: float = 0.0

    def apply(self, inp):
        return inp if inp is not None else False

    def preimages(self, out):
        return [out]

    def input_classes(self, props):
        return subsets(props)


@dataclass(frozen=True)
class Substitute(Edit):
    src: int
    dst: int
    frm: str
    to: str
    weight: float
    rule: Optional[PreferenceRule] = None

    def apply(self, inp):
        if inp is None or self.frm not in inp:
            return False
        return (inp - {self.frm}) | {self.to}

    def preimages(self, out):
        if self.to not in out or self.frm in out:
            return []
        return [(out - {self.to}) | {self.frm}, out | {self.frm}]

    def input_classes(self, props):
        return [k | {self.frm} for k in subsets(props) if self.frm in k or self.frm not in props]


@dataclass(frozen=True)
class Delete(Edit):
    src: int
    dst: int
    frm: str
    weight: float
    membership: bool = False
    rule: Optional[PreferenceRule] = None
    emits = False

    def apply(self, inp):
        if inp is None:
            return False
        if self.membership:
            return None if self.frm in inp else False
        return None if inp == frozenset([self.frm]) else False

    def preimages(self, out):
        return []

    def input_classes(self, props):
        if not self.membership:
            return [frozenset([self.frm])]
        return [k | {self.frm} for k in subsets(props) if self.frm in k or self.frm not in props]


@dataclass(frozen=True)
class Explicit(Edit):
    src: int
    dst: int
    inp: Optional[Symbol]
    out: Optional[Symbol]
    weight: float

    def __post_init__(self):
        if self.inp is None and self.out is None:
            raise ValueError("an edit cannot be (eps, eps)")
        object.__setattr__(self, "emits", self.out is not None)

    def apply(self, inp):
        return self.out if inp == self.inp else False

    def preimages(self, out):
        return [self.inp] if out == self.out else []

    def input_classes(self, props):
        return [self.inp]


@dataclass(frozen=True, eq=False)
class EditSystem:
    """Weighted edit automaton; ``edits[z]`` are the families leaving state ``z``."""

    state_names: Tuple[str, ...]
    edits: Tuple[Tuple[Edit, ...], ...]
    accepting: FrozenSet[int]
    initial: int = 0

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    def aps(self) -> FrozenSet[str]:
        out = set()
        for fams in self.edits:
            for e in fams:
                if isinstance(e, (Substitute,)):
                    out |= {e.frm, e.to}
                elif isinstance(e, Delete):
                    out.add(e.frm)
                elif isinstance(e, Explicit):
                    out |= (e.inp or frozenset()) | (e.out or frozenset())
        return frozenset(out)

    def op(self, edit: Edit, inp: Optional[Symbol]) -> EditOp:
        out = edit.apply(inp)
        if out is False:
            raise InvalidEditRun(f"{edit} does not apply to {_sym_text(inp)}")
        return EditOp(inp, out, edit.weight)

    def dump(self) -> dict:
        fams = []
        for fam in self.edits:
            for e in fam:
                fams.append(_family_json(self, e))
        return {
            "states": list(self.state_names),
            "initial": self.state_names[self.initial],
            "accepting": [self.state_names[z] for z in sorted(self.accepting)],
            "edits": fams,
        }


def _family_json(es, e):
    base = {"from": es.state_names[e.src], "to": es.state_names[e.dst], "w": e.weight}
    if isinstance(e, PassThrough):
        base["kind"] = "pass"
    elif isinstance(e, Substitute):
        base.update(kind="sub", frm=e.frm, to_ap=e.to)
    elif isinstance(e, Delete):
        base.update(kind="del", frm=e.frm, membership=e.membership)
    else:
        base.update(kind="explicit",
                    **{"in": "eps" if e.inp is None else sorted(e.inp),
                       "out": "eps" if e.out is None else sorted(e.out)})
    return base


def build_edit_system(rules: Sequence[PreferenceRule], ap_universe: Optional[Iterable[str]] = None,
                      delete_membership: bool = False) -> EditSystem:
    """Single-state edit system: pass-through plus one loop per rule."""
    if ap_universe is not None:
        universe = frozenset(ap_universe)
        for r in rules:
            for p in (r.frm, r.to):
                if p is not None and p not in universe:
                    raise UnknownAP(f"rule {r} mentions unknown proposition {p!r}")
    fams: List[Edit] = [PassThrough(0, 0)]
    for r in rules:
        if r.kind == "sub":
            fams.append(Substitute(0, 0, r.frm, r.to, float(r.penalty), rule=r))
        else:
            fams.append(Delete(0, 0, r.frm, float(r.penalty), membership=delete_membership, rule=r))
    return EditSystem(("z0",), (tuple(fams),), frozenset([0]))


def load_edit_system(path_or_doc) -> EditSystem:
    """Load an explicit edit system from a JSON file path or parsed document."""
    if isinstance(path_or_doc, (str, Path)):
        doc = json.loads(Path(path_or_doc).read_text(encoding="utf-8"))
    else:
        doc = path_or_doc
    try:
        names = [str(s) for s in doc["states"]]
        index = {n: i for i, n in enumerate(names)}
        fams: List[List[Edit]] = [[PassThrough(z, z)] for z in range(len(names))]
        for e in doc.get("edits", []):
            w = float(e.get("w", 0.0))
            if w < 0:
                raise NegativeWeightError(
                    f"edit {e['from']}->{e['to']} has weight {w}; negative penalties are not supported")
            inp, out = _sym_from_json(e["in"]), _sym_from_json(e["out"])
            if inp is None and out is None:
                raise GraphParseError(f"edit {e['from']}->{e['to']} is (eps, eps)")
            src, dst = index[str(e["from"])], index[str(e["to"])]
            fams[src].append(Explicit(src, dst, inp, out, w))
        initial = index[str(doc.get("initial", names[0]))]
        accepting = frozenset(index[str(s)] for s in doc.get("accepting", names))
    except KeyError as exc:
        raise GraphParseError(f"malformed edit system: missing or unknown {exc}") from None
    return EditSystem(tuple(names), tuple(tuple(f) for f in fams), accepting, initial)


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def apply_edits(es: EditSystem, spec_word: Sequence[Symbol],
                edits: Sequence[EditOp]) -> Tuple[List[Symbol], float]:
    """Run ``edits`` over ``spec_word``; return the output word and total weight."""
    spec_word = [frozenset(s) for s in spec_word]
    current = {es.initial}
    pos = 0
    env: List[Symbol] = []
    total = 0.0
    for k, op in enumerate(edits):
        if op.inp is not None:
            if pos >= len(spec_word) or spec_word[pos] != op.inp:
                raise InvalidEditRun(f"edit {k} ({op}) does not consume spec symbol {pos}")
        nxt = set()
        for z in current:
            for e in es.edits[z]:
                if _close(e.weight, op.weight) and e.apply(op.inp) is not False and e.apply(op.inp) == op.out:
                    nxt.add(e.dst)
        if not nxt:
            raise InvalidEditRun(f"edit {k} ({op}) is not a transition of the edit system")
        current = nxt
        if op.inp is not None:
            pos += 1
        if op.out is not None:
            env.append(op.out)
        total += op.weight
    if pos != len(spec_word):
        raise InvalidEditRun(f"edits consume {pos} of {len(spec_word)} spec symbols")
    if not current & es.accepting:
        raise InvalidEditRun("edit run does not end in an accepting state")
    return env, total
