"""Syntactically co-safe LTL: parsing, finite-word semantics and DFA compilation.

Concrete syntax::

    phi := true | false | ident | !phi | phi && phi | phi || phi
         | X phi | F phi | phi U phi | ( phi )

``!``, ``X`` and ``F`` bind tightest, then ``U`` (right associative), then
``&&``, then ``||``.  Formulas are normalized on parse: negations are pushed
down to atoms, and a negation that would land on ``X``, ``F`` or ``U`` is
rejected with :class:`CoSafetyError`.

Words are sequences of symbols; a symbol is a ``frozenset`` of proposition
names (possibly empty).  Satisfaction is over finite words: a literal at a
position past the end of the word is false, ``X phi`` needs a next position,
and ``phi U psi`` needs ``psi`` to hold at some position inside the word.
"""
from __future__ import annotations

import itertools
import re
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np

from .errors import CapacityError, CoSafetyError, FormulaSyntaxError

Symbol = FrozenSet[str]
Word = Sequence[Symbol]

IDENT_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*")
KEYWORDS = {"true", "false", "X", "F", "U"}


def symbol(*props: str) -> Symbol:
    """Build a symbol from proposition names."""
    return frozenset(sys.intern(p) for p in props)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

class Formula:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not IDENT_RE.fullmatch(self.name) or self.name in KEYWORDS:
            raise ValueError(f"invalid proposition name {self.name!r}")
        object.__setattr__(self, "name", sys.intern(self.name))


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula


TEMPORAL = (Next, Until, Eventually)


def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, (And, Or, Until)):
        return (f.left, f.right)
    if isinstance(f, (Not, Next, Eventually)):
        return (f.arg,)
    return ()


def depth(f: Formula) -> int:
    """Operator nesting depth; literals (``a``, ``!a``, ``true``) have depth 1."""
    if isinstance(f, Not) and isinstance(f.arg, Atom):
        return 1
    kids = children(f)
    return 1 + max((depth(k) for k in kids), default=0)


def size(f: Formula) -> int:
    return 1 + sum(size(k) for k in children(f))


def atoms(f: Formula) -> FrozenSet[str]:
    if isinstance(f, Atom):
        return frozenset([f.name])
    out = frozenset()
    for k in children(f):
        out |= atoms(k)
    return out


# ---------------------------------------------------------------------------
# Parsing and printing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(&&)|(\|\|)|(!)|(\()|(\))|([a-zA-Z_][a-zA-Z0-9_]*))")


def _tokenize(text: str) -> List[Tuple[str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        tokens.append((m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("<end>", n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok, pos = self.take()
        if tok != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {tok!r}", pos)

    def parse(self):
        f = self.disjunction()
        tok, pos = self.tokens[self.i]
        if tok != "<end>":
            raise FormulaSyntaxError(f"unexpected token {tok!r}", pos)
        return f

    def disjunction(self):
        f = self.conjunction()
        while self.peek() == "||":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.until()
        while self.peek() == "&&":
            self.take()
            f = And(f, self.until())
        return f

    def until(self):
        f = self.unary()
        if self.peek() == "U":
            self.take()
            return Until(f, self.until())
        return f

    def unary(self):
        tok, pos = self.tokens[self.i]
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "X":
            self.take()
            return Next(self.unary())
        if tok == "F":
            self.take()
            return Eventually(self.unary())
        return self.primary()

    def primary(self):
        tok, pos = self.take()
        if tok == "(":
            f = self.disjunction()
            self.expect(")")
            return f
        if tok == "true":
            return Top()
        if tok == "false":
            return Bottom()
        if tok == "<end>":
            raise FormulaSyntaxError("unexpected end of formula", pos)
        if tok in KEYWORDS or not IDENT_RE.fullmatch(tok):
            raise FormulaSyntaxError(f"unexpected token {tok!r}", pos)
        return Atom(tok)


def parse_raw(text: str) -> Formula:
    """Parse without normalization."""
    return _Parser(text).parse()


def parse(text: str) -> Formula:
    """Parse formula text and normalize it (see :func:`normalize`)."""
    return normalize(parse_raw(text))


def normalize(f: Formula) -> Formula:
    """Push negations down to atoms.

    Raises CoSafetyError when a negation would have to apply to a temporal
    operator.
    """
    if isinstance(f, Not):
        return _negate(f.arg)
    if isinstance(f, (Top, Bottom, Atom)):
        return f
    if isinstance(f, And):
        return And(normalize(f.left), normalize(f.right))
    if isinstance(f, Or):
        return Or(normalize(f.left), normalize(f.right))
    if isinstance(f, Until):
        return Until(normalize(f.left), normalize(f.right))
    if isinstance(f, Next):
        return Next(normalize(f.arg))
    if isinstance(f, Eventually):
        return Eventually(normalize(f.arg))
    raise TypeError(f"not a formula: {f!r}")


def _negate(f: Formula) -> Formula:
    if isinstance(f, Top):
        return Bottom()
    if isinstance(f, Bottom):
        return Top()
    if isinstance(f, Atom):
        return Not(f)
    if isinstance(f, Not):
        return normalize(f.arg)
    if isinstance(f, And):
        return Or(_negate(f.left), _negate(f.right))
    if isinstance(f, Or):
        return And(_negate(f.left), _negate(f.right))
    raise CoSafetyError(f"negated temporal operator is not co-safe: !({to_text(f)})")


_PREC = {Or: 1, And: 2, Until: 3, Not: 4, Next: 4, Eventually: 4}


def _prec(f):
    return _PREC.get(type(f), 5)


def to_text(f: Formula) -> str:
    """Pretty-print in the concrete syntax; ``parse_raw(to_text(f)) == f``."""

    def wrap(g, min_prec):
        s = to_text(g)
        return f"({s})" if _prec(g) < min_prec else s

    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + wrap(f.arg, 4)
    if isinstance(f, Next):
        return "X " + wrap(f.arg, 4)
    if isinstance(f, Eventually):
        return "F " + wrap(f.arg, 4)
    if isinstance(f, Until):
        return f"{wrap(f.left, 4)} U {wrap(f.right, 3)}"
    if isinstance(f, And):
        return f"{wrap(f.left, 2)} && {wrap(f.right, 3)}"
    if isinstance(f, Or):
        return f"{wrap(f.left, 1)} || {wrap(f.right, 2)}"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Finite-word semantics (reference evaluator)
# ---------------------------------------------------------------------------

def evaluate(f: Formula, word: Word) -> bool:
    """Decide ``word |= f`` by direct recursion on the semantics."""
    f = normalize(f)
    word = [frozenset(s) for s in word]
    n = len(word)

    def sat(g, i):
        if isinstance(g, Top):
            return True
        if isinstance(g, Bottom):
            return False
        if isinstance(g, Atom):
            return i < n and g.name in word[i]
        if isinstance(g, Not):
            return i < n and g.arg.name not in word[i]
        if isinstance(g, And):
            return sat(g.left, i) and sat(g.right, i)
        if isinstance(g, Or):
            return sat(g.left, i) or sat(g.right, i)
        if isinstance(g, Next):
            return i + 1 < n and sat(g.arg, i + 1)
        if isinstance(g, Eventually):
            return any(sat(g.arg, j) for j in range(i, n))
        if isinstance(g, Until):
            for j in range(i, n):
                if sat(g.right, j):
                    return True
                if not sat(g.left, j):
                    return False
            return False
        raise TypeError(g)

    return sat(f, 0)


def all_words(aps: Sequence[str], length: int) -> np.ndarray:
    """Every word of ``length`` symbols over ``2^aps`` as a symbol-index array.

    Symbol index bit ``k`` set means ``aps[k]`` holds.  Shape is
    ``(2**(len(aps)*length), length)``.
    """
    m = 1 << len(aps)
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((m,) * length).reshape(length, -1).T
    return grids.astype(np.int64)


def evaluate_batch(f: Formula, aps: Sequence[str], words: np.ndarray) -> np.ndarray:
    """Vectorized :func:`evaluate` over many same-length words.

    ``words`` is an integer array of shape (count, length) of symbol indices
    over ``aps`` as produced by :func:`all_words`.  Truth values are filled
    in backwards from the end of the word, one subformula at a time.
    """
    f = normalize(f)
    count, n = words.shape
    index = {p: k for k, p in enumerate(aps)}

    def table(g):
        # returns bool array (count, n + 1); column n is "past the end"
        out = np.zeros((count, n + 1), dtype=bool)
        if isinstance(g, Top):
            out[:] = True
        elif isinstance(g, Bottom):
            pass
        elif isinstance(g, Atom):
            out[:, :n] = (words >> index[g.name]) & 1 == 1
        elif isinstance(g, Not):
            out[:, :n] = (words >> index[g.arg.name]) & 1 == 0
        elif isinstance(g, And):
            out = table(g.left) & table(g.right)
        elif isinstance(g, Or):
            out = table(g.left) | table(g.right)
        elif isinstance(g, Next):
            inner = table(g.arg)
            out[:, : max(n - 1, 0)] = inner[:, 1:n]
        elif isinstance(g, (Until, Eventually)):
            left = np.ones((count, n + 1), dtype=bool) if isinstance(g, Eventually) else table(g.left)
            right = table(g.arg if isinstance(g, Eventually) else g.right)
            for i in range(n - 1, -1, -1):
                out[:, i] = right[:, i] | (left[:, i] & out[:, i + 1])
        else:
            raise TypeError(g)
        return out

    return table(f)[:, 0]


# ---------------------------------------------------------------------------
# Compilation by formula progression
# ---------------------------------------------------------------------------
# Subformulas use a hashable tuple encoding:
#   ("T",) ("F",) ("N",)             true, false, "some position remains"
#   ("p", a) ("n", a)                positive / negative literal
#   ("X", g) ("U", l, r)
#   ("&", l, r) ("|", l, r)
# A DFA state is an obligation in disjunctive normal form: a frozenset of
# clauses, each clause a frozenset of elementary subformulas (literals, N, X,
# U).  X and U arguments are always subformulas of the input, so the set of
# possible obligations is finite.

TOP = ("T",)
BOT = ("F",)
NONEMPTY = ("N",)

Dnf = FrozenSet[FrozenSet[tuple]]
DNF_TRUE: Dnf = frozenset([frozenset()])
DNF_FALSE: Dnf = frozenset()


def encode(f: Formula) -> tuple:
    f = normalize(f)
    if isinstance(f, Top):
        return TOP
    if isinstance(f, Bottom):
        return BOT
    if isinstance(f, Atom):
        return ("p", f.name)
    if isinstance(f, Not):
        return ("n", f.arg.name)
    if isinstance(f, And):
        return ("&", encode(f.left), encode(f.right))
    if isinstance(f, Or):
        return ("|", encode(f.left), encode(f.right))
    if isinstance(f, Next):
        return ("X", encode(f.arg))
    if isinstance(f, Eventually):
        return ("U", TOP, encode(f.arg))
    if isinstance(f, Until):
        return ("U", encode(f.left), encode(f.right))
    raise TypeError(f)


def _minimize(clauses: Iterable[FrozenSet[tuple]]) -> Dnf:
    keep = []
    for c in sorted(set(clauses), key=len):
        if any(("n", e[1]) in c for e in c if e[0] == "p"):
            continue
        if any(k <= c for k in keep):
            continue
        keep.append(c)
    return frozenset(keep)


def dnf_or(a: Dnf, b: Dnf) -> Dnf:
    return _minimize(a | b)


def dnf_and(a: Dnf, b: Dnf) -> Dnf:
    return _minimize(x | y for x in a for y in b)


@lru_cache(maxsize=None)
def to_dnf(g: tuple) -> Dnf:
    tag = g[0]
    if tag == "T":
        return DNF_TRUE
    if tag == "F":
        return DNF_FALSE
    if tag == "&":
        return dnf_and(to_dnf(g[1]), to_dnf(g[2]))
    if tag == "|":
        return dnf_or(to_dnf(g[1]), to_dnf(g[2]))
    return frozenset([frozenset([g])])


@lru_cache(maxsize=None)
def _now(g: tuple) -> FrozenSet[str]:
    tag = g[0]
    if tag in ("p", "n"):
        return frozenset([g[1]])
    if tag in ("&", "|", "U"):
        return _now(g[1]) | _now(g[2])
    return frozenset()


def now_atoms(ob: Dnf) -> FrozenSet[str]:
    """Propositions whose value at the current position affects progression."""
    out = frozenset()
    for clause in ob:
        for e in clause:
            out |= _now(e)
    return out


@lru_cache(maxsize=None)
def _progress(g: tuple, sym: Symbol) -> Dnf:
    tag = g[0]
    if tag in ("T", "N"):
        return DNF_TRUE
    if tag == "F":
        return DNF_FALSE
    if tag == "p":
        return DNF_TRUE if g[1] in sym else DNF_FALSE
    if tag == "n":
        return DNF_FALSE if g[1] in sym else DNF_TRUE
    if tag == "X":
        return dnf_and(to_dnf(g[1]), frozenset([frozenset([NONEMPTY])]))
    if tag == "U":
        stay = dnf_and(_progress(g[1], sym), frozenset([frozenset([g])]))
        return dnf_or(_progress(g[2], sym), stay)
    if tag == "&":
        return dnf_and(_progress(g[1], sym), _progress(g[2], sym))
    if tag == "|":
        return dnf_or(_progress(g[1], sym), _progress(g[2], sym))
    raise ValueError(g)


def progress(ob: Dnf, sym: Symbol) -> Dnf:
    """Obligation on the remaining suffix after reading ``sym``."""
    out = DNF_FALSE
    for clause in ob:
        part = DNF_TRUE
        for e in clause:
            part = dnf_and(part, _progress(e, sym))
            if not part:
                break
        out = dnf_or(out, part)
    return out


def holds_on_empty(ob: Dnf) -> bool:
    """Whether the empty remaining suffix discharges the obligation.

    Every elementary obligation needs at least one more position, so only
    the empty clause qualifies.
    """
    return frozenset() in ob


def _elem_text(g: tuple) -> str:
    tag = g[0]
    if tag == "T":
        return "true"
    if tag == "F":
        return "false"
    if tag == "N":
        return "more"
    if tag == "p":
        return g[1]
    if tag == "n":
        return "!" + g[1]
    if tag == "X":
        return f"X({_elem_text(g[1])})"
    if tag == "U":
        return f"({_elem_text(g[1])} U {_elem_text(g[2])})"
    joiner = " && " if tag == "&" else " || "
    return f"({_elem_text(g[1])}{joiner}{_elem_text(g[2])})"


def obligation_text(ob: Dnf) -> str:
    if not ob:
        return "false"
    clauses = []
    for c in ob:
        clauses.append(" && ".join(sorted(_elem_text(e) for e in c)) or "true")
    return " || ".join(sorted(clauses))


def subsets(items: Sequence[str]) -> List[Symbol]:
    """All subsets of ``items`` in a fixed order (by size, then lexicographic)."""
    items = sorted(items)
    out = []
    for r in range(len(items) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(items, r))
    return out


@dataclass(frozen=True)
class Guard:
    """Transition table of one DFA state, keyed on the relevant propositions."""

    props: Tuple[str, ...]
    table: Dict[Symbol, int] = field(hash=False, compare=False)

    def target(self, sym: Symbol) -> int:
        return self.table[frozenset(p for p in self.props if p in sym)]


@dataclass(frozen=True, eq=False)
class SpecDfa:
    """Deterministic automaton over finite words.

    Transitions are stored per state as a :class:`Guard`: only the
    propositions relevant in that state are inspected, so the full ``2^AP``
    alphabet is never enumerated.
    """

    aps: Tuple[str, ...]
    obligations: Tuple[tuple, ...]
    guards: Tuple[Guard, ...]
    accepting: FrozenSet[int]
    initial: int = 0

    @property
    def n_states(self) -> int:
        return len(self.guards)

    @property
    def n_transitions(self) -> int:
        return sum(len(g.table) for g in self.guards)

    def step(self, state: int, sym: Symbol) -> int:
        return self.guards[state].target(sym)

    def run(self, word: Word) -> int:
        s = self.initial
        for sym in word:
            s = self.step(s, sym)
        return s

    def accepts(self, word: Word) -> bool:
        return self.run(word) in self.accepting

    def is_accepting(self, state: int) -> bool:
        return state in self.accepting

    def dense_table(self, aps: Sequence[str]) -> np.ndarray:
        """Transition table indexed by ``[state, symbol_index]`` over ``aps``."""
        m = 1 << len(aps)
        out = np.empty((self.n_states, m), dtype=np.int64)
        for k in range(m):
            sym = frozenset(p for b, p in enumerate(aps) if k >> b & 1)
            for s in range(self.n_states):
                out[s, k] = self.step(s, sym)
        return out

    def live_states(self) -> FrozenSet[int]:
        """States from which an accepting state is reachable."""
        preds = [set() for _ in range(self.n_states)]
        for s, g in enumerate(self.guards):
            for t in g.table.values():
                preds[t].add(s)
        seen = set(self.accepting)
        stack = list(seen)
        while stack:
            t = stack.pop()
            for s in preds[t]:
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        return frozenset(seen)

    def dump(self) -> dict:
        return {
            "aps": list(self.aps),
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "states": [
                {
                    "id": s,
                    "obligation": obligation_text(self.obligations[s]),
                    "guard_props": list(g.props),
                    "transitions": [
                        {"when": sorted(k), "to": t}
                        for k, t in sorted(g.table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
                    ],
                }
                for s, g in enumerate(self.guards)
            ],
        }


DEFAULT_STATE_CAP = 10**6


def compile_formula(f: Formula, state_cap: int = DEFAULT_STATE_CAP) -> SpecDfa:
    """Translate a co-safe formula into a DFA accepting exactly its models."""
    root = to_dnf(encode(f))
    ids = {root: 0}
    obligations = [root]
    guards = []
    i = 0
    while i < len(obligations):
        ob = obligations[i]
        props = tuple(sorted(now_atoms(ob)))
        if len(props) > 24:
            raise CapacityError(f"{len(props)} propositions in one guard")
        table = {}
        for key in subsets(props):
            nxt = progress(ob, key)
            if nxt not in ids:
                if len(obligations) >= state_cap:
                    raise CapacityError(f"DFA exceeds {state_cap} states")
                ids[nxt] = len(obligations)
                obligations.append(nxt)
            table[key] = ids[nxt]
        guards.append(Guard(props, table))
        i += 1
    accepting = frozenset(k for k, ob in enumerate(obligations) if holds_on_empty(ob))
    return SpecDfa(
        aps=tuple(sorted(atoms(f))),
        obligations=tuple(obligations),
        guards=tuple(guards),
        accepting=accepting,
    )


def accepts(dfa: SpecDfa, word: Word) -> bool:
    return dfa.accepts(word)


# ---------------------------------------------------------------------------
# Random co-safe formulas (tests and benchmarks)
# ---------------------------------------------------------------------------

def random_formula(rng: np.random.Generator, aps: Sequence[str], max_depth: int = 4) -> Formula:
    """Random normalized co-safe formula of depth at most ``max_depth``."""

    def leaf():
        r = rng.random()
        if r < 0.1:
            return Top()
        a = Atom(aps[int(rng.integers(len(aps)))])
        return Not(a) if r < 0.35 else a

    def build(d):
        if d <= 1 or rng.random() < 0.25:
            return leaf()
        op = int(rng.integers(5))
        if op == 0:
            return And(build(d - 1), build(d - 1))
        if op == 1:
            return Or(build(d - 1), build(d - 1))
        if op == 2:
            return Next(build(d - 1))
        if op == 3:
            return Until(build(d - 1), build(d - 1))
        return Eventually(build(d - 1))

    return build(max_depth)
