"""Seeded random instances shared by the property and acceptance tests."""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from tlrelax.formula import Formula, SpecDfa, all_words, atoms, evaluate_batch, random_formula
from tlrelax.ts import TransitionSystem, make_grid
from tlrelax.wfse import PreferenceRule, delete, substitute

SPEC_APS = ["a", "b", "c"]
ENV_APS = ["a", "b", "c", "d"]


@dataclass
class Instance:
    ts: TransitionSystem
    formula: Formula
    rules: List[PreferenceRule]


def random_rules(rng: np.random.Generator, max_rules: int = 2,
                 spec_aps=SPEC_APS, env_aps=ENV_APS) -> List[PreferenceRule]:
    rules = []
    for _ in range(int(rng.integers(max_rules + 1))):
        frm = spec_aps[int(rng.integers(len(spec_aps)))]
        penalty = int(rng.integers(1, 6))
        if rng.random() < 0.5:
            others = [p for p in env_aps if p != frm]
            rules.append(substitute(frm, others[int(rng.integers(len(others)))], penalty))
        else:
            rules.append(delete(frm, penalty))
    return rules


def random_instance(rng: np.random.Generator, max_side: int = 5, max_rules: int = 2,
                    max_depth: int = 3, min_side: int = 1, label_prob: float = 0.7) -> Instance:
    f = random_formula(rng, SPEC_APS, max_depth)
    rules = random_rules(rng, max_rules)
    rows = int(rng.integers(min_side, max_side + 1))
    cols = int(rng.integers(min_side, max_side + 1))
    labels = {}
    for p in ENV_APS:
        if rng.random() < label_prob:
            labels[(int(rng.integers(rows)), int(rng.integers(cols)))] = {p}
    return Instance(make_grid(rows, cols, 1.0, labels), f, rules)


def singleton_alphabet(aps=ENV_APS):
    return [frozenset()] + [frozenset([p]) for p in aps]


def dfa_mismatches(f: Formula, dfa: SpecDfa, max_len: int, aps: Optional[List[str]] = None) -> int:
    """Words of length <= max_len on which the DFA and the evaluator disagree."""
    aps = aps or sorted(atoms(f)) or ["a"]
    table = dfa.dense_table(aps)
    accepting = np.array(sorted(dfa.accepting), dtype=np.int64)
    bad = 0
    for n in range(max_len + 1):
        words = all_words(aps, n)
        state = np.full(len(words), dfa.initial, dtype=np.int64)
        for i in range(n):
            state = table[state, words[:, i]]
        bad += int((np.isin(state, accepting) != evaluate_batch(f, aps, words)).sum())
    return bad
