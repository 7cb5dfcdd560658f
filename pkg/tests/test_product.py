import itertools
import math

import numpy as np
import pytest

from tlrelax.errors import CapacityError, EpsilonCycleError
from tlrelax.formula import accepts, compile_formula, parse, random_formula, subsets, symbol
from tlrelax.oracle import enumerate_relaxations
from tlrelax.product import accepted_env_words, build_product, heuristic_table
from tlrelax.wfse import build_edit_system, delete, load_edit_system, parse_rules, substitute

from _instances import random_rules, singleton_alphabet

EXAMPLE_RULES = [
    substitute("bread_s", "bread_bakery", 5),
    substitute("ice_cream_s", "ice_cream_shop", 7),
    delete("ice_cream_s", 12),
]
EXAMPLE_PHI = "F bread_s && F ice_cream_s"
EXAMPLE_ALPHABET = [frozenset()] + [symbol(p) for p in
                                    ("bread_s", "ice_cream_s", "bread_bakery", "ice_cream_shop")]


def product(formula, rules=()):
    return build_product(build_edit_system(list(rules)), compile_formula(parse(formula)))


def test_pass_through_is_isomorphic():
    dfa = compile_formula(parse("F a"))
    a = build_product(build_edit_system([]), dfa)
    assert a.n_states == dfa.n_states
    assert a.final == a.n_states
    words = accepted_env_words(a, 3)
    assert set(words.values()) == {0}
    for n in range(4):
        for w in itertools.product(subsets(["a"]), repeat=n):
            assert (tuple(w) in words) == accepts(dfa, list(w))


def test_pass_through_words_len_two():
    words = accepted_env_words(product("F a"), 2)
    A, E = symbol("a"), symbol()
    assert words == {(A,): 0, (A, A): 0, (A, E): 0, (E, A): 0}


def test_two_goals_do_not_fit_in_one_singleton_step():
    assert accepted_env_words(product("F a && F b"), 1, alphabet=singleton_alphabet(["a", "b"])) == {}


def test_example_relaxed_words():
    words = accepted_env_words(product(EXAMPLE_PHI, EXAMPLE_RULES), 2, alphabet=EXAMPLE_ALPHABET)
    bb, ics = symbol("bread_bakery"), symbol("ice_cream_shop")
    assert words[(bb, ics)] == 12
    assert words[(bb,)] == 17
    assert words[(symbol("bread_s"),)] == 12
    oracle = enumerate_relaxations(parse(EXAMPLE_PHI), EXAMPLE_RULES, 2, alphabet=EXAMPLE_ALPHABET)
    assert words == oracle


def test_case_rules_accept_k_or_j_for_b():
    a = product("F b", parse_rules("sub b -> k penalty 3\nsub b -> j penalty 5"))
    words = accepted_env_words(a, 1, alphabet=singleton_alphabet(["b", "k", "j"]))
    assert words == {(symbol("b"),): 0, (symbol("k"),): 3, (symbol("j"),): 5}


def test_heuristic_examples():
    a = product("F a && F b")
    h = heuristic_table(a, labels=singleton_alphabet(["a", "b"]))
    assert h[a.final] == 0
    assert h[a.initial] == 3
    assert all(h[q] == 1 for q in a.accepting)


def test_heuristic_unreachable_is_inf():
    # "X a" with a literal false next step: the dead state has no way out
    a = product("X a && X !a")
    h = heuristic_table(a)
    assert math.isinf(h[a.initial])


@pytest.mark.parametrize("seed", range(10))
def test_heuristic_bellman(seed):
    rng = np.random.default_rng(seed)
    a = product("F a && F (b && F c) && (!c U a)", random_rules(rng))
    labels = singleton_alphabet()
    h = heuristic_table(a, labels=labels)
    for q in range(a.n_states):
        succ = [q2 for lab in labels for q2, _, _ in a.successors(q, lab)]
        succ += [q2 for q2, _, _ in a.eps[q]]
        best = min([1 + h[q2] for q2 in succ] + ([1] if q in a.accepting else []), default=math.inf)
        assert h[q] == best


def test_weighted_mode():
    a = product("F a", [delete("a", 2)])
    h = heuristic_table(a, mode="weighted", lam=3.0)
    assert h[a.initial] == 0.0  # pass-through path costs nothing
    with pytest.raises(ValueError):
        heuristic_table(a, mode="euclid")


def test_epsilon_cycle_rejected():
    doc = {"states": ["s", "t"], "initial": "s", "accepting": ["s"],
           "edits": [{"from": "s", "to": "t", "in": ["a"], "out": "eps", "w": 0},
                     {"from": "t", "to": "s", "in": ["a"], "out": "eps", "w": 0}]}
    with pytest.raises(EpsilonCycleError):
        build_product(load_edit_system(doc), compile_formula(parse("true")))
    doc["edits"][0]["w"] = 1
    build_product(load_edit_system(doc), compile_formula(parse("true")))


def test_capacity():
    with pytest.raises(CapacityError):
        build_product(build_edit_system([]), compile_formula(parse("F a && F b && F c")), state_cap=3)


def test_transition_weights_come_from_edits():
    a = product("F a && F b", [substitute("a", "c", 4), delete("b", 2)])
    for q in range(a.n_states):
        assert {w for _, w in a.env_edges[q]} <= {0.0, 4.0}
        assert {w for _, w, _ in a.eps[q]} <= {2.0}


@pytest.mark.parametrize("seed", range(8))
def test_language_matches_double_enumeration(seed):
    rng = np.random.default_rng(100 + seed)
    f = random_formula(rng, ["a", "b", "c"], 3)
    rules = random_rules(rng)
    alpha = singleton_alphabet()
    a = build_product(build_edit_system(rules), compile_formula(f))
    assert accepted_env_words(a, 4, alphabet=alpha) == enumerate_relaxations(f, rules, 4, alphabet=alpha)


@pytest.mark.parametrize("seed", range(6))
def test_adding_a_rule_is_monotone(seed):
    rng = np.random.default_rng(200 + seed)
    rules = random_rules(rng, 2)
    extra = random_rules(rng, 1) or [delete("c", 1)]
    alpha = singleton_alphabet()
    phi = "F a && F (b && F c)"
    before = accepted_env_words(product(phi, rules), 4, alphabet=alpha)
    after = accepted_env_words(product(phi, rules + extra), 4, alphabet=alpha)
    for w, cost in before.items():
        assert w in after and after[w] <= cost


def test_dump_mentions_virtual_final():
    a = product("F a")
    assert "virtual" in a.dump()
