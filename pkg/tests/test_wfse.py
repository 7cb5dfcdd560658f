import json

import pytest
from hypothesis import given, strategies as st

from tlrelax.errors import (GraphParseError, InvalidEditRun, NegativeWeightError, UnknownAP)
from tlrelax.formula import symbol
from tlrelax.wfse import (Delete, EditOp, PassThrough, Substitute, apply_edits, build_edit_system,
                          delete, load_edit_system, parse_rules, rules_text, substitute)

EXAMPLE_RULES = [
    substitute("bread_s", "bread_bakery", 5),
    substitute("ice_cream_s", "ice_cream_shop", 7),
    delete("ice_cream_s", 12),
]

symbols = st.frozensets(st.sampled_from(["a", "b", "c"]))


def test_example_rules_build_one_state():
    es = build_edit_system(EXAMPLE_RULES)
    assert es.n_states == 1 and es.accepting == {0}
    fams = es.edits[0]
    assert sum(isinstance(e, PassThrough) for e in fams) == 1
    assert len([e for e in fams if e.rule is not None]) == 3


def test_case_rules_three_families():
    es = build_edit_system(parse_rules("sub b -> k penalty 3\nsub b -> j penalty 5\ndel e penalty 2"))
    kinds = [type(e).__name__ for e in es.edits[0]]
    assert kinds == ["PassThrough", "Substitute", "Substitute", "Delete"]


def test_unknown_ap():
    with pytest.raises(UnknownAP):
        build_edit_system([substitute("a", "z", 1)], ap_universe={"a", "b"})
    build_edit_system([substitute("a", "b", 1)], ap_universe={"a", "b"})


def test_rule_validation():
    with pytest.raises(NegativeWeightError):
        delete("a", -1)
    with pytest.raises(ValueError):
        substitute("a", "a", 1)


def test_dsl_round_trip():
    text = "sub b -> k penalty 3\nsub b -> j penalty 5.5\ndel e penalty 2\n"
    rules = parse_rules(text + "# comment\n\n")
    assert rules_text(rules) == text
    with pytest.raises(GraphParseError) as info:
        parse_rules("sub a -> b penalty 1\nswap a b")
    assert info.value.line == 2


def test_substitute_membership():
    e = Substitute(0, 0, "a", "b", 1.0)
    assert e.apply(symbol("a", "c")) == symbol("b", "c")
    assert e.apply(symbol("c")) is False
    assert set(e.preimages(symbol("b", "c"))) == {symbol("a", "c"), symbol("a", "b", "c")}
    assert e.preimages(symbol("c")) == []


def test_delete_exact_and_membership():
    e = Delete(0, 0, "a", 1.0)
    assert e.apply(symbol("a")) is None
    assert e.apply(symbol("a", "b")) is False
    m = Delete(0, 0, "a", 1.0, membership=True)
    assert m.apply(symbol("a", "b")) is None


@given(symbols, symbols)
def test_substitute_preimages_invert_apply(inp, out):
    e = Substitute(0, 0, "a", "b", 1.0)
    assert (e.apply(inp) == out) == (inp in e.preimages(out))


def test_pass_through_identity():
    es = build_edit_system([])
    w = [symbol("a"), symbol("b")]
    ops = [EditOp(s, s, 0.0) for s in w]
    assert apply_edits(es, w, ops) == (w, 0)


@given(st.lists(symbols, max_size=6))
def test_pass_through_any_word(w):
    es = build_edit_system([delete("a", 1)])
    assert apply_edits(es, w, [EditOp(s, s, 0.0) for s in w]) == (w, 0)


def test_example_substitute_and_delete():
    es = build_edit_system(EXAMPLE_RULES)
    spec = [symbol("bread_s"), symbol("ice_cream_s")]
    ops = [EditOp(spec[0], symbol("bread_bakery"), 5.0), EditOp(spec[1], None, 12.0)]
    assert apply_edits(es, spec, ops) == ([symbol("bread_bakery")], 17.0)


def test_case_penalty_five():
    es = build_edit_system(parse_rules("sub b -> k penalty 3\nsub b -> j penalty 5\ndel e penalty 2"))
    spec = [symbol("b"), symbol("e")]
    env, total = apply_edits(es, spec, [EditOp(spec[0], symbol("k"), 3.0), EditOp(spec[1], None, 2.0)])
    assert env == [symbol("k")] and total == 5


def test_invalid_runs():
    es = build_edit_system(EXAMPLE_RULES)
    spec = [symbol("bread_s")]
    with pytest.raises(InvalidEditRun):  # wrong weight
        apply_edits(es, spec, [EditOp(spec[0], symbol("bread_bakery"), 4.0)])
    with pytest.raises(InvalidEditRun):  # does not consume the whole word
        apply_edits(es, spec + spec, [EditOp(spec[0], spec[0], 0.0)])
    with pytest.raises(InvalidEditRun):  # consumes a different symbol
        apply_edits(es, spec, [EditOp(symbol("x"), symbol("x"), 0.0)])


@given(st.lists(symbols, max_size=5), st.data())
def test_weights_come_from_rules_and_length_shrinks(w, data):
    rules = [substitute("a", "c", 2), delete("b", 3)]
    es = build_edit_system(rules)
    ops = []
    for s in w:
        choices = [EditOp(s, s, 0.0)]
        for e in es.edits[0]:
            out = e.apply(s)
            if out is not False:
                choices.append(EditOp(s, out, e.weight))
        ops.append(data.draw(st.sampled_from(choices)))
    env, total = apply_edits(es, w, ops)
    assert len(env) <= len(w)
    assert all(op.weight in (0.0, 2.0, 3.0) for op in ops)
    assert total == sum(op.weight for op in ops)


def test_explicit_system(tmp_path):
    doc = {
        "states": ["s", "t"], "initial": "s", "accepting": ["s", "t"],
        "edits": [
            {"from": "s", "to": "t", "in": ["a"], "out": ["b"], "w": 2},
            {"from": "t", "to": "t", "in": "eps", "out": ["c"], "w": 1},
        ],
    }
    p = tmp_path / "e.json"
    p.write_text(json.dumps(doc))
    es = load_edit_system(p)
    assert es.n_states == 2
    env, total = apply_edits(es, [symbol("a")], [EditOp(symbol("a"), symbol("b"), 2.0),
                                                 EditOp(None, symbol("c"), 1.0)])
    assert env == [symbol("b"), symbol("c")] and total == 3.0
    doc["edits"][0]["w"] = -1
    with pytest.raises(NegativeWeightError):
        load_edit_system(doc)
    doc["edits"][0].update(w=1, **{"in": "eps", "out": "eps"})
    with pytest.raises(GraphParseError):
        load_edit_system(doc)


def test_edit_op_json():
    op = EditOp(symbol("a"), None, 2.0)
    assert EditOp.from_json(op.to_json()) == op
    with pytest.raises(ValueError):
        EditOp(None, None, 0.0)
