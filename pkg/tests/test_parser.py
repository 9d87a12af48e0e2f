from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import FIXTURES, load
from commonground.core import Background, DefiniteClause, HornExpression, clause
from commonground.parser import (
    E_BAD_AGENT,
    E_BAD_DISJOINT,
    E_NO_EXCLUDENT,
    E_SYNTAX,
    E_TRIVIAL_RULE,
    W_DUPLICATE_RULE,
    ParseError,
    RuleFile,
    parse,
    report,
    serialize,
)


def _codes(text: str, strict: bool = False) -> list[str]:
    with pytest.raises(ParseError) as info:
        parse(text, strict=strict)
    return [d.code for d in info.value.diagnostics]


def test_bang_declares_a_complement():
    rf = parse("agent 1 { p & !q -> !s }\ndisjoint p r")
    c = rf.inputs[0].ordered[0]
    assert c == clause("p & not_q -> not_s")
    assert rf.background.excludents("not_q") == {"q"}
    assert rf.background.excludents("p") == {"r"}
    assert rf.complements == {"q", "s"}


def test_agents_are_sorted_and_carry_provenance():
    rf = parse("disjoint p q\nagent 2 { q -> p }\nagent 1 { p -> q }")
    assert [aid for aid, _ in rf.stakeholders] == [1, 2]
    assert rf.union().sources(clause("q -> p")) == {2}


def test_semicolons_separate_rules_on_one_line():
    rf = parse("disjoint p q; agent 1 { p -> q; q -> p }")
    assert len(rf.union()) == 2


def test_empty_antecedent():
    rf = parse("disjoint p q\nagent 1 { -> p }")
    assert rf.union().ordered[0] == DefiniteClause([], "p")


def test_empty_file():
    rf = load("empty")
    assert rf.stakeholders == () and rf.background == Background()


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as info:
        parse("disjoint p q\nagent 1 {\n  p -> -> q\n}")
    d = info.value.diagnostics[0]
    assert (d.code, d.line, d.col) == (E_SYNTAX, 3, 8)
    assert d.render("x.rules").startswith("x.rules:3:8: error E_SYNTAX")


@pytest.mark.parametrize(
    "text",
    [
        "agent 1 { p -> q",
        "agent 1 { p q -> r }",
        "agent 1 { p -> }",
        "rules { p -> q }",
        "disjoint p q r",
        "agent 1 { p -> q } $",
    ],
)
def test_syntax_errors(text):
    assert E_SYNTAX in _codes(text)


def test_atom_without_excludent():
    codes = _codes("disjoint p q\nagent 1 { p & r -> q }")
    assert codes == [E_NO_EXCLUDENT]


def test_self_disjoint_atom():
    assert _codes("disjoint p p") == [E_BAD_DISJOINT]


@pytest.mark.parametrize(
    "text",
    [
        "disjoint p q\nagent 0 { p -> q }",
        "disjoint p q\nagent x { p -> q }",
        "disjoint p q\nagent 1 { p -> q }\nagent 1 { q -> p }",
        "disjoint p q\nagent 2 { p -> q }",
    ],
)
def test_bad_agent_ids(text):
    assert _codes(text) == [E_BAD_AGENT]


def test_trivial_rule_is_a_warning_unless_strict():
    text = "disjoint p q\nagent 1 { p & q -> q }"
    rf = parse(text)
    assert [d.code for d in rf.diagnostics] == [E_TRIVIAL_RULE]
    assert rf.diagnostics[0].severity == "warning"
    assert _codes(text, strict=True) == [E_TRIVIAL_RULE]


def test_duplicate_rule_is_kept_once():
    rf = parse("disjoint p q\nagent 1 { p -> q\n q -> p\n p & p -> q }")
    assert [d.code for d in rf.diagnostics] == [W_DUPLICATE_RULE]
    assert len(rf.union()) == 2


def test_inherited_background():
    base = Background([("policeCall", "parentsAlert")])
    rf = parse("agent 1 { illegal -> policeCall }\ndisjoint illegal legal", background=base)
    assert rf.background.excludents("policeCall") == {"parentsAlert"}
    assert "E_NO_EXCLUDENT" in _codes("agent 1 { illegal -> policeCall }\ndisjoint illegal legal")


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.rules")), ids=lambda p: p.stem)
def test_fixture_round_trip(path):
    rf = parse(path.read_text(encoding="utf-8"))
    again = parse(serialize(rf))
    assert again == rf
    assert serialize(again) == serialize(rf)


def test_serialized_form_is_canonical():
    rf = parse("disjoint !b b\nagent 1 { b & a -> !b }\ndisjoint a c")
    assert serialize(rf) == "disjoint a c\ndisjoint b !b\n\nagent 1 {\n  a & b -> !b\n}\n"


_BASE = ["p", "q", "r", "s"]


@st.composite
def _rule_files(draw):
    atoms = _BASE + ["not_" + a for a in _BASE]
    pairs = [(a, "not_" + a) for a in _BASE] + draw(
        st.lists(st.tuples(st.sampled_from(_BASE), st.sampled_from(_BASE)).filter(lambda t: t[0] != t[1]),
                 max_size=2)
    )
    n = draw(st.integers(0, 3))
    groups = []
    for i in range(1, n + 1):
        rules = draw(st.lists(
            st.builds(DefiniteClause, st.frozensets(st.sampled_from(atoms), max_size=3), st.sampled_from(atoms)),
            max_size=4,
        ))
        groups.append((i, HornExpression(rules, {c: {i} for c in rules})))
    return RuleFile(Background(pairs), tuple(groups))


@given(_rule_files())
@settings(max_examples=150, deadline=None)
def test_round_trip_property(rf):
    assert parse(serialize(rf)) == rf


def test_report_shapes():
    rf = load("police")
    out = report(rf)
    assert out["status"] == "ok"
    assert out["agents"][1] == {"id": 2, "rules": ["child & illegalActivity -> parentsAlert"]}
    assert ["adult", "child"] in out["disjoint"]
    err = report(None, [])
    assert err["status"] == "error" and err["agents"] == []


def test_random_garbage_never_crashes():
    rng = random.Random(7)
    alphabet = "pq!&->{} \n;#agent1disjoint"
    for _ in range(500):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 40)))
        try:
            parse(text)
        except ParseError as exc:
            assert exc.diagnostics
