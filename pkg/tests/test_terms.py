import pytest

from obdm import atom, const, dom, freeze_instance, freeze_term, instance, null_d, null_s, var
from obdm.terms import NullMinter, term_key


def test_term_kinds_are_distinct():
    assert const("a") != null_d("a") != null_s("a") != var("a")
    assert len({const("a"), null_d("a"), null_s("a"), var("a")}) == 4


def test_canonical_order():
    terms = [var("x"), null_s("s1"), null_d("d1"), const("a")]
    assert sorted(terms, key=term_key) == [const("a"), null_d("d1"), null_s("s1"), var("x")]


def test_natural_label_order():
    assert sorted([null_d("d10"), null_d("d2")], key=term_key) == [null_d("d2"), null_d("d10")]


def test_minter_prefixes_and_reservation():
    m = NullMinter(reserved={"d1", "s2"})
    assert m.fresh_d().label == "d2"
    assert m.fresh_d().label == "d3"
    assert m.fresh_s().label == "s1"
    assert m.fresh_s().label == "s3"


def test_dom_and_freeze():
    inst = instance([atom("R", null_d("d1"), const("a")), atom("P", null_s("s1"))])
    assert dom(inst) == {null_d("d1"), const("a"), null_s("s1")}
    frozen = freeze_instance(inst)
    assert dom(frozen) == {const("d1"), const("a"), const("s1")}
    assert freeze_term(const("a")) == const("a")
    assert freeze_term(null_d("d3")) == const("d3")


def test_instance_is_a_set():
    inst = instance([atom("P", const("a")), atom("P", const("a"))])
    assert len(inst) == 1
