from hypothesis import given, settings

from elcq import kb as K
from strategies import axioms, kbs


def test_ex1_hierarchy(running_kb):
    h = running_kb.hierarchy
    assert h.is_sub("T", "R") and h.is_sub("T", "T") and h.is_sub("R", "R")
    assert not h.is_sub("R", "T")


def test_reflexive_for_mentioned_role():
    h = K.role_hierarchy([K.ExistsSup("A", "R", "B")])
    assert h.supers("R") == {"R"}


def test_transitive_closure_of_subroles():
    h = K.role_hierarchy([K.SubRole("S", "R"), K.SubRole("R", "P")])
    assert h.is_sub("S", "P")


def test_simplicity_on_ex1(running_kb):
    h = running_kb.hierarchy
    assert h.is_simple("S")
    assert not h.is_simple("T")
    assert not h.is_simple("R")


def test_unrelated_role_is_simple():
    h = K.role_hierarchy([K.Transitive("P"), K.ExistsSup("A", "Q", "B")])
    assert K.is_simple("Q", h)


def test_ex1_is_valid(running_kb):
    assert K.validate_kb(running_kb) == []
    assert len(running_kb.tbox) == 12 and len(running_kb.abox) == 2


def test_self_on_non_simple_role_is_reported():
    kb = K.KB.of([K.Transitive("P"), K.SelfSup("A", "P")])
    (d,) = K.validate_kb(kb)
    assert d.code == "non-simple-self"
    assert "non-simple role in self axiom" in d.message


def test_bot_on_left_hand_side_is_reported():
    kb = K.KB.of([K.SubClass(K.BOT, "A")])
    assert [d.code for d in K.validate_kb(kb)] == ["bot-position"]
    assert K.validate_kb(K.KB.of([K.SubClass("A", K.BOT)])) == []


def test_undeclared_abox_symbols_are_accepted():
    kb = K.KB.of([], [K.ConceptAssertion("A", "a")])
    assert K.validate_kb(kb) == []
    assert kb.signature.concepts == {"A"} and kb.signature.individuals == {"a"}


def test_bot_and_top_in_abox_are_accepted():
    kb = K.KB.of([], [K.ConceptAssertion(K.BOT, "a"), K.ConceptAssertion(K.TOP, "b")])
    assert K.validate_kb(kb) == []
    assert K.TOP not in kb.signature.concepts


@settings(max_examples=200, deadline=None)
@given(kbs(axioms))
def test_hierarchy_is_a_preorder(kb):
    h = kb.hierarchy
    rs = sorted(kb.signature.roles)
    for r in rs:
        assert h.is_sub(r, r)
    for s in rs:
        for r in rs:
            for p in rs:
                if h.is_sub(s, r) and h.is_sub(r, p):
                    assert h.is_sub(s, p)


@settings(max_examples=200, deadline=None)
@given(kbs(axioms))
def test_simplicity_is_antitone(kb):
    h = kb.hierarchy
    rs = sorted(kb.signature.roles)
    for s in rs:
        for r in rs:
            if h.is_sub(s, r) and h.is_simple(r):
                assert h.is_simple(s)
