from hypothesis import given, settings

import pytest

from elcq import kb as K
from elcq.translate import (IND, Atom, Aux, Rule, build_datalog, build_xi, concept, direct, role,
                            self_, term_key)
from elcq.query import Var
from strategies import axioms, kbs

x, y, z = Var("x"), Var("y"), Var("z")


def rules_of(program):
    return {str(r) for r in program.rules}


def test_self_axiom_rule(running_kb):
    expected = Rule((Atom(concept("C"), (x,)),),
                    (Atom(role("S"), (x, x)), Atom(self_("S"), (x,))))
    assert str(expected) in rules_of(build_xi(running_kb))


def test_nominal_axiom_rule(running_kb):
    expected = Rule((Atom(concept("G"), (x,)),), (), eq=(x, "a"))
    assert str(expected) in rules_of(build_xi(running_kb))


def test_closure_for_bare_role():
    kb = K.KB.of([], [K.RoleAssertion("R", "a", "b")])
    rules = rules_of(build_xi(kb))
    assert "R(?x, ?y) → Top(?x) ∧ Top(?y)" in rules
    assert "ind(?x) ∧ R(?x, ?x) → selfR(?x)" in rules
    facts = build_xi(kb).facts
    assert Atom(IND, ("a",)) in facts and Atom(role("R"), ("a", "b")) in facts


def test_aux_rule(running_kb):
    o = Aux("T", "F")
    expected = Rule((Atom(concept("B"), (x,)),),
                    (Atom(role("T"), (x, o)), Atom(direct("T"), (x, o)), Atom(concept("F"), (o,))))
    prog = build_datalog(running_kb)
    assert str(expected) in rules_of(prog)
    assert o in prog.aux_individuals


def test_subrole_rules(running_kb):
    rules = rules_of(build_datalog(running_kb))
    assert "T(?x, ?y) → R(?x, ?y)" in rules
    assert "selfT(?x) → selfR(?x)" in rules
    assert "dirT(?x, ?y) → dirR(?x, ?y)" in rules


def test_empty_tbox():
    kb = K.KB.of([], [K.ConceptAssertion("A", "a")])
    prog = build_datalog(kb)
    assert prog.aux_individuals == frozenset()
    assert all(r.is_datalog for r in prog.rules)


def test_aux_shared_between_equal_axioms():
    kb = K.KB.of([K.ExistsSup("A", "R", "B"), K.ExistsSup("C", "R", "B")])
    assert build_datalog(kb).aux_individuals == {Aux("R", "B")}


def test_invalid_kb_rejected():
    kb = K.KB.of([K.Transitive("P"), K.SelfSup("A", "P")])
    with pytest.raises(K.ValidationFailed):
        build_xi(kb)


def test_aux_after_named():
    assert term_key("zzz") < term_key(Aux("A", "A"))
    assert term_key(Aux("R", "A")) < term_key(Aux("R", "B"))


@settings(max_examples=200, deadline=None)
@given(kbs(axioms))
def test_rule_count_is_linear(kb):
    sig = kb.signature
    bound = 3 * len(kb.tbox) + 3 * (len(sig.concepts) + len(sig.roles) + len(sig.individuals))
    bound += len(kb.abox)
    assert len(build_datalog(kb).rules) <= bound
    assert len(build_xi(kb).rules) <= bound


@settings(max_examples=200, deadline=None)
@given(kbs(axioms))
def test_xi_and_datalog_differ_only_on_existentials(kb):
    xi, dk = rules_of(build_xi(kb)), rules_of(build_datalog(kb))
    only_xi = xi - dk
    only_dk = dk - xi
    assert all("∃" in r for r in only_xi)
    assert len(only_xi) == sum(isinstance(ax, K.ExistsSup) for ax in kb.tbox)
    assert all("aux:" in r or r.startswith("dir") for r in only_dk)


@settings(max_examples=200, deadline=None)
@given(kbs(axioms))
def test_datalog_predicates(kb):
    sig = kb.signature
    allowed = set(sig.concepts) | {K.TOP, K.BOT}
    for r in build_datalog(kb).rules:
        for a in r.body + r.head:
            p = a.pred
            if p.kind == "C":
                assert p.name in allowed
            elif p.kind in "RDS":
                assert p.name in sig.roles
            else:
                assert p.kind == "I"
