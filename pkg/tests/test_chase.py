import random

from elcq import kb as K
from elcq.answer import certain_answers, prepare
from elcq.chase import Fn, chase, chase_key, oracle_answers, serialize_instance
from elcq.kb_text import parse_query
from elcq.translate import Atom, RuleBase, build_xi, concept, role
from randkb import random_kb, random_query


def test_ex1_truncated(running_kb):
    inst = chase(build_xi(running_kb), depth_limit=3)
    f = Fn("S", "C", "A", "a")
    assert Atom(role("S"), ("a", f)) in inst.facts
    assert Atom(concept("C"), (f,)) in inst.facts
    assert inst.truncated and not inst.saturated
    assert inst.depth_reached == 3


def test_nominal_merge():
    kb = K.KB.of([K.Nominal("G", "a"), K.ExistsSup("F", "T", "G")],
                 [K.ConceptAssertion("F", "c")])
    inst = chase(build_xi(kb))
    f = Fn("T", "G", "F", "c")
    assert inst.norm(f) == "a"
    assert Atom(role("T"), ("c", "a")) in inst.facts
    assert not any(f in a.args for a in inst.facts)
    assert inst.saturated


def test_empty_rule_base():
    fact = Atom(concept("A"), ("a",))
    inst = chase(RuleBase((), frozenset({fact})))
    assert inst.facts == {fact} and inst.saturated and inst.depth_reached == 0
    assert serialize_instance(inst) == "A(a)\n"


def test_term_order():
    f = Fn("R", "A", "B", "a")
    assert chase_key("z") < chase_key(f) < chase_key(Fn("R", "A", "B", f))
    assert str(f) == "f[R,A,B](a)"


def test_oracle_on_fork_query(running_kb, fork_q):
    res = oracle_answers(build_xi(running_kb), fork_q, depth_limit=4)
    assert ("a", "b") in res.answers
    assert res.complete is False


def test_unmatched_query(running_kb):
    answers, complete = oracle_answers(build_xi(running_kb), parse_query("q(?x) :- Nope(?x)."),
                                       depth_limit=2)
    assert answers == frozenset() and not complete


def test_monotone_in_depth(running_kb, fork_q, split_q):
    xi = build_xi(running_kb)
    for q in (fork_q, split_q, parse_query("q(?x, ?y) :- R(?x, ?y).")):
        prev = frozenset()
        for d in range(1, 5):
            cur = oracle_answers(xi, q, depth_limit=d).answers
            assert prev <= cur
            prev = cur


def test_no_existentials_matches_materialisation():
    rng = random.Random(5)
    for _ in range(40):
        kb = random_kb(rng)
        kb = K.KB.of([ax for ax in kb.tbox if not isinstance(ax, K.ExistsSup)], kb.abox)
        inst = chase(build_xi(kb))
        store = prepare(kb)
        if inst.unsatisfiable:
            continue
        assert inst.saturated and inst.depth_reached == 0
        for a in inst.facts:
            if a.pred.kind in "CR":
                assert store.holds(a)


def test_saturating_kbs_agree_with_engine():
    rng = random.Random(6)
    for _ in range(40):
        kb = random_kb(rng)
        xi = build_xi(kb)
        inst = chase(xi)
        assert inst.saturated
        store = prepare(kb)
        for _ in range(3):
            q = random_query(rng, kb)
            res = oracle_answers(xi, q, instance=inst)
            got = certain_answers(None, q, store=store)
            if res.unsatisfiable:
                assert got.unsatisfiable
            else:
                assert res.complete and res.answers == got.tuples()


def _subterms(t):
    while True:
        yield t
        if not isinstance(t, Fn):
            return
        t = t.arg


def test_merged_terms_never_reappear(running_kb):
    rng = random.Random(7)
    kbs = [running_kb] + [random_kb(rng) for _ in range(60)]
    for kb in kbs:
        inst = chase(build_xi(kb), depth_limit=4)
        for a in inst.facts:
            for u in a.args:
                assert not any(w in inst.leadsto for w in _subterms(u))
