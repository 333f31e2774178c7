import random

import pytest

from elcq import kb as K
from elcq.answer import entails, prepare
from elcq.materialize import is_unsatisfiable
from elcq.arborescent import (DialectError, ShapeError, classify_query,
                              entails_arborescent)
from elcq.hardgen import CNF, gen_acyclic_hard, gen_refl_hard, gen_trans_hard
from elcq.kb_text import parse_query
from elcq.query import Var
from randkb import random_arborescent, random_kb

PHI = CNF(2, ((1, -2, 2), (-1, -1, 2)))


def simple_store():
    return prepare(K.KB.of([K.ExistsSup("A", "R", "B")], [K.ConceptAssertion("A", "a")]))


def test_shapes_of_generated_queries():
    assert classify_query(gen_trans_hard(PHI).query).kind == "arborescent"
    assert classify_query(gen_refl_hard(PHI).query).kind == "arborescent"
    shape = classify_query(gen_acyclic_hard(PHI).query)
    assert shape.kind == "acyclic" and shape.acyclic


def test_shape_examples():
    assert classify_query(parse_query("q() :- R(?x1, ?y), R(?x2, ?y).")).kind == "arborescent"
    assert classify_query(parse_query("q() :- R(?y, ?x1), R(?y, ?x2).")).kind == "acyclic"
    # parallel and antiparallel edges collapse to one undirected edge
    assert classify_query(parse_query("q() :- R(?x, ?y), S(?y, ?x).")).kind == "acyclic"
    assert classify_query(parse_query("q() :- R(?x, ?y), S(?x, ?y).")).kind == "arborescent"
    assert classify_query(parse_query("q() :- R(?x, ?y), R(?y, ?z), R(?z, ?x).")).kind == "cyclic"
    assert classify_query(parse_query("q() :- R(?x, ?x).")).kind == "cyclic"
    assert classify_query(parse_query("q() :- R(a, ?y).")).kind == "acyclic"
    assert classify_query(parse_query("q() :- A(?x), B(?y).")).kind == "acyclic"


def test_ex3_query_is_acyclic(fork_q):
    assert classify_query(fork_q).acyclic


def test_single_variable_is_arborescent():
    shape = classify_query(parse_query("q() :- A(?x)."))
    assert shape.kind == "arborescent" and shape.root == Var("x")


def test_entails_examples():
    store = simple_store()
    fam = []
    assert entails_arborescent(store, parse_query("q() :- R(?y, ?x), A(?y), B(?x)."), family=fam)
    assert fam[0].root == Var("x")
    assert not entails_arborescent(store, parse_query("q() :- R(?y, ?x), A(?y), C(?x)."))


def test_rejections(kb_store):
    with pytest.raises(ShapeError):
        entails_arborescent(simple_store(), parse_query("q() :- R(?y, ?x1), R(?y, ?x2)."))
    inst = gen_trans_hard(PHI)
    with pytest.raises(DialectError):
        entails_arborescent(prepare(inst.kb), inst.query)
    inst = gen_refl_hard(PHI)
    with pytest.raises(DialectError):
        entails_arborescent(prepare(inst.kb), inst.query)


def test_unsatisfiable_kb_is_rejected():
    kb = K.KB.of([K.SubClass("A", K.BOT)], [K.ConceptAssertion("A", "a")])
    with pytest.raises(ValueError):
        entails_arborescent(prepare(kb), parse_query("q() :- A(?x)."))


def _check_family(q, fam):
    n_vars = len(q.vars)
    depth = max(lvl for _, lvl in fam.members) + 1
    assert len(fam.members) <= depth * (n_vars + 1)
    levels = [lvl for _, lvl in fam.members]
    assert levels == sorted(levels)
    assert (frozenset({fam.root}), 0) in fam.A
    for (V, lvl), A in fam.A.items():
        if fam.pred(V):
            # every non-maximal set is computed from its predecessors one level up
            assert (fam.pred(V), lvl + 1) in fam.A


def test_agrees_with_full_pipeline():
    rng = random.Random(11)
    for _ in range(60):
        kb = random_kb(rng, elho=True)
        store = prepare(kb)
        if is_unsatisfiable(store):
            continue
        q = random_arborescent(rng, kb)
        fam = []
        assert entails_arborescent(store, q, family=fam) == entails(None, q, store=store)
        _check_family(q, fam[0])
