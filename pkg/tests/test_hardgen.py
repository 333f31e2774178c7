import random

import pytest

from elcq import kb as K
from elcq.answer import candidate_answers, entails, prepare
from elcq.arborescent import ShapeError, classify_query
from elcq.hardgen import (CNF, GENERATORS, brute_sat, exhaustive_suite, gen_acyclic_hard,
                          gen_filter_hard, gen_refl_hard, gen_trans_hard, pad3, parse_dimacs,
                          random_formula)
from elcq.kb_text import parse_kb, parse_query, print_query, serialize_kb

SAT1 = CNF(1, ((1,),))
UNSAT1 = CNF(1, ((1,), (-1,)))


def test_parse_dimacs():
    phi = parse_dimacs("c comment\np cnf 3 2\n1 -2 0\n3\n2 0\n")
    assert phi == CNF(3, ((1, -2), (3, 2)))
    assert parse_dimacs("1 -1 0").n == 1
    assert parse_dimacs(phi.to_dimacs()) == phi
    with pytest.raises(ValueError):
        parse_dimacs("p cnf 1 1\n2 0\n")
    with pytest.raises(ValueError):
        parse_dimacs("p dnf 1 1\n")


def test_brute_sat():
    assert brute_sat(SAT1)
    assert not brute_sat(UNSAT1)
    assert not brute_sat(CNF(1, ((),)))
    assert brute_sat(CNF(0, ()))


def test_filter_needs_3cnf():
    with pytest.raises(ShapeError):
        gen_filter_hard(SAT1)
    assert pad3(SAT1).clauses == ((1, 1, 1),)
    with pytest.raises(ShapeError):
        pad3(CNF(4, ((1, 2, 3, 4),)))


@pytest.mark.parametrize("kind", sorted(GENERATORS))
def test_small_examples(kind):
    assert entails(GENERATORS[kind](SAT1).kb, GENERATORS[kind](SAT1).query)
    assert not entails(GENERATORS[kind](UNSAT1).kb, GENERATORS[kind](UNSAT1).query)


def test_filter_examples():
    sat = CNF(1, ((1, 1, 1),))
    unsat = CNF(1, ((1, 1, 1), (-1, -1, -1)))
    for phi, expected in ((sat, True), (unsat, False)):
        inst = gen_filter_hard(phi)
        assert entails(inst.kb, inst.query) is expected


def test_filter_candidate_is_unique():
    for phi in exhaustive_suite(2, 2)[:40]:
        inst = gen_filter_hard(phi)
        cands = list(candidate_answers(inst.query, prepare(inst.kb)))
        assert cands == [inst.expected_tau]


def test_query_shapes():
    phi = CNF(2, ((1, 2, -1), (-2, -2, -2)))
    assert classify_query(gen_acyclic_hard(phi).query).kind == "acyclic"
    assert classify_query(gen_trans_hard(phi).query).kind == "arborescent"
    assert classify_query(gen_refl_hard(phi).query).kind == "arborescent"


def _types(kb):
    return {type(ax).__name__ for ax in kb.tbox}


def test_axiom_discipline():
    phi = CNF(2, ((1, 2, -1), (-2, -2, -2)))
    trans, refl = gen_trans_hard(phi).kb, gen_refl_hard(phi).kb
    assert _types(trans) == {"SubClass", "ExistsSup", "Transitive"}
    assert sum(isinstance(ax, K.Transitive) for ax in trans.tbox) == 1
    assert _types(refl) == {"SubClass", "ExistsSup", "Reflexive"}
    assert sum(isinstance(ax, K.Reflexive) for ax in refl.tbox) == 1
    non_elho = (K.Transitive, K.Reflexive, K.SelfSup, K.SelfSub)
    assert not any(isinstance(ax, non_elho) for ax in gen_acyclic_hard(phi).kb.tbox)


def test_outputs_validate_and_round_trip():
    rng = random.Random(3)
    for _ in range(10):
        phi = random_formula(rng)
        for kind, gen in GENERATORS.items():
            inst = gen(phi)
            assert K.validate_kb(inst.kb) == []
            assert parse_kb(serialize_kb(inst.kb)) == inst.kb
            assert parse_query(print_query(inst.query)).atoms == inst.query.atoms


def test_deterministic():
    phi = CNF(3, ((1, -2, 3), (-1, 2, 2)))
    for gen in GENERATORS.values():
        assert serialize_kb(gen(phi).kb) == serialize_kb(gen(phi).kb)


def test_exhaustive_suite_is_deduplicated():
    suite = exhaustive_suite(2, 2)
    assert all(phi.three_cnf for phi in suite)
    assert len(set(suite)) == len(suite)
    # (v1) and (¬v1) are the same formula up to renaming
    assert sum(phi.clauses in (((1, 1, 1),), ((-1, -1, -1),)) for phi in suite) == 1


@pytest.mark.parametrize("kind", sorted(GENERATORS))
def test_equivalence_on_small_formulas(kind):
    for phi in exhaustive_suite(2, 2):
        inst = GENERATORS[kind](phi)
        assert entails(inst.kb, inst.query) == brute_sat(phi)
