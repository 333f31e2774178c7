"""Compile a KB into the existential rule base and into its datalog approximation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from . import kb as K
from .query import Var


class Pred(NamedTuple):
    kind: str  # "C" concept, "R" role, "D" direct edge, "S" Self concept, "I" ind
    name: str

    def __str__(self):
        return {"C": self.name, "R": self.name, "D": "dir" + self.name,
                "S": "self" + self.name, "I": "ind"}[self.kind]

    @property
    def arity(self) -> int:
        return 2 if self.kind in "RD" else 1


IND = Pred("I", "ind")


def concept(name):
    return Pred("C", name)


def role(name):
    return Pred("R", name)


def direct(name):
    return Pred("D", name)


def self_(name):
    return Pred("S", name)


@dataclass(frozen=True, order=True)
class Aux:
    """The auxiliary individual standing for all anonymous elements of type (role, concept)."""
    role: str
    concept: str

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("aux", self.role, self.concept)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return f"aux:{self.role}:{self.concept}"


def term_key(t):
    """Total order on individuals: named by name, then every aux by (role, concept)."""
    if isinstance(t, Aux):
        return (1, t.role, t.concept)
    return (0, t, "")


class Atom(NamedTuple):
    pred: Pred
    args: tuple

    def __str__(self):
        return f"{self.pred}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Rule:
    body: tuple
    head: tuple = ()
    eq: Optional[tuple] = None      # (s, t) for equality rules
    exist: Optional[Var] = None     # existential head variable (rule base only)

    @property
    def is_datalog(self) -> bool:
        return self.exist is None

    def __str__(self):
        body = " ∧ ".join(map(str, self.body))
        if self.eq is not None:
            return f"{body} → {self.eq[0]} ≈ {self.eq[1]}"
        head = " ∧ ".join(map(str, self.head))
        if self.exist is not None:
            head = f"∃{self.exist}. {head}"
        return f"{body} → {head}"


@dataclass(frozen=True)
class RuleBase:
    rules: tuple
    facts: frozenset


@dataclass(frozen=True)
class DatalogProgram:
    rules: tuple
    facts: frozenset
    aux_individuals: frozenset
    kb: Optional[K.KB] = None


x, y, z = Var("x"), Var("y"), Var("z")


def _c(name, t):
    return Atom(concept(name), (t,))


def _r(name, s, t):
    return Atom(role(name), (s, t))


def axiom_rules(ax) -> list[Rule]:
    """Rule translation of one axiom (type 7 as an existential rule)."""
    if isinstance(ax, K.SubClass):
        return [Rule((_c(ax.sub, x),), (_c(ax.sup, x),))]
    if isinstance(ax, K.Nominal):
        return [Rule((_c(ax.sub, x),), eq=(x, ax.individual))]
    if isinstance(ax, K.Conjunction):
        return [Rule((_c(ax.left, x), _c(ax.right, x)), (_c(ax.sup, x),))]
    if isinstance(ax, K.ExistsSub):
        return [Rule((_r(ax.role, x, y), _c(ax.filler, y)), (_c(ax.sup, x),))]
    if isinstance(ax, K.SubRole):
        return [Rule((_r(ax.sub, x, y),), (_r(ax.sup, x, y),)),
                Rule((Atom(self_(ax.sub), (x,)),), (Atom(self_(ax.sup), (x,)),))]
    if isinstance(ax, K.Range):
        return [Rule((_r(ax.role, x, y),), (_c(ax.concept, y),))]
    if isinstance(ax, K.ExistsSup):
        return [Rule((_c(ax.sub, x),), (_r(ax.role, x, z), _c(ax.filler, z)), exist=z)]
    if isinstance(ax, K.Transitive):
        return [Rule((_r(ax.role, x, y), _r(ax.role, y, z)), (_r(ax.role, x, z),))]
    if isinstance(ax, K.Reflexive):
        return [Rule((_c(K.TOP, x),), (_r(ax.role, x, x), Atom(self_(ax.role), (x,))))]
    if isinstance(ax, K.SelfSup):
        return [Rule((_c(ax.sub, x),), (_r(ax.role, x, x), Atom(self_(ax.role), (x,))))]
    if isinstance(ax, K.SelfSub):
        return [Rule((Atom(self_(ax.role), (x,)),), (_c(ax.sup, x),))]
    raise TypeError(f"not an axiom: {ax!r}")


def abox_atoms(kb: K.KB) -> set[Atom]:
    out = set()
    for at in kb.abox:
        if isinstance(at, K.ConceptAssertion):
            out.add(_c(at.concept, at.individual))
        else:
            out.add(_r(at.role, at.subject, at.object))
    return out


def closure(kb: K.KB) -> tuple[list[Rule], set[Atom]]:
    """close(K): ind facts, ⊤-propagation for concepts and roles, Self for named loops."""
    sig = kb.signature
    facts = {Atom(IND, (a,)) for a in sig.individuals}
    rules = [Rule((_c(c, x),), (_c(K.TOP, x),)) for c in sorted(sig.concepts)]
    for r in sorted(sig.roles):
        rules.append(Rule((Atom(IND, (x,)), _r(r, x, x)), (Atom(self_(r), (x,)),)))
        rules.append(Rule((_r(r, x, y),), (_c(K.TOP, x), _c(K.TOP, y))))
    return rules, facts


def _check(kb: K.KB):
    diags = K.validate_kb(kb)
    if diags:
        raise K.ValidationFailed(diags)


def build_xi(kb: K.KB) -> RuleBase:
    _check(kb)
    rules = [r for ax in kb.sorted_tbox() for r in axiom_rules(ax)]
    close_rules, close_facts = closure(kb)
    return RuleBase(tuple(rules + close_rules), frozenset(close_facts | abox_atoms(kb)))


def build_datalog(kb: K.KB) -> DatalogProgram:
    _check(kb)
    rules, auxes = [], set()
    for ax in kb.sorted_tbox():
        if isinstance(ax, K.ExistsSup):
            o = Aux(ax.role, ax.filler)
            auxes.add(o)
            rules.append(Rule((_c(ax.sub, x),),
                              (_r(ax.role, x, o), Atom(direct(ax.role), (x, o)), _c(ax.filler, o))))
            continue
        rules.extend(axiom_rules(ax))
        if isinstance(ax, K.SubRole):
            rules.append(Rule((Atom(direct(ax.sub), (x, y)),), (Atom(direct(ax.sup), (x, y)),)))
    close_rules, close_facts = closure(kb)
    return DatalogProgram(tuple(rules + close_rules), frozenset(close_facts | abox_atoms(kb)),
                          frozenset(auxes), kb)
