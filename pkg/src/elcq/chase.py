"""Bounded Skolem chase with merging and pruning; a slow ground-truth oracle."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from . import kb as K
from .query import CQ, Var
from .translate import Atom, RuleBase, Rule, concept, role

DEFAULT_DEPTH_LIMIT = 6
DEFAULT_FACT_LIMIT = 1_000_000


@dataclass(frozen=True)
class Fn:
    """Skolem term f[R,A,A1](arg) introduced by the rule for A1 ⊑ ∃R.A."""
    role: str
    filler: str
    sub: str
    arg: object

    @cached_property
    def depth(self) -> int:
        return 1 + depth(self.arg)

    def __str__(self):
        return f"f[{self.role},{self.filler},{self.sub}]({self.arg})"


def depth(t) -> int:
    return t.depth if isinstance(t, Fn) else 0


def chase_key(t):
    """Named terms first (by name), then functional terms by depth and rendering."""
    return (0, 0, t) if not isinstance(t, Fn) else (1, t.depth, str(t))


def has_proper_subterm(t, w) -> bool:
    while isinstance(t, Fn):
        t = t.arg
        if t == w:
            return True
    return False


@dataclass
class ChaseInstance:
    facts: set = field(default_factory=set)
    leadsto: dict = field(default_factory=dict)  # w -> w'
    saturated: bool = False
    truncated: bool = False
    depth_reached: int = 0
    rounds: int = 0

    def norm(self, t):
        while t in self.leadsto:
            t = self.leadsto[t]
        return t

    @property
    def unsatisfiable(self) -> bool:
        return any(a.pred == concept(K.BOT) for a in self.facts)

    def index(self) -> dict:
        idx = defaultdict(set)
        for a in self.facts:
            idx[a.pred].add(a.args)
        return idx


def _join(idx, atoms, binding):
    if not atoms:
        yield binding
        return
    atom, rest = atoms[0], atoms[1:]
    for args in idx.get(atom.pred, ()):
        b = binding
        for p, a in zip(atom.args, args):
            if isinstance(p, Var):
                if p in b:
                    if b[p] != a:
                        break
                else:
                    b = {**b, p: a}
            elif p != a:
                break
        else:
            yield from _join(idx, rest, b)


def _ground(t, binding, inst):
    return binding[t] if isinstance(t, Var) else inst.norm(t)


def _merge(inst: ChaseInstance, s, t):
    s, t = inst.norm(s), inst.norm(t)
    if s == t:
        return False
    keep, drop = sorted((s, t), key=chase_key)
    inst.leadsto[drop] = keep
    new = set()
    for a in inst.facts:
        if any(has_proper_subterm(u, drop) for u in a.args):
            continue  # pruned
        new.add(Atom(a.pred, tuple(keep if u == drop else u for u in a.args)))
    inst.facts = new
    return True


def chase(xi: RuleBase, depth_limit: int = DEFAULT_DEPTH_LIMIT,
          fact_limit: int = DEFAULT_FACT_LIMIT) -> ChaseInstance:
    """Apply all rules in rounds until nothing changes or a limit trips."""
    inst = ChaseInstance(facts=set(xi.facts))
    rules = list(xi.rules)
    while True:
        inst.rounds += 1
        idx = inst.index()
        new, eqs = set(), []
        for rule in rules:
            for b in _join(idx, sorted(rule.body, key=lambda a: len(idx.get(a.pred, ()))), {}):
                if rule.eq is not None:
                    s, t = (_ground(u, b, inst) for u in rule.eq)
                    if s != t:
                        eqs.append((s, t))
                    continue
                if rule.exist is not None:
                    fn = _skolem(rule, b)
                    if fn.depth > depth_limit:
                        inst.truncated = True
                        continue
                    b = {**b, rule.exist: inst.norm(fn)}
                for h in rule.head:
                    at = Atom(h.pred, tuple(_ground(u, b, inst) for u in h.args))
                    if at not in inst.facts:
                        new.add(at)
        changed = bool(new)
        inst.facts |= new
        for s, t in eqs:
            changed |= _merge(inst, s, t)
        if len(inst.facts) > fact_limit:
            inst.truncated = True
            break
        if not changed:
            break
    inst.saturated = not inst.truncated
    inst.depth_reached = max((depth(u) for a in inst.facts for u in a.args), default=0)
    return inst


def _skolem(rule: Rule, b) -> Fn:
    (sub_atom,) = rule.body
    r_atom = next(h for h in rule.head if h.pred.kind == "R")
    c_atom = next(h for h in rule.head if h.pred.kind == "C")
    return Fn(r_atom.pred.name, c_atom.pred.name, sub_atom.pred.name, b[sub_atom.args[0]])


@dataclass
class OracleResult:
    answers: frozenset
    complete: bool
    unsatisfiable: bool = False
    instance: Optional[ChaseInstance] = field(default=None, repr=False)

    def __iter__(self):
        return iter((self.answers, self.complete))


def _named_class(inst: ChaseInstance, a) -> list:
    return sorted([a] + [w for w in inst.leadsto if isinstance(w, str) and inst.norm(w) == a])


def oracle_answers(xi: RuleBase, q: CQ, depth_limit: int = DEFAULT_DEPTH_LIMIT,
                   fact_limit: int = DEFAULT_FACT_LIMIT,
                   instance: Optional[ChaseInstance] = None) -> OracleResult:
    """Answers of q over the chase, restricted to named individuals.

    Sound on a truncated chase but complete only when the chase saturated.
    """
    inst = instance or chase(xi, depth_limit, fact_limit)
    if inst.unsatisfiable:
        return OracleResult(frozenset(), inst.saturated, True, inst)
    idx = inst.index()
    atoms = [Atom(concept(a.pred) if len(a.args) == 1 else role(a.pred),
                  tuple(u if isinstance(u, Var) else inst.norm(u) for u in a.args))
             for a in q.atoms]
    atoms.sort(key=lambda a: (len(idx.get(a.pred, ())), str(a)))
    found = set()
    for b in _join(idx, atoms, {}):
        pi = tuple(b[v] for v in q.answer_vars)
        if all(isinstance(a, str) for a in pi):
            found.add(pi)
    out = set()
    for pi in found:
        combos = [()]
        for a in pi:
            combos = [c + (m,) for c in combos for m in _named_class(inst, a)]
        out.update(combos)
    return OracleResult(frozenset(out), inst.saturated, False, inst)


def serialize_instance(inst: ChaseInstance) -> str:
    lines = [f"{a.pred}({', '.join(map(str, a.args))})" for a in inst.facts]
    lines += [f"eq {w} {inst.norm(w)}" for w in inst.leadsto]
    return "".join(l + "\n" for l in sorted(lines))
