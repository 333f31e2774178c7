"""Least-model computation for the datalog program, with equality by rewrite-on-merge."""
from __future__ import annotations

import time
from collections import defaultdict, deque
from dataclasses import dataclass

from . import kb as K
from .translate import IND, Atom, Aux, DatalogProgram, Pred, Rule, concept, term_key
from .query import Var

DEFAULT_FACT_CAP = 50_000_000


class ResourceLimit(RuntimeError):
    pass


@dataclass
class MaterializeStats:
    derived: int = 0
    merges: int = 0
    iterations: int = 0
    wall_ms: float = 0.0


class FactStore:
    """Saturated, equality-canonicalised facts of a datalog program.

    Every stored fact mentions only class representatives; the representative of an
    equality class is its minimum under `term_key`, so a class holding a named
    individual is always represented by a named individual.
    """

    def __init__(self, program: DatalogProgram | None = None):
        self.program = program
        self.rel: dict[Pred, set] = defaultdict(set)
        self._out: dict[tuple, set] = defaultdict(set)    # (pred, a) -> {b}
        self._in: dict[tuple, set] = defaultdict(set)     # (pred, b) -> {a}
        self._src: dict[object, set] = defaultdict(set)   # a -> {(pred, b)}
        self._tgt: dict[object, set] = defaultdict(set)   # b -> {(pred, a)}
        self._occ: dict[object, set] = defaultdict(set)   # individual -> {(pred, args)}
        self._parent: dict = {}
        self.hierarchy = (program.kb.hierarchy if program is not None and program.kb is not None
                          else K.role_hierarchy(()))
        self.cache: dict = {}  # memo space for read-only consumers (filter)

    # -- union-find ---------------------------------------------------------
    def find(self, t):
        p = self._parent.get(t)
        if p is None:
            return t
        root = t
        while root in self._parent:
            root = self._parent[root]
        while t != root:
            nxt = self._parent[t]
            self._parent[t] = root
            t = nxt
        return root

    def representative(self, t):
        return self.find(t)

    def eq_classes(self) -> dict:
        if "eq" in self.cache:
            return self.cache["eq"]
        classes = defaultdict(set)
        for t in self._parent:
            classes[self.find(t)].add(t)
        for rep, members in classes.items():
            members.add(rep)
        self.cache["eq"] = dict(classes)
        return self.cache["eq"]

    def equal_named(self, a) -> list:
        """Named individuals in the equality class of `a` (a itself if unmerged)."""
        rep = self.find(a)
        if not self._parent:
            return [rep]
        cls = self.eq_classes().get(rep, {rep})
        return sorted((m for m in cls if not isinstance(m, Aux)), key=term_key)

    # -- storage -------------------------------------------------------------
    def _insert(self, pred: Pred, args: tuple) -> bool:
        rel = self.rel[pred]
        if args in rel:
            return False
        rel.add(args)
        if len(args) == 2:
            a, b = args
            self._out[pred, a].add(b)
            self._in[pred, b].add(a)
            self._src[a].add((pred, b))
            self._tgt[b].add((pred, a))
        for t in set(args):
            self._occ[t].add((pred, args))
        return True

    def _remove(self, pred: Pred, args: tuple):
        self.rel[pred].discard(args)
        if len(args) == 2:
            a, b = args
            self._out[pred, a].discard(b)
            self._in[pred, b].discard(a)
            self._src[a].discard((pred, b))
            self._tgt[b].discard((pred, a))
        for t in set(args):
            self._occ[t].discard((pred, args))

    def contains(self, pred: Pred, args: tuple) -> bool:
        return tuple(self.find(t) for t in args) in self.rel.get(pred, ())

    def holds(self, atom: Atom) -> bool:
        return self.contains(atom.pred, atom.args)

    def successors(self, pred: Pred, a) -> set:
        return self._out.get((pred, a), set())

    def predecessors(self, pred: Pred, b) -> set:
        return self._in.get((pred, b), set())

    def out_edges(self, a) -> set:
        return self._src.get(a, set())

    def in_edges(self, b) -> set:
        return self._tgt.get(b, set())

    def all_facts(self):
        for pred, rel in self.rel.items():
            for args in rel:
                yield Atom(pred, args)

    def __len__(self):
        return sum(len(r) for r in self.rel.values())

    # -- views ---------------------------------------------------------------
    def _by_kind(self, kind):
        return {p.name: rel for p, rel in self.rel.items() if p.kind == kind and rel}

    @property
    def unary(self) -> dict:
        return {n: {a for (a,) in rel} for n, rel in self._by_kind("C").items()}

    @property
    def binary(self) -> dict:
        return self._by_kind("R")

    @property
    def direct(self) -> dict:
        return self._by_kind("D")

    @property
    def self_facts(self) -> dict:
        return {n: {a for (a,) in rel} for n, rel in self._by_kind("S").items()}

    @property
    def ind_facts(self) -> set:
        return {a for (a,) in self.rel.get(IND, ())}

    @property
    def aux(self) -> frozenset:
        """Aux individuals not equal to any named individual."""
        if "aux" not in self.cache:
            universe = set(self.program.aux_individuals) if self.program else set()
            universe |= {t for t in self._occ if isinstance(t, Aux)}
            self.cache["aux"] = frozenset(u for u in universe if self.find(u) == u)
        return self.cache["aux"]

    @property
    def named(self) -> frozenset:
        if "named" not in self.cache:
            self.cache["named"] = frozenset(self.find(a) for a in self.ind_facts)
        return self.cache["named"]

    def is_aux(self, u) -> bool:
        return isinstance(u, Aux) and self.find(u) == u


# -- evaluation ---------------------------------------------------------------

def _match(pattern: tuple, args: tuple, binding: dict, find) -> dict | None:
    b = dict(binding)
    for p, a in zip(pattern, args):
        if isinstance(p, Var):
            if p in b:
                if b[p] != a:
                    return None
            else:
                b[p] = a
        elif find(p) != a:
            return None
    return b


def _join(store: FactStore, atoms: list, binding: dict):
    """All extensions of `binding` satisfying `atoms` against the store."""
    if not atoms:
        yield binding
        return
    find = store.find

    def bound(t):
        return not isinstance(t, Var) or t in binding

    # most-bound atom first
    idx = max(range(len(atoms)), key=lambda i: sum(map(bound, atoms[i].args)))
    atom, rest = atoms[idx], atoms[:idx] + atoms[idx + 1:]
    vals = [binding.get(t) if isinstance(t, Var) else find(t) for t in atom.args]
    if len(vals) == 2:
        s, t = vals
        if s is not None and t is not None:
            pool = [(s, t)] if (s, t) in store.rel.get(atom.pred, ()) else []
        elif s is not None:
            pool = [(s, b) for b in store.successors(atom.pred, s)]
        elif t is not None:
            pool = [(a, t) for a in store.predecessors(atom.pred, t)]
        else:
            pool = list(store.rel.get(atom.pred, ()))
    else:
        (s,) = vals
        if s is not None:
            pool = [(s,)] if (s,) in store.rel.get(atom.pred, ()) else []
        else:
            pool = list(store.rel.get(atom.pred, ()))
    for args in pool:
        b = _match(atom.args, args, binding, find)
        if b is not None:
            yield from _join(store, rest, b)


def _extend(store: FactStore, atom: Atom, b: dict) -> list:
    """Extensions of `b` matching one more atom (a snapshot, safe against mutation)."""
    vals = [b.get(t) if isinstance(t, Var) else store.find(t) for t in atom.args]
    rel = store.rel.get(atom.pred, ())
    if len(vals) == 1:
        (v,) = vals
        if v is not None:
            return [b] if (v,) in rel else []
        return [{**b, atom.args[0]: a} for (a,) in list(rel)]
    s, t = vals
    if s is not None and t is not None:
        return [b] if (s, t) in rel else []
    x, y = atom.args
    if s is not None:
        if x == y:
            return [b] if (s, s) in rel else []
        return [{**b, y: w} for w in list(store.successors(atom.pred, s))]
    if t is not None:
        return [{**b, x: w} for w in list(store.predecessors(atom.pred, t))]
    return [m for args in list(rel) if (m := _match(atom.args, args, b, store.find)) is not None]


def _instantiate(t, binding, find):
    return find(binding[t]) if isinstance(t, Var) else find(t)


def materialize(program: DatalogProgram, fact_cap: int = DEFAULT_FACT_CAP):
    """Saturate `program`; returns (FactStore, MaterializeStats)."""
    started = time.perf_counter()
    store = FactStore(program)
    stats = MaterializeStats()
    index: dict[Pred, list] = defaultdict(list)
    for rule in program.rules:
        for i, atom in enumerate(rule.body):
            index[atom.pred].append((rule, i))

    work: deque = deque(program.facts)
    find = store.find
    size = 0
    while work:
        item = work.popleft()
        stats.iterations += 1
        if isinstance(item, tuple) and item and item[0] == "=":
            _, s, t = item
            s, t = find(s), find(t)
            if s == t:
                continue
            keep, drop = sorted((s, t), key=term_key)
            store._parent[drop] = keep
            stats.merges += 1
            for pred, args in list(store._occ.get(drop, ())):
                store._remove(pred, args)
                size -= 1
                work.append(Atom(pred, args))
            store._occ.pop(drop, None)
            continue
        pred, args = item.pred, tuple(find(t) for t in item.args)
        if not store._insert(pred, args):
            continue
        size += 1
        stats.derived += 1
        if size > fact_cap:
            raise ResourceLimit(f"fact cap {fact_cap} exceeded")
        for rule, i in index.get(pred, ()):
            b = _match(rule.body[i].args, args, {}, find)
            if b is None:
                continue
            if len(rule.body) == 1:
                _fire(rule, b, work, find, store.rel)
            elif len(rule.body) == 2:
                for full in _extend(store, rule.body[1 - i], b):
                    _fire(rule, full, work, find, store.rel)
            else:
                rest = list(rule.body[:i] + rule.body[i + 1:])
                for full in list(_join(store, rest, b)):
                    _fire(rule, full, work, find, store.rel)
    store.cache.clear()
    stats.wall_ms = (time.perf_counter() - started) * 1000
    return store, stats


def _fire(rule: Rule, binding: dict, work: deque, find, rel):
    if rule.eq is not None:
        s, t = (_instantiate(u, binding, find) for u in rule.eq)
        if s != t:
            work.append(("=", s, t))
        return
    for h in rule.head:
        args = tuple(_instantiate(t, binding, find) for t in h.args)
        if args not in rel.get(h.pred, ()):
            work.append(Atom(h.pred, args))


def unapplied_consequences(store: FactStore, program: DatalogProgram) -> list:
    """Head atoms (or equalities) derivable in one round but not stored; empty at fixpoint."""
    missing = []
    find = store.find
    for rule in program.rules:
        for b in _join(store, list(rule.body), {}):
            if rule.eq is not None:
                s, t = (_instantiate(u, b, find) for u in rule.eq)
                if s != t:
                    missing.append(("=", s, t))
            else:
                for h in rule.head:
                    at = Atom(h.pred, tuple(_instantiate(t, b, find) for t in h.args))
                    if not store.contains(at.pred, at.args):
                        missing.append(at)
    for at in program.facts:
        if not store.holds(at):
            missing.append(at)
    return missing


def is_unsatisfiable(store: FactStore) -> bool:
    return bool(store.rel.get(concept(K.BOT)))


def holds(store: FactStore, atom: Atom) -> bool:
    return store.holds(atom)


def direct_successors(store: FactStore, u) -> set:
    """(role, v) with dir_role(u, v) stored and v an aux individual."""
    u = store.find(u)
    return {(p.name, v) for p, v in store.out_edges(u) if p.kind == "D" and store.is_aux(v)}


def atom_counts(store: FactStore) -> dict:
    """Concept and role atoms (auxiliary predicates excluded), as in a materialisation report."""
    unary = sum(len(r) for p, r in store.rel.items() if p.kind == "C")
    binary = sum(len(r) for p, r in store.rel.items() if p.kind == "R")
    inds = {t for t, occ in store._occ.items() if occ}
    return {"individuals": len(inds), "unary": unary, "binary": binary, "total": unary + binary}
