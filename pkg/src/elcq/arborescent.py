"""Query shapes, and the polynomial entailment check for arborescent queries over ELHO."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

from . import kb as K
from .materialize import FactStore, is_unsatisfiable
from .query import CQ, Var
from .translate import Aux, concept, direct, role


class ShapeError(ValueError):
    pass


class DialectError(ValueError):
    pass


@dataclass(frozen=True)
class QueryShape:
    kind: str  # "cyclic", "acyclic" or "arborescent"
    root: Optional[Var] = None

    @property
    def acyclic(self) -> bool:
        return self.kind != "cyclic"

    def __str__(self):
        return f"arborescent (root {self.root})" if self.root is not None else self.kind


Cyclic = QueryShape("cyclic")
Acyclic = QueryShape("acyclic")


def Arborescent(root: Var) -> QueryShape:
    return QueryShape("arborescent", root)


def _undirected_acyclic(terms, pairs) -> bool:
    """Forest check on the simple undirected graph; a self-loop is a cycle."""
    parent = {t: t for t in terms}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    for s, t in pairs:
        if s == t:
            return False
        rs, rt = find(s), find(t)
        if rs == rt:
            return False
        parent[rs] = rt
    return True


def classify_query(q: CQ) -> QueryShape:
    """Shape of the Boolean version of q; every term, constants included, is a vertex."""
    terms = q.terms
    pairs = sorted({tuple(sorted(a.args, key=str)) for a in q.binary_atoms()}, key=str)
    if not _undirected_acyclic(terms, pairs):
        return Cyclic
    if any(not isinstance(t, Var) for t in terms):
        return Acyclic
    out = defaultdict(set)
    for a in q.binary_atoms():
        out[a.args[0]].add(a.args[1])
    roots = [v for v in sorted(terms) if not out[v]]
    if len(roots) != 1 or any(len(out[v]) > 1 for v in terms):
        return Acyclic
    # a forest with n-1 edges on n vertices is connected
    if len(pairs) != len(terms) - 1:
        return Acyclic
    return Arborescent(roots[0])


@dataclass
class RTFamily:
    """The sets of the bottom-up construction with their levels and A-sets."""
    root: Var
    parent: dict          # variable -> parent variable
    members: list         # (frozenset V, level), in creation order
    A: dict               # (V, level) -> frozenset of individuals

    def pred(self, V) -> frozenset:
        return frozenset(y for y, x in self.parent.items() if x in V)


def _rt_sets(root, parent):
    children = defaultdict(set)
    for y, x in parent.items():
        children[x].add(y)

    def pred(V):
        return frozenset(y for x in V for y in children[x])

    members, seen = [], set()
    frontier = [frozenset({root})]
    level = 0
    while frontier:
        nxt = []
        for V in frontier:
            if (V, level) in seen:
                continue
            seen.add((V, level))
            members.append((V, level))
            P = pred(V)
            if P:  # the empty set carries no constraint
                nxt.append(P)
                nxt.extend(frozenset({y}) for y in sorted(P))
        frontier = nxt
        level += 1
    return members, pred


def check_elho(kb: K.KB):
    bad = [ax for ax in kb.sorted_tbox()
           if isinstance(ax, (K.Transitive, K.Reflexive, K.SelfSup, K.SelfSub))]
    if bad:
        raise DialectError(f"not an ELHO TBox: {bad[0]}")


def entails_arborescent(store: FactStore, q: CQ, *, family: Optional[list] = None) -> bool:
    """Whether the KB behind `store` entails Boolean arborescent q.

    When `family` is a list, the computed RTFamily is appended to it.
    """
    shape = classify_query(q)
    if shape.kind != "arborescent":
        raise ShapeError(f"query is {shape}, not arborescent")
    if store.program is not None and store.program.kb is not None:
        check_elho(store.program.kb)
    if is_unsatisfiable(store):
        raise ValueError("the KB is unsatisfiable")
    root = shape.root
    parent, roles = {}, defaultdict(set)
    for a in q.binary_atoms():
        y, x = a.args
        parent[y] = x
        roles[y].add(a.pred)
    unary = defaultdict(list)
    for a in q.unary_atoms():
        unary[a.args[0]].append(a.pred)

    named, aux = store.named, store.aux
    universe = named | aux

    def c(V):
        out = set(universe)
        for x in V:
            for B in unary[x]:
                out &= {u for (u,) in store.rel.get(concept(B), ())}
        return out

    members, pred = _rt_sets(root, parent)
    max_level = max(lvl for _, lvl in members)
    A = {}
    for V, lvl in sorted(members, key=lambda m: -m[1]):
        cV = c(V)
        P = pred(V)
        if lvl == max_level or not P:
            A[V, lvl] = frozenset(cV)
            continue
        i_V = set(named)
        for y in sorted(P):
            reach = set()
            for u1 in A[frozenset({y}), lvl + 1]:
                succ = None
                for R in roles[y]:
                    s = store.successors(role(R), u1)
                    succ = set(s) if succ is None else succ & s
                reach |= succ
            i_V &= reach
        a_V = set()
        needed = set().union(*(roles[y] for y in P))
        for u1 in A[P, lvl + 1]:
            succ = None
            for R in needed:
                s = store.successors(direct(R), u1)
                succ = set(s) if succ is None else succ & s
            a_V |= {u for u in succ if isinstance(u, Aux) and u in aux}
        A[V, lvl] = frozenset(cV & (i_V | a_V))
    if family is not None:
        family.append(RTFamily(root, parent, members, A))
    return bool(A[frozenset({root}), 0])
