"""Soundness check for candidate answers: a backtracking search over the guesses of the
nondeterministic filtering procedure (renaming, skeleton, role per non-trivial atom)."""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Iterator, Mapping, Optional

from .materialize import FactStore
from .query import CQ, QAtom, Var
from .translate import Aux, direct, role, self_, term_key

GOOD = "good"
AUX_SIMPLE = "aux-simple"
OTHER = "other"

DEFAULT_BRANCH_CAP = 10_000_000


class BranchCapExceeded(Exception):
    pass


# -- small helpers ---------------------------------------------------------------

def _tau(tau: Mapping, t):
    return tau[t] if isinstance(t, Var) else t


def _term_order(t):
    return (isinstance(t, Var), str(t))


def canonicalize(q: CQ, tau: Mapping, store: FactStore) -> tuple[CQ, dict]:
    """Replace every term not mapped into aux by its named representative."""
    repl = {}
    for t in q.terms:
        val = store.find(_tau(tau, t))
        if not store.is_aux(val):
            repl[t] = val
    canon = q.apply(repl)
    return canon, {v: store.find(tau[v]) for v in canon.vars}


def classify_atom(atom: QAtom, tau: Mapping, store: FactStore) -> str:
    s, t = atom.args
    ts, tt = _tau(tau, s), _tau(tau, t)
    if not isinstance(tt, Aux):
        return GOOD
    has_self = store.contains(self_(atom.pred), (ts,))
    if s == t and has_self:
        return GOOD
    if (s != t and store.is_aux(tt) and store.hierarchy.is_simple(atom.pred)
            and not (ts == tt and has_self)):
        return AUX_SIMPLE
    return OTHER


# -- fork closure ------------------------------------------------------------------

@dataclass
class ForkRelation:
    rep: dict  # term -> class representative (minimum term)

    def same(self, s, t) -> bool:
        return self.rep.get(s, s) == self.rep.get(t, t)

    def classes(self) -> list[set]:
        out = defaultdict(set)
        for t, r in self.rep.items():
            out[r].add(t)
        return list(out.values())


def fork_closure(q: CQ, tau: Mapping, store: FactStore,
                 rep_key=_term_order) -> tuple[ForkRelation, CQ]:
    """Least fork-closed equivalence over terms; each class is represented by its
    minimum under `rep_key`."""
    parent = {t: t for t in q.terms}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    simple = [a for a in q.binary_atoms() if classify_atom(a, tau, store) == AUX_SIMPLE]
    changed = True
    while changed:
        changed = False
        by_target = defaultdict(list)
        for a in simple:
            by_target[find(a.args[1])].append(a.args[0])
        for sources in by_target.values():
            first = find(sources[0])
            for s in sources[1:]:
                r = find(s)
                if r != first:
                    lo, hi = sorted((first, r), key=rep_key)
                    parent[hi] = lo
                    first = lo
                    changed = True
    rep = {t: find(t) for t in q.terms}
    return ForkRelation(rep), q.apply({t: r for t, r in rep.items() if t != r})


# -- connection graph -------------------------------------------------------------

def reaching(store: FactStore, u) -> frozenset:
    """Individuals u' with a non-empty direct-edge path to aux u through aux individuals."""
    memo = store.cache.setdefault("reaching", {})
    if u in memo:
        return memo[u]
    found, stack, seen = set(), [u], {u}
    while stack:
        x = stack.pop()
        for p, w in store.in_edges(x):
            if p.kind != "D":
                continue
            found.add(w)
            if w not in seen and store.is_aux(w):
                seen.add(w)
                stack.append(w)
    memo[u] = frozenset(found)
    return memo[u]


@dataclass
class ConnectionGraph:
    named: frozenset
    variables: frozenset
    Es: frozenset
    Et: frozenset
    tau: dict

    @property
    def V(self) -> frozenset:
        return self.named | self.variables


def connection_graph(q_sim: CQ, tau: Mapping, store: FactStore) -> ConnectionGraph:
    variables = frozenset(v for v in q_sim.vars if store.is_aux(tau[v]))
    es = frozenset(tuple(a.args) for a in q_sim.binary_atoms()
                   if classify_atom(a, tau, store) == AUX_SIMPLE)
    et = set()
    for v in variables:
        pre = reaching(store, tau[v])
        et.update((b, v) for b in pre if not isinstance(b, Aux))
        et.update((w, v) for w in variables if tau[w] in pre)
    return ConnectionGraph(store.named, variables, es, frozenset(et), dict(tau))


def is_dsound(q: CQ, tau: Mapping, store: FactStore) -> bool:
    fork, q_sim = fork_closure(q, tau, store)
    return _dsound(fork, q_sim, tau, store)[0]


def _dsound(fork, q_sim, tau, store):
    for cls in fork.classes():
        if len({_tau(tau, t) for t in cls}) > 1:
            return False, None
    tau_sim = {v: tau[v] for v in q_sim.vars}
    cg = connection_graph(q_sim, tau_sim, store)
    ts = TopologicalSorter()
    for s, t in cg.Es:
        if s == t:
            return False, cg
        ts.add(t, s)
    try:
        ts.prepare()
    except CycleError:
        return False, cg
    return True, cg


# -- exist ------------------------------------------------------------------------

def exist(store: FactStore, u_from, u_to, labels) -> bool:
    """A path u_from -> ... -> u_to through aux individuals whose every step carries a
    direct edge for each role in `labels`; a single step when some label is not
    transitive."""
    labels = frozenset(labels)
    key = (u_from, u_to, labels)
    memo = store.cache.setdefault("exist", {})
    if key in memo:
        return memo[key]
    if not store.is_aux(u_to):
        res = False
    elif not labels:
        res = True
    else:
        preds = [direct(r) for r in sorted(labels)]

        def step(x):
            nxt = set(store.successors(preds[0], x))
            for p in preds[1:]:
                nxt &= store.successors(p, x)
            return {w for w in nxt if store.is_aux(w)}

        if any(r not in store.hierarchy.transitive for r in labels):
            res = u_to in step(u_from)
        else:
            res = False
            seen, frontier = set(), [u_from]
            while frontier and not res:
                x = frontier.pop()
                for w in step(x):
                    if w == u_to:
                        res = True
                        break
                    if w not in seen:
                        seen.add(w)
                        frontier.append(w)
    memo[key] = res
    return res


# -- renamings --------------------------------------------------------------------

@dataclass(frozen=True)
class VariableRenaming:
    mapping: dict

    def __call__(self, v):
        return self.mapping.get(v, v)

    @property
    def identifications(self) -> int:
        return sum(1 for v, w in self.mapping.items() if v != w)


def _partitions(items: list, blocks: int):
    """Set partitions of `items` into exactly `blocks` blocks."""
    if not items:
        if blocks == 0:
            yield []
        return
    if blocks <= 0:
        return
    first, rest = items[0], items[1:]
    for p in _partitions(rest, blocks - 1):
        yield [[first]] + p
    for p in _partitions(rest, blocks):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


def _is_forest(edges) -> bool:
    indeg = defaultdict(int)
    ts = TopologicalSorter()
    for s, t in edges:
        if s == t:
            return False
        indeg[t] += 1
        if indeg[t] > 1:
            return False
        ts.add(t, s)
    try:
        ts.prepare()
    except CycleError:
        return False
    return True


def enumerate_renamings(cg: ConnectionGraph, q: CQ = None, tau: Mapping = None,
                        canonical_only: bool = False,
                        together: Optional[list] = None) -> Iterator[VariableRenaming]:
    """Renamings identifying only variables with equal images, fewest identifications
    first. With `canonical_only`, each block maps to its least variable (all other
    choices of block representative yield isomorphic queries). `together` lists sets
    of variables that must share a block."""
    tau = cg.tau if tau is None else tau
    units = _units(cg.variables, together or [])
    groups = defaultdict(list)
    for u in units:
        groups[tau[min(u)]].append(u)
    groups = [groups[k] for k in sorted(groups, key=term_key)]
    for k in range(sum(len(g) - 1 for g in groups) + 1):
        for split in _compositions(k, [len(g) - 1 for g in groups]):
            per_group = [list(_group_maps(g, len(g) - kg, canonical_only))
                         for g, kg in zip(groups, split)]
            for combo in itertools.product(*per_group):
                mapping = {}
                for m in combo:
                    mapping.update(m)
                sigma = VariableRenaming(mapping)
                if _is_forest({(sigma(s), sigma(t)) for s, t in cg.Es}):
                    yield sigma


def _units(variables, together) -> list:
    parent = {v: v for v in variables}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for block in together:
        block = sorted(block)
        for v in block[1:]:
            a, b = find(block[0]), find(v)
            if a != b:
                parent[max(a, b)] = min(a, b)
    out = defaultdict(set)
    for v in variables:
        out[find(v)].add(v)
    return sorted((frozenset(u) for u in out.values()), key=min)


def _compositions(k, caps):
    if not caps:
        if k == 0:
            yield ()
        return
    for first in range(min(k, caps[0]) + 1):
        for rest in _compositions(k - first, caps[1:]):
            yield (first,) + rest


def _group_maps(group, blocks, canonical_only):
    """Maps for partitions of a list of units into `blocks` blocks."""
    for part in _partitions(group, blocks):
        merged = [sorted(set().union(*b)) for b in part]
        choices = [[b[0]] if canonical_only else b for b in merged]
        for reps in itertools.product(*choices):
            yield {v: r for b, r in zip(merged, reps) for v in b}


def forced_identifications(q: CQ, tau: Mapping, store: FactStore):
    """Pairs of variables every successful branch must identify, or None when some atom
    can be satisfied in no branch at all.

    A binary atom R(s,t) with τ(t) aux and s, t kept apart needs a role P ⊑* R with
    P(τ(s),τ(t)) that is transitive or has a direct edge dir_P(τ(s),τ(t)); without one,
    s and t must be identified, which requires a variable s with τ(s) = τ(t).
    """
    h = store.hierarchy
    pairs = []
    for a in q.binary_atoms():
        s, t = a.args
        if s == t:
            continue
        ts, tt = _tau(tau, s), _tau(tau, t)
        if not store.is_aux(tt):
            continue
        ok = False
        for p in h.subs(a.pred):
            if not store.contains(role(p), (ts, tt)):
                continue
            if p in h.transitive or store.contains(direct(p), (ts, tt)):
                ok = True
                break
        if ok:
            continue
        if isinstance(s, Var) and ts == tt and store.contains(self_(a.pred), (tt,)):
            pairs.append((s, t))
        else:
            return None
    return pairs


# -- skeletons --------------------------------------------------------------------

@dataclass
class Skeleton:
    vertices: frozenset
    parent: dict  # variable vertex -> parent vertex

    @property
    def edges(self) -> frozenset:
        return frozenset((p, c) for c, p in self.parent.items())

    def root(self, v):
        while v in self.parent:
            v = self.parent[v]
        return v

    def path(self, s, t) -> Optional[list]:
        """Vertices of the non-empty path from s down to t, or None if s does not reach t."""
        chain = [t]
        v = t
        while v in self.parent:
            v = self.parent[v]
            chain.append(v)
            if v == s:
                return chain[::-1]
        return None

    def path_from_root(self, t) -> list:
        chain = [t]
        while chain[-1] in self.parent:
            chain.append(self.parent[chain[-1]])
        return chain[::-1]


class _Ctx:
    """Per-candidate search state shared by the skeleton and role-guess steps."""

    def __init__(self, store, tau, cap, choices=0):
        self.store = store
        self.tau = tau
        self.cap = cap
        self.choices = choices

    def tick(self):
        self.choices += 1
        if self.choices > self.cap:
            raise BranchCapExceeded


def _parent_options(cg: ConnectionGraph, sigma: VariableRenaming, store: FactStore,
                    constants: frozenset, sources: frozenset, reduce_roots: bool):
    """σ(E_t) predecessors for each variable vertex of the renamed graph."""
    tau = cg.tau
    svars = sorted({sigma(v) for v in cg.variables})
    forced = {sigma(t): sigma(s) for s, t in cg.Es}
    options = {}
    for w in svars:
        if w in forced:
            options[w] = [forced[w]]
            continue
        pre = reaching(store, tau[w])
        named = sorted((b for b in pre if not isinstance(b, Aux)), key=term_key)
        if reduce_roots:
            named = _distinct_roots(store, named, constants, sources)
        options[w] = named + [x for x in svars if x != w and tau[x] in pre]
    return svars, options


def _distinct_roots(store, named, constants, sources):
    """One named root per class of roots that no check of the search can tell apart."""
    seen, out = set(), []
    for b in named:
        if b in constants:
            out.append(b)
            continue
        sig = (frozenset((p.name, v) for p, v in store.out_edges(b)
                         if p.kind == "D" and store.is_aux(v)),
               frozenset((p.name, a) for p, a in store.in_edges(b)
                         if p.kind == "R" and a in sources))
        if sig not in seen:
            seen.add(sig)
            out.append(b)
    return out


def _assignments(svars, options, ctx: Optional[_Ctx]):
    """Parent assignments forming a forest rooted in named individuals."""
    parent = {}

    def creates_cycle(w, p):
        while p in parent:
            if p == w:
                return True
            p = parent[p]
        return p == w

    def rec(i):
        if i == len(svars):
            yield dict(parent)
            return
        w = svars[i]
        for p in options[w]:
            if ctx is not None and len(options[w]) > 1:
                ctx.tick()
            if creates_cycle(w, p):
                continue
            parent[w] = p
            yield from rec(i + 1)
            del parent[w]

    yield from rec(0)


def enumerate_skeletons(cg: ConnectionGraph, sigma: VariableRenaming,
                        store: FactStore = None) -> Iterator[Skeleton]:
    """All skeletons for the renaming; without a store the full σ(E_t) is used."""
    if store is None:
        svars = sorted({sigma(v) for v in cg.variables})
        forced = {sigma(t): sigma(s) for s, t in cg.Es}
        options = {}
        for w in svars:
            if w in forced:
                options[w] = [forced[w]]
            else:
                preds = {sigma(s) for s, t in cg.Et if sigma(t) == w and sigma(s) != w}
                options[w] = sorted(preds, key=lambda v: (isinstance(v, Var), term_key(v)
                                                          if not isinstance(v, Var) else v.name))
    else:
        svars, options = _parent_options(cg, sigma, store, frozenset(), frozenset(), False)
    verts = frozenset(cg.named | set(svars))
    for parent in _assignments(svars, options, None):
        yield Skeleton(verts, parent)


# -- early rejection ------------------------------------------------------------------

def _realizable_apart(pred, ts, tt, store) -> bool:
    """Some P ⊑* pred with P(ts,tt) that is transitive or has a direct edge ts -> tt."""
    h = store.hierarchy
    for p in h.subs(pred):
        if store.contains(role(p), (ts, tt)) and (
                p in h.transitive or store.contains(direct(p), (ts, tt))):
            return True
    return False


def viable(atoms, tau: Mapping, store: FactStore) -> bool:
    """Necessary condition for soundness, checkable on any subset of the query atoms.

    Terms are merged when some atom can only hold with its two terms identified, and
    by the fork rule; a merged class must have a single image, and an atom whose two
    terms end up merged must be realisable as a loop. False means every branch of the
    search fails for every candidate extending `tau`.
    """
    def canon(t):
        v = _tau(tau, t)
        return t if store.is_aux(v) else v

    h = store.hierarchy
    binary = []
    for a in atoms:
        if len(a.args) != 2:
            continue
        s, t = (canon(x) for x in a.args)
        tt = _tau(tau, a.args[1])
        if store.is_aux(tt):
            binary.append((a.pred, s, t))
    parent = {}

    def find(x):
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx == ry:
            return False
        if _tau(tau, rx) != _tau(tau, ry):
            raise _Reject
        parent[max(rx, ry, key=_term_order)] = min(rx, ry, key=_term_order)
        return True

    try:
        changed = True
        while changed:
            changed = False
            by_target = defaultdict(list)
            for pred, s, t in binary:
                ts, tt = _tau(tau, s), _tau(tau, t)
                if find(s) == find(t):
                    if not (store.contains(self_(pred), (tt,))
                            or any(p in h.transitive and store.contains(role(p), (tt, tt))
                                   for p in h.subs(pred))):
                        return False
                    continue
                if not _realizable_apart(pred, ts, tt, store):
                    if ts == tt and store.contains(self_(pred), (tt,)):
                        changed |= union(s, t)
                        continue
                    return False
                if h.is_simple(pred) and not (ts == tt and store.contains(self_(pred), (tt,))):
                    by_target[find(t)].append(s)
            for sources in by_target.values():
                for x in sources[1:]:
                    changed |= union(sources[0], x)
    except _Reject:
        return False
    return True


class _Reject(Exception):
    pass


# -- the procedure ----------------------------------------------------------------

@dataclass
class FilterOutcome:
    sound: Optional[bool]
    choices: int = 0
    fast_path: bool = False
    indeterminate: bool = False
    witness: Optional[dict] = field(default=None, repr=False)


def is_sound(q_prime: CQ, store: FactStore, tau_prime: Mapping, *,
             branch_cap: int = DEFAULT_BRANCH_CAP, fast_path: bool = True,
             reduce_roots: bool = True, rep_key=_term_order) -> FilterOutcome:
    """Decide whether candidate answer `tau_prime` of `q_prime` is sound.

    Each guess of the nondeterministic procedure becomes a choice point of a
    depth-first search; `choices` counts alternatives tried. Hitting `branch_cap`
    yields an indeterminate outcome, never an unsound one.
    """
    q, tau = canonicalize(q_prime, tau_prime, store)
    fork, q_sim = fork_closure(q, tau, store, rep_key)
    ok, cg = _dsound(fork, q_sim, tau, store)
    if not ok:
        return FilterOutcome(False)
    tau = cg.tau
    kinds = [classify_atom(a, tau, store) for a in q_sim.binary_atoms()]
    if fast_path and all(k != OTHER for k in kinds):
        return FilterOutcome(True, 0, True)
    ctx = _Ctx(store, tau, branch_cap)
    try:
        witness = _search(q_sim, cg, ctx, reduce_roots)
    except BranchCapExceeded:
        return FilterOutcome(None, ctx.choices, indeterminate=True)
    return FilterOutcome(witness is not None, ctx.choices, witness=witness)


def _search(q_sim: CQ, cg: ConnectionGraph, ctx: _Ctx, reduce_roots: bool):
    """Depth-first search over renamings, role guesses, and skeleton parents.

    Parents are chosen lazily, only along the ancestor chain of the target of each
    atom that is neither good nor aux-simple; an edge without labels passes `exist`
    trivially, so the remaining variables merely need some rooted completion.
    """
    store, tau = ctx.store, ctx.tau
    forced = forced_identifications(q_sim, tau, store)
    if forced is None:
        return None
    renamings = list(enumerate_renamings(cg, canonical_only=True, together=forced))
    for sigma in renamings:
        if len(renamings) > 1:
            ctx.tick()
        qs = q_sim.apply({v: sigma(v) for v in cg.variables if sigma(v) != v})
        constants = frozenset(t for t in qs.terms if not isinstance(t, Var))
        sources = frozenset(_tau(tau, t) for t in qs.terms)
        simple, other = [], []
        for a in qs.binary_atoms():
            k = classify_atom(a, tau, store)
            if k == AUX_SIMPLE:
                simple.append(a)
            elif k == OTHER:
                other.append(a)
        svars, options = _parent_options(cg, sigma, store, constants, sources, reduce_roots)
        parent = {w: opts[0] for w, opts in options.items()
                  if len(opts) == 1 and (w, opts[0]) in _renamed_es(cg, sigma)}
        skel = Skeleton(frozenset(), parent)
        labels = defaultdict(set)
        if not _label_simple(simple, skel, labels, store, tau):
            continue
        state = _State(ctx, skel, labels, options, svars)
        guesses = _guess_roles(other, 0, state)
        if guesses is not None:
            return {"sigma": sigma.mapping, "parent": dict(parent),
                    "roles": guesses, "labels": {e: set(l) for e, l in labels.items() if l}}
    return None


def _renamed_es(cg, sigma) -> set:
    return {(sigma(t), sigma(s)) for s, t in cg.Es}


@dataclass
class _State:
    ctx: _Ctx
    skel: Skeleton
    labels: dict
    options: dict
    svars: list


def _label_simple(simple, skel, labels, store, tau) -> bool:
    for a in simple:
        s, t = a.args
        if skel.parent.get(t) != s:
            return False
        labels[(s, t)].add(a.pred)
    return all(exist(store, _tau(tau, s), _tau(tau, t), l) for (s, t), l in labels.items())


def _creates_cycle(parent, w, p) -> bool:
    while True:
        if p == w:
            return True
        if p not in parent:
            return False
        p = parent[p]


def _chains(t, st: _State):
    """Fix parents up the ancestor chain of t, one alternative at a time."""
    parent = st.skel.parent
    v = t
    while v in parent:
        v = parent[v]
    if not isinstance(v, Var):
        yield
        return
    opts = st.options[v]
    for p in opts:
        if len(opts) > 1:
            st.ctx.tick()
        if _creates_cycle(parent, v, p):
            continue
        parent[v] = p
        yield from _chains(t, st)
        del parent[v]


def _complete(st: _State, todo: list):
    """Give every remaining variable a parent so that the forest is rooted."""
    if not todo:
        yield
        return
    parent = st.skel.parent
    w, rest = todo[0], todo[1:]
    if w in parent:
        yield from _complete(st, rest)
        return
    for p in st.options[w]:
        if _creates_cycle(parent, w, p):
            continue
        parent[w] = p
        yield from _complete(st, rest)
        del parent[w]


def _guess_roles(other, i, st: _State):
    if i == len(other):
        for _ in _complete(st, st.svars):
            return []
        return None
    ctx, skel, labels = st.ctx, st.skel, st.labels
    store, tau = ctx.store, ctx.tau
    atom = other[i]
    s, t = atom.args
    ts, tt = _tau(tau, s), _tau(tau, t)
    h = store.hierarchy
    roles = [p for p in h.subs(atom.pred) if store.contains(role(p), (ts, tt))]
    if not roles:
        return None
    for _ in _chains(t, st):
        for p in roles:
            ctx.tick()
            trans = p in h.transitive
            if skel.parent.get(t) != s and not trans:
                continue
            path = skel.path(s, t)
            if path is None:
                path = skel.path_from_root(t)
                if not store.contains(role(p), (ts, path[0])):
                    continue
            added = []
            ok = True
            for e in zip(path, path[1:]):
                if p not in labels[e]:
                    labels[e].add(p)
                    added.append(e)
                    if not exist(store, _tau(tau, e[0]), _tau(tau, e[1]), labels[e]):
                        ok = False
                        break
            if ok:
                rest = _guess_roles(other, i + 1, st)
                if rest is not None:
                    return [(atom, p)] + rest
            for e in added:  # undo trail
                labels[e].discard(p)
    return None
