"""Certain answers: candidate enumeration over the materialisation, then filtering."""
from __future__ import annotations

import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

from . import kb as K
from .filter import DEFAULT_BRANCH_CAP, FilterOutcome, canonicalize, is_sound, viable
from .materialize import FactStore, ResourceLimit, is_unsatisfiable, materialize
from .query import CQ, QAtom, Var
from .translate import Aux, Pred, build_datalog, concept, role, term_key

__all__ = ["AnswerSet", "SearchStats", "Unsatisfiable", "canonicalize", "candidate_answers",
           "certain_answers", "entails", "prepare"]


class _Unsat:
    def __repr__(self):
        return "Unsatisfiable"


Unsatisfiable = _Unsat()


@dataclass
class SearchStats:
    candidates: int = 0
    unsound: int = 0
    filter_ms_total: float = 0.0
    choices: int = 0
    fast_path_hits: int = 0
    indeterminate: int = 0

    @property
    def filter_ms_avg(self) -> float:
        return self.filter_ms_total / self.candidates if self.candidates else 0.0

    @property
    def choices_avg(self) -> float:
        return self.choices / self.candidates if self.candidates else 0.0

    def add(self, outcome: FilterOutcome, ms: float):
        self.filter_ms_total += ms
        self.choices += outcome.choices
        self.fast_path_hits += outcome.fast_path
        self.indeterminate += outcome.indeterminate
        if outcome.sound is False:
            self.unsound += 1

    def as_json(self, answers: Optional[int] = None, unsat: bool = False) -> dict:
        return {"answers": answers, "candidates": self.candidates, "unsound": self.unsound,
                "filter_ms_avg": round(self.filter_ms_avg, 2),
                "choices_avg": round(self.choices_avg, 4),
                "fast_path_hits": self.fast_path_hits, "unsat": unsat}


@dataclass
class AnswerSet:
    answers: object  # Unsatisfiable or a frozenset of tuples
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def unsatisfiable(self) -> bool:
        return self.answers is Unsatisfiable

    def tuples(self) -> frozenset:
        if self.unsatisfiable:
            raise ValueError("the KB is unsatisfiable")
        return self.answers

    def sorted(self) -> list:
        return sorted(self.tuples())


def _pred(a: QAtom) -> Pred:
    return concept(a.pred) if len(a.args) == 1 else role(a.pred)


def _order(q: CQ) -> list:
    """Unary atoms first, then binary atoms, each next atom sharing a bound variable
    where possible."""
    unary = sorted(q.unary_atoms(), key=str)
    binary = sorted(q.binary_atoms(), key=str)
    bound = {t for a in unary for t in a.args}
    ordered = list(unary)
    while binary:
        pick = next((a for a in binary
                     if any(t in bound or not isinstance(t, Var) for t in a.args)), binary[0])
        binary.remove(pick)
        ordered.append(pick)
        bound.update(pick.args)
    return ordered


def candidate_answers(q: CQ, store: FactStore, prune: bool = False) -> Iterator[dict]:
    """Substitutions τ over class representatives with every atom of τ(q) stored.

    Backtracking join that always extends with the atom having the fewest matches
    under the current binding (ties broken by a fixed atom order), so the output
    order is deterministic. With `prune`, a partial binding is abandoned as soon as
    the atoms it fully binds fail `filter.viable`; every candidate dropped this way
    would be rejected by the filter.
    """
    find = store.find
    atoms = [(a, _pred(a), tuple(t if isinstance(t, Var) else find(t) for t in a.args))
             for a in _order(q)]
    watch = defaultdict(list)  # variable -> binary atoms mentioning it
    if prune:
        for a in q.binary_atoms():
            for v in set(a.args):
                if isinstance(v, Var):
                    watch[v].append(a)

    def size(p, args, b):
        vals = [b.get(t) if isinstance(t, Var) else t for t in args]
        if len(vals) == 1:
            (v,) = vals
            rel = store.rel.get(p, ())
            return len(rel) if v is None else int((v,) in rel)
        s, t = vals
        if s is not None and t is not None:
            return int((s, t) in store.rel.get(p, ()))
        if s is not None:
            return len(store.successors(p, s))
        if t is not None:
            return len(store.predecessors(p, t))
        return len(store.rel.get(p, ()))

    def pool(p, args, b):
        vals = tuple(b.get(t) if isinstance(t, Var) else t for t in args)
        rel = store.rel.get(p, ())
        if None not in vals:
            return [vals] if vals in rel else []
        if len(vals) == 2 and vals[0] is not None:
            return [(vals[0], w) for w in store.successors(p, vals[0])]
        if len(vals) == 2 and vals[1] is not None:
            return [(w, vals[1]) for w in store.predecessors(p, vals[1])]
        return rel

    def _viable(nb, b):
        fresh = nb.keys() - b.keys()
        if not any(all(not isinstance(t, Var) or t in nb for t in a.args)
                   for v in fresh for a in watch[v]):
            return True
        full = [a for a in q.binary_atoms()
                if all(not isinstance(t, Var) or t in nb for t in a.args)]
        return viable(full, nb, store)

    def components(remaining, b):
        comp = {}
        for idx, (a, _, args) in enumerate(remaining):
            comp[idx] = idx
        owner = {}

        def root(i):
            while comp[i] != i:
                i = comp[i]
            return i

        for idx, (a, _, args) in enumerate(remaining):
            free = [t for t in args if isinstance(t, Var) and t not in b]
            if not free:
                return None
            for v in free:
                if v in owner:
                    comp[root(idx)] = root(owner[v])
                else:
                    owner[v] = idx
        groups = defaultdict(list)
        for idx in range(len(remaining)):
            groups[root(idx)].append(remaining[idx])
        return sorted(groups.values(), key=len) if len(groups) > 1 else None

    def rec(remaining, b):
        if not remaining:
            yield dict(b)
            return
        if watch and b:
            # independent parts: each must extend on its own before any is enumerated
            parts = components(remaining, b)
            if parts:
                if not all(next(rec(part, b), None) is not None for part in parts):
                    return
                rest = [x for part in parts[1:] for x in part]
                for e in rec(parts[0], b):
                    yield from rec(rest, e)
                return
        best = None
        for i, (a, p, args) in enumerate(remaining):
            n = size(p, args, b)
            if best is None or n < best[0]:
                best = (n, i)
                if n <= 1:
                    break
        n, i = best
        if n == 0:
            return
        a, p, args = remaining[i]
        rest = remaining[:i] + remaining[i + 1:]
        for tup in sorted(pool(p, args, b), key=lambda xs: tuple(map(term_key, xs))):
            nb = b
            for t, v in zip(args, tup):
                if isinstance(t, Var):
                    old = nb.get(t)
                    if old is None:
                        if nb is b:
                            nb = dict(b)
                        nb[t] = v
                    elif old != v:
                        break
                elif t != v:
                    break
            else:
                if watch and nb is not b and not _viable(nb, b):
                    continue
                yield from rec(rest, nb)

    yield from rec(atoms, {})


def prepare(kb: K.KB) -> FactStore:
    store, _ = materialize(build_datalog(kb))
    return store


def _expand(store: FactStore, pi: tuple) -> list:
    out = [()]
    for a in pi:
        out = [t + (m,) for t in out for m in store.equal_named(a)]
    return out


def certain_answers(kb: Optional[K.KB], q: CQ, *, store: Optional[FactStore] = None,
                    jobs: int = 1, branch_cap: int = DEFAULT_BRANCH_CAP,
                    fast_path: bool = True, skip_decided: bool = False) -> AnswerSet:
    """Certain answers of q over the KB (or over an already materialised `store`).

    With `skip_decided`, candidates whose answer tuple is already accepted are not
    filtered again; they still count as candidates.
    """
    if store is None:
        store = prepare(kb)
    stats = SearchStats()
    if is_unsatisfiable(store):
        return AnswerSet(Unsatisfiable, stats)
    accepted, undecided = set(), set()

    def run(tau):
        t0 = time.perf_counter()
        out = is_sound(q, store, tau, branch_cap=branch_cap, fast_path=fast_path)
        return out, (time.perf_counter() - t0) * 1000

    todo = []
    for tau in candidate_answers(q, store):
        stats.candidates += 1
        pi = tuple(tau[v] for v in q.answer_vars)
        if any(isinstance(a, Aux) for a in pi):
            stats.unsound += 1
            continue
        if skip_decided and pi in accepted:
            continue
        if jobs > 1:
            todo.append((pi, tau))
            continue
        out, ms = run(tau)
        stats.add(out, ms)
        if out.sound:
            accepted.add(pi)
        elif out.indeterminate:
            undecided.add(pi)
    if todo:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for (pi, _), (out, ms) in zip(todo, pool.map(lambda it: run(it[1]), todo)):
                stats.add(out, ms)
                if out.sound:
                    accepted.add(pi)
                elif out.indeterminate:
                    undecided.add(pi)
    if undecided - accepted:
        raise ResourceLimit(f"branch cap {branch_cap} reached for "
                            f"{len(undecided - accepted)} answer tuple(s)")
    answers = {e for pi in accepted for e in _expand(store, pi)}
    return AnswerSet(frozenset(answers), stats)


def entails(kb: Optional[K.KB], q: CQ, *, store: Optional[FactStore] = None,
            branch_cap: int = DEFAULT_BRANCH_CAP, fast_path: bool = True) -> bool:
    """Whether the KB entails Boolean q; stops at the first sound candidate."""
    if store is None:
        store = prepare(kb)
    if is_unsatisfiable(store):
        return True
    q = CQ((), q.atoms, q.name)
    undecided = False
    for tau in candidate_answers(q, store, prune=True):
        out = is_sound(q, store, tau, branch_cap=branch_cap, fast_path=fast_path)
        if out.sound:
            return True
        undecided |= out.indeterminate
    if undecided:
        raise ResourceLimit(f"branch cap {branch_cap} reached")
    return False
