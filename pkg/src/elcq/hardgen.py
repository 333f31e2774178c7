"""SAT-based generators of hard KB/query pairs, and a brute-force SAT oracle."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional

from . import kb as K
from .arborescent import ShapeError
from .query import CQ, QAtom, Var
from .translate import Aux


@dataclass(frozen=True)
class CNF:
    n: int
    clauses: tuple  # tuples of nonzero ints, DIMACS-style literals

    def __post_init__(self):
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.n:
                    raise ValueError(f"literal {lit} out of range 1..{self.n}")

    @property
    def three_cnf(self) -> bool:
        return all(len(c) == 3 for c in self.clauses)

    @property
    def m(self) -> int:
        return len(self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n} {self.m}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CNF:
    """DIMACS CNF; the problem line is optional, clauses may span lines."""
    n, lits, clauses = None, [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line: {line!r}")
            n = int(parts[2])
            continue
        for tok in line.split():
            v = int(tok)
            if v == 0:
                clauses.append(tuple(lits))
                lits = []
            else:
                lits.append(v)
    if lits:
        clauses.append(tuple(lits))
    if n is None:
        n = max((abs(l) for c in clauses for l in c), default=0)
    return CNF(n, tuple(clauses))


def brute_sat(phi: CNF) -> bool:
    for bits in itertools.product((False, True), repeat=phi.n):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in phi.clauses):
            return True
    return False


def pad3(phi: CNF) -> CNF:
    """Pad every clause to three literals by repeating its first literal."""
    out = []
    for c in phi.clauses:
        if not c or len(c) > 3:
            raise ShapeError("clauses must have one to three literals")
        out.append(tuple(c) + (c[0],) * (3 - len(c)))
    return CNF(phi.n, tuple(out))


@dataclass
class HardInstance:
    kb: K.KB
    query: CQ
    expected_tau: Optional[dict] = None


def _v(name):
    return Var(name)


# -- filtering hardness -----------------------------------------------------------

def gen_filter_hard(phi: CNF) -> HardInstance:
    """A KB and Boolean query with a single candidate answer that is sound iff phi is
    satisfiable; phi must be in 3CNF."""
    if not phi.three_cnf:
        raise ShapeError("formula is not in 3CNF")
    n, m = phi.n, phi.m
    tbox, abox = [], [K.ConceptAssertion("A", "a")]
    for j in range(1, m + 1):
        tbox.append(K.ExistsSup("A", "R", f"C_{j}"))
    tbox.append(K.ExistsSup("A", "R", "G"))
    for j, clause in enumerate(phi.clauses, 1):
        for k, lit in enumerate(clause, 1):
            s, l = f"S_{j}_{k}", f"L_{j}_{k}"
            tbox.append(K.ExistsSup(f"C_{j}", s, l))
            tbox.append(K.SubClass(l, "A"))
            for i in range(1, n + 1):
                if lit == i or abs(lit) != i:
                    tbox.append(K.SubRole(s, f"P_{i}"))
                if lit == -i or abs(lit) != i:
                    tbox.append(K.SubRole(s, f"N_{i}"))
    for i in range(1, n + 1):
        tbox += [K.SubRole("R", f"P_{i}"), K.SubRole("R", f"N_{i}"),
                 K.Transitive(f"P_{i}"), K.Transitive(f"N_{i}"),
                 K.SubRole(f"P_{i}", f"T_{i}"), K.SubRole(f"N_{i}", f"T_{i}"),
                 K.SubRole(f"T_{i}", "T")]
    y = _v("y")
    atoms = [QAtom("G", (y,))]
    atoms += [QAtom(f"T_{i}", ("a", y)) for i in range(1, n + 1)]
    for j in range(1, m + 1):
        z = _v(f"z{j}")
        atoms += [QAtom(f"C_{j}", (z,)), QAtom("T", (z, y))]
    tau = {y: Aux("R", "G")}
    tau.update({_v(f"z{j}"): Aux("R", f"C_{j}") for j in range(1, m + 1)})
    return HardInstance(K.KB.of(tbox, abox), CQ.of((), atoms, "q"), tau)


# -- acyclic and arborescent hardness -------------------------------------------------

def _xi0(phi: CNF) -> tuple[list, list]:
    n = phi.n
    tbox = []
    for i in range(1, n + 1):
        tbox += [K.ExistsSup(f"A_{i-1}", "R", f"T_{i}"), K.ExistsSup(f"A_{i-1}", "R", f"F_{i}"),
                 K.SubClass(f"T_{i}", f"A_{i}"), K.SubClass(f"F_{i}", f"A_{i}")]
    tbox.append(K.ExistsSup(f"A_{n}", "R", "G"))
    for j, clause in enumerate(phi.clauses, 1):
        for i in sorted({l for l in clause if l > 0}):
            tbox.append(K.SubClass(f"T_{i}", f"C_{j}"))
        for i in sorted({-l for l in clause if l < 0}):
            tbox.append(K.SubClass(f"F_{i}", f"C_{j}"))
    return tbox, [K.ConceptAssertion("A_0", "a")]


def _q0(n: int) -> list:
    p = [_v(f"p{i}") for i in range(n + 2)]
    atoms = [QAtom(f"A_{i}", (p[i],)) for i in range(n + 1)]
    atoms += [QAtom("R", (p[i], p[i + 1])) for i in range(n + 1)]
    atoms.append(QAtom("G", (p[n + 1],)))
    return atoms


def gen_acyclic_hard(phi: CNF) -> HardInstance:
    """ELHO KB with an acyclic (not arborescent) query entailed iff phi is satisfiable.

    The rule C_j(x) -> S_j(x, c_j) is written as C_j ⊑ ∃S_j.N_j with N_j ⊑ {c_j}.
    """
    n = phi.n
    tbox, abox = _xi0(phi)
    atoms = _q0(n)
    pn1 = _v(f"p{n + 1}")
    for j in range(1, phi.m + 1):
        c, s = f"c{j}", f"S_{j}"
        abox.append(K.RoleAssertion("R", c, c))
        tbox += [K.ExistsSup(f"C_{j}", s, f"N_{j}"), K.Nominal(f"N_{j}", c), K.SubRole("R", s)]
        x = [_v(f"x{i}_{j}") for i in range(n + 1)]
        yv = [_v(f"y{i}_{j}") for i in range(n + 1)]
        z = [None] + [_v(f"z{i}_{j}") for i in range(1, n + 2)]
        atoms.append(QAtom("R", (_v(f"y_{j}"), x[0])))
        for i in range(1, n + 2):
            atoms += [QAtom("R", (x[i - 1], z[i])), QAtom(s, (yv[i - 1], z[i]))]
            if i <= n:
                atoms.append(QAtom("R", (yv[i - 1], x[i])))
        atoms.append(QAtom("R", (yv[n], pn1)))
    return HardInstance(K.KB.of(tbox, abox), CQ.of((), atoms, "q"))


def gen_trans_hard(phi: CNF) -> HardInstance:
    n = phi.n
    tbox, abox = _xi0(phi)
    tbox.append(K.Transitive("R"))
    atoms = _q0(n)
    for j in range(1, phi.m + 1):
        x = _v(f"x_{j}")
        atoms += [QAtom(f"C_{j}", (x,)), QAtom("R", (x, _v(f"p{n + 1}")))]
    return HardInstance(K.KB.of(tbox, abox), CQ.of((), atoms, "q"))


def gen_refl_hard(phi: CNF) -> HardInstance:
    n = phi.n
    tbox, abox = _xi0(phi)
    tbox.append(K.Reflexive("R"))
    atoms = _q0(n)
    for j in range(1, phi.m + 1):
        x = [_v(f"x{i}_{j}") for i in range(n + 1)]
        atoms += [QAtom(f"C_{j}", (x[0],)), QAtom("R", (_v(f"x_{j}"), x[0]))]
        atoms += [QAtom("R", (x[i - 1], x[i])) for i in range(1, n + 1)]
        atoms.append(QAtom("R", (x[n], _v(f"p{n + 1}"))))
    return HardInstance(K.KB.of(tbox, abox), CQ.of((), atoms, "q"))


GENERATORS = {"filter": lambda phi: gen_filter_hard(pad3(phi)),
              "acyclic": gen_acyclic_hard, "trans": gen_trans_hard, "refl": gen_refl_hard}


# -- formula suites -----------------------------------------------------------------

def _canonical(clauses, n) -> tuple:
    """Least relabelling of a clause set under variable permutations and sign flips."""
    best = None
    for perm in itertools.permutations(range(1, n + 1)):
        for flips in itertools.product((1, -1), repeat=n):
            img = tuple(sorted(tuple(sorted(perm[abs(l) - 1] * flips[abs(l) - 1] * (1 if l > 0 else -1)
                                            for l in c)) for c in clauses))
            if best is None or img < best:
                best = img
    return best


def _compact(clauses) -> CNF:
    used = sorted({abs(l) for c in clauses for l in c})
    ren = {v: i for i, v in enumerate(used, 1)}
    return CNF(len(used), tuple(tuple(sorted((ren[abs(l)] * (1 if l > 0 else -1) for l in c),
                                             key=lambda l: (abs(l), l)))
                                  for c in clauses))


def exhaustive_suite(max_n: int = 3, max_m: int = 3) -> list[CNF]:
    """All formulas with up to max_m distinct clauses of one to three distinct literals
    over at most max_n variables, one per symmetry class, clauses padded to three."""
    lits = [s * v for v in range(1, max_n + 1) for s in (1, -1)]
    clause_pool = [frozenset(c) for size in (1, 2, 3) for c in itertools.combinations(lits, size)]
    seen, out = set(), []
    for m in range(1, max_m + 1):
        for combo in itertools.combinations(clause_pool, m):
            phi = _compact([tuple(sorted(c)) for c in combo])
            key = (phi.n, _canonical(phi.clauses, phi.n))
            if key in seen:
                continue
            seen.add(key)
            out.append(pad3(phi))
    return out


def random_formula(rng: random.Random, max_n: int = 4, max_m: int = 4) -> CNF:
    n = rng.randint(1, max_n)
    m = rng.randint(1, max_m)
    clauses = []
    for _ in range(m):
        clauses.append(tuple(rng.choice((1, -1)) * rng.randint(1, n) for _ in range(3)))
    return CNF(n, tuple(clauses))
