"""Conjunctive queries and substitutions."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Union


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("var", self.name)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return "?" + self.name


Term = Union[Var, str]


def is_var(t) -> bool:
    return isinstance(t, Var)


@dataclass(frozen=True, order=True)
class QAtom:
    pred: str
    args: tuple

    @property
    def unary(self) -> bool:
        return len(self.args) == 1

    def __str__(self):
        return f"{self.pred}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class CQ:
    answer_vars: tuple  # of Var, ordered
    atoms: tuple        # of QAtom, sorted and de-duplicated
    name: str = "q"

    @staticmethod
    def of(answer_vars, atoms, name="q") -> "CQ":
        answer_vars = tuple(Var(v) if isinstance(v, str) else v for v in answer_vars)
        return CQ(answer_vars, tuple(sorted(set(atoms), key=_atom_key)), name)

    @cached_property
    def vars(self) -> frozenset:
        return frozenset(t for a in self.atoms for t in a.args if isinstance(t, Var))

    @cached_property
    def existential_vars(self) -> frozenset:
        return self.vars - set(self.answer_vars)

    @cached_property
    def terms(self) -> frozenset:
        return frozenset(t for a in self.atoms for t in a.args)

    @property
    def is_boolean(self) -> bool:
        return not self.answer_vars

    def binary_atoms(self):
        return [a for a in self.atoms if len(a.args) == 2]

    def unary_atoms(self):
        return [a for a in self.atoms if len(a.args) == 1]

    def apply(self, sub: Mapping) -> "CQ":
        """Replace terms per `sub` (identity elsewhere); answer variables mapped to
        non-variables drop out of the head."""
        atoms = [QAtom(a.pred, tuple(sub.get(t, t) for t in a.args)) for a in self.atoms]
        head = []
        for v in self.answer_vars:
            w = sub.get(v, v)
            if isinstance(w, Var) and w not in head:
                head.append(w)
        return CQ.of(head, atoms, self.name)

    def __str__(self):
        head = ", ".join(map(str, self.answer_vars))
        return f"{self.name}({head}) :- {', '.join(map(str, self.atoms))} ."


def _atom_key(a: QAtom):
    return (len(a.args), a.pred, tuple((isinstance(t, Var), str(t)) for t in a.args))


def boolean(q: CQ) -> CQ:
    """The Boolean version of q: every variable existential."""
    return CQ((), q.atoms, q.name)
