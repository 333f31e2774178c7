"""Knowledge base model: signature, the eleven normalised axiom forms, role hierarchy."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

TOP = "Top"
BOT = "Bot"
RESERVED_CONCEPTS = frozenset({TOP, BOT})


# -- axioms -----------------------------------------------------------------

@dataclass(frozen=True, order=True)
class SubClass:
    """A ⊑ B (type 1)."""
    sub: str
    sup: str
    kind = 1


@dataclass(frozen=True, order=True)
class Nominal:
    """A ⊑ {a} (type 2)."""
    sub: str
    individual: str
    kind = 2


@dataclass(frozen=True, order=True)
class Conjunction:
    """A1 ⊓ A2 ⊑ A (type 3)."""
    left: str
    right: str
    sup: str
    kind = 3


@dataclass(frozen=True, order=True)
class ExistsSub:
    """∃R.A1 ⊑ A (type 4)."""
    role: str
    filler: str
    sup: str
    kind = 4


@dataclass(frozen=True, order=True)
class SubRole:
    """S ⊑ R (type 5)."""
    sub: str
    sup: str
    kind = 5


@dataclass(frozen=True, order=True)
class Range:
    """range(R, A) (type 6)."""
    role: str
    concept: str
    kind = 6


@dataclass(frozen=True, order=True)
class ExistsSup:
    """A1 ⊑ ∃R.A (type 7)."""
    sub: str
    role: str
    filler: str
    kind = 7


@dataclass(frozen=True, order=True)
class Transitive:
    role: str
    kind = 8


@dataclass(frozen=True, order=True)
class Reflexive:
    role: str
    kind = 9


@dataclass(frozen=True, order=True)
class SelfSup:
    """A ⊑ ∃R.Self (type 10)."""
    sub: str
    role: str
    kind = 10


@dataclass(frozen=True, order=True)
class SelfSub:
    """∃R.Self ⊑ A (type 11)."""
    role: str
    sup: str
    kind = 11


Axiom = Union[SubClass, Nominal, Conjunction, ExistsSub, SubRole, Range, ExistsSup,
              Transitive, Reflexive, SelfSup, SelfSub]

ELHO_KINDS = frozenset(range(1, 8))


def axiom_concepts(ax: Axiom) -> tuple[str, ...]:
    if isinstance(ax, SubClass):
        return (ax.sub, ax.sup)
    if isinstance(ax, Nominal):
        return (ax.sub,)
    if isinstance(ax, Conjunction):
        return (ax.left, ax.right, ax.sup)
    if isinstance(ax, ExistsSub):
        return (ax.filler, ax.sup)
    if isinstance(ax, Range):
        return (ax.concept,)
    if isinstance(ax, ExistsSup):
        return (ax.sub, ax.filler)
    if isinstance(ax, SelfSup):
        return (ax.sub,)
    if isinstance(ax, SelfSub):
        return (ax.sup,)
    return ()


def axiom_roles(ax: Axiom) -> tuple[str, ...]:
    if isinstance(ax, SubRole):
        return (ax.sub, ax.sup)
    return (ax.role,) if hasattr(ax, "role") else ()


def axiom_individuals(ax: Axiom) -> tuple[str, ...]:
    return (ax.individual,) if isinstance(ax, Nominal) else ()


# -- assertions -------------------------------------------------------------

@dataclass(frozen=True, order=True)
class ConceptAssertion:
    concept: str
    individual: str

    def __str__(self):
        return f"{self.concept}({self.individual})"


@dataclass(frozen=True, order=True)
class RoleAssertion:
    role: str
    subject: str
    object: str

    def __str__(self):
        return f"{self.role}({self.subject}, {self.object})"


Assertion = Union[ConceptAssertion, RoleAssertion]


# -- signature and KB -------------------------------------------------------

@dataclass(frozen=True)
class Signature:
    """Symbols occurring in a KB. Names are the identifiers; Top/Bot are kept apart."""
    concepts: frozenset[str]
    roles: frozenset[str]
    individuals: frozenset[str]
    reserved: tuple[str, str] = (TOP, BOT)


@dataclass(frozen=True)
class KB:
    tbox: frozenset = field(default_factory=frozenset)
    abox: frozenset = field(default_factory=frozenset)

    @staticmethod
    def of(tbox: Iterable[Axiom] = (), abox: Iterable[Assertion] = ()) -> "KB":
        return KB(frozenset(tbox), frozenset(abox))

    @cached_property
    def signature(self) -> Signature:
        concepts, roles, inds = set(), set(), set()
        for ax in self.tbox:
            concepts.update(axiom_concepts(ax))
            roles.update(axiom_roles(ax))
            inds.update(axiom_individuals(ax))
        for at in self.abox:
            if isinstance(at, ConceptAssertion):
                concepts.add(at.concept)
                inds.add(at.individual)
            else:
                roles.add(at.role)
                inds.update((at.subject, at.object))
        return Signature(frozenset(concepts - RESERVED_CONCEPTS), frozenset(roles),
                         frozenset(inds))

    @cached_property
    def hierarchy(self) -> "RoleHierarchy":
        return role_hierarchy(self.tbox)

    def is_elho(self) -> bool:
        return all(ax.kind in ELHO_KINDS for ax in self.tbox)

    def sorted_tbox(self) -> list:
        return sorted(self.tbox, key=lambda ax: (ax.kind, repr(ax)))

    def sorted_abox(self) -> list:
        return sorted(self.abox, key=lambda at: (isinstance(at, RoleAssertion), repr(at)))


# -- role hierarchy ---------------------------------------------------------

@dataclass(frozen=True)
class RoleHierarchy:
    sub: dict  # role -> frozenset of super-roles (reflexive-transitive)
    transitive: frozenset
    reflexive: frozenset

    def supers(self, role: str) -> frozenset:
        return self.sub.get(role, frozenset((role,)))

    def is_sub(self, s: str, r: str) -> bool:
        return r in self.supers(s)

    def subs(self, role: str) -> list[str]:
        """Roles S with S ⊑* role, ⊑*-minimal ones first."""
        found = [s for s in self.sub if role in self.sub[s]] or [role]
        if role not in found:
            found.append(role)
        return sorted(found, key=lambda s: (len(self.sub.get(s, ())) * -1, s))

    def is_simple(self, role: str) -> bool:
        return is_simple(role, self)


def role_hierarchy(tbox: Iterable[Axiom]) -> RoleHierarchy:
    tbox = list(tbox)
    roles: set[str] = set()
    direct: dict[str, set[str]] = {}
    for ax in tbox:
        roles.update(axiom_roles(ax))
        if isinstance(ax, SubRole):
            direct.setdefault(ax.sub, set()).add(ax.sup)
    closure = {}
    for r in roles:
        seen = {r}
        stack = [r]
        while stack:
            for nxt in direct.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        closure[r] = frozenset(seen)
    return RoleHierarchy(
        sub=closure,
        transitive=frozenset(ax.role for ax in tbox if isinstance(ax, Transitive)),
        reflexive=frozenset(ax.role for ax in tbox if isinstance(ax, Reflexive)),
    )


def is_simple(role: str, hierarchy: RoleHierarchy) -> bool:
    return not any(role in hierarchy.supers(s) for s in hierarchy.transitive)


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    axiom: object = None

    def __str__(self):
        return f"{self.code}: {self.message}"


class ValidationFailed(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(map(str, self.diagnostics)))


def _lhs_concepts(ax: Axiom) -> tuple[str, ...]:
    # every concept position except B of type 1
    if isinstance(ax, SubClass):
        return (ax.sub,)
    return axiom_concepts(ax)


def validate_kb(kb: KB) -> list[Diagnostic]:
    """Return one diagnostic per violated KB invariant; an empty list means legal."""
    report = []
    h = kb.hierarchy
    for ax in kb.sorted_tbox():
        if isinstance(ax, (SelfSup, SelfSub)) and not is_simple(ax.role, h):
            report.append(Diagnostic(
                "non-simple-self", f"non-simple role in self axiom: {ax.role}", ax))
        if BOT in _lhs_concepts(ax):
            report.append(Diagnostic("bot-position", f"Bot not allowed here: {ax}", ax))
    return report
