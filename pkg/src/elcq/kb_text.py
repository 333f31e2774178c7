"""Line-oriented KB format, the query format, and fact dumps."""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import kb as K
from .query import CQ, QAtom, Var

KEYWORDS = frozenset({"SubClassOf", "SubRoleOf", "and", "some", "range", "transitive",
                      "reflexive", "self", "TBOX", "ABOX"})
_IDENT = r"[A-Za-z0-9_][A-Za-z0-9_.\-]*"
_IDENT_RE = re.compile(_IDENT + r"\Z")
_ASSERT_RE = re.compile(rf"\s*({_IDENT})\s*\(\s*({_IDENT})\s*(?:,\s*({_IDENT})\s*)?\)\s*\Z")


@dataclass
class ParseError(ValueError):
    line: int
    column: int
    message: str
    snippet: str = ""

    def __str__(self):
        return f"line {self.line}, column {self.column}: {self.message}: {self.snippet.strip()}"


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def _ident(tok: str, lineno: int, raw: str) -> str:
    if not _IDENT_RE.match(tok) or tok in KEYWORDS:
        col = raw.find(tok) + 1 if tok else len(raw.rstrip()) + 1
        raise ParseError(lineno, max(col, 1), f"expected a name, got {tok!r}", raw)
    return tok


def _parse_axiom(toks: list[str], lineno: int, raw: str):
    n = len(toks)

    def name(i):
        if i >= n:
            raise ParseError(lineno, len(raw.rstrip()) + 1, "unexpected end of line", raw)
        return _ident(toks[i], lineno, raw)

    def expect_len(k):
        if n != k:
            raise ParseError(lineno, 1, f"malformed axiom ({n} tokens)", raw)

    if n == 2 and toks[0] in ("transitive", "reflexive"):
        return (K.Transitive if toks[0] == "transitive" else K.Reflexive)(name(1))
    if n == 3 and toks[0] == "range":
        return K.Range(name(1), name(2))
    if n >= 3 and toks[1] == "SubRoleOf":
        expect_len(3)
        return K.SubRole(name(0), name(2))
    if toks[0] == "some":
        expect_len(5)
        if toks[3] != "SubClassOf":
            raise ParseError(lineno, 1, "expected SubClassOf", raw)
        return K.ExistsSub(name(1), name(2), name(4))
    if toks[0] == "self":
        expect_len(4)
        if toks[2] != "SubClassOf":
            raise ParseError(lineno, 1, "expected SubClassOf", raw)
        return K.SelfSub(name(1), name(3))
    if n >= 2 and toks[1] == "and":
        expect_len(5)
        if toks[3] != "SubClassOf":
            raise ParseError(lineno, 1, "expected SubClassOf", raw)
        return K.Conjunction(name(0), name(2), name(4))
    if n >= 2 and toks[1] == "SubClassOf":
        rhs = toks[2:]
        if rhs[:1] == ["some"]:
            expect_len(5)
            return K.ExistsSup(name(0), name(3), name(4))
        if rhs[:1] == ["self"]:
            expect_len(4)
            return K.SelfSup(name(0), name(3))
        if rhs[:1] == ["{"]:
            if n != 5 or toks[4] != "}":
                raise ParseError(lineno, 1, "malformed nominal", raw)
            return K.Nominal(name(0), name(3))
        expect_len(3)
        return K.SubClass(name(0), name(2))
    raise ParseError(lineno, 1, "unknown statement", raw)


def parse_kb(text: str) -> K.KB:
    tbox, abox = [], []
    section = "TBOX"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line in ("TBOX", "ABOX"):
            section = line
            continue
        if section == "ABOX":
            m = _ASSERT_RE.match(line)
            if not m or any(g in KEYWORDS for g in m.groups() if g):
                raise ParseError(lineno, 1, "malformed assertion", raw)
            p, a, b = m.groups()
            abox.append(K.ConceptAssertion(p, a) if b is None else K.RoleAssertion(p, a, b))
        else:
            toks = line.replace("{", " { ").replace("}", " } ").split()
            tbox.append(_parse_axiom(toks, lineno, raw))
    return K.KB.of(tbox, abox)


def format_axiom(ax) -> str:
    if isinstance(ax, K.SubClass):
        return f"{ax.sub} SubClassOf {ax.sup}"
    if isinstance(ax, K.Nominal):
        return f"{ax.sub} SubClassOf {{ {ax.individual} }}"
    if isinstance(ax, K.Conjunction):
        return f"{ax.left} and {ax.right} SubClassOf {ax.sup}"
    if isinstance(ax, K.ExistsSub):
        return f"some {ax.role} {ax.filler} SubClassOf {ax.sup}"
    if isinstance(ax, K.SubRole):
        return f"{ax.sub} SubRoleOf {ax.sup}"
    if isinstance(ax, K.Range):
        return f"range {ax.role} {ax.concept}"
    if isinstance(ax, K.ExistsSup):
        return f"{ax.sub} SubClassOf some {ax.role} {ax.filler}"
    if isinstance(ax, K.Transitive):
        return f"transitive {ax.role}"
    if isinstance(ax, K.Reflexive):
        return f"reflexive {ax.role}"
    if isinstance(ax, K.SelfSup):
        return f"{ax.sub} SubClassOf self {ax.role}"
    if isinstance(ax, K.SelfSub):
        return f"self {ax.role} SubClassOf {ax.sup}"
    raise TypeError(ax)


def serialize_kb(kb: K.KB) -> str:
    lines = ["TBOX"] + [format_axiom(ax) for ax in kb.sorted_tbox()]
    lines += ["ABOX"] + [str(at) for at in kb.sorted_abox()]
    return "\n".join(lines) + "\n"


# -- queries -------------------------------------------------------------------

_HEAD_RE = re.compile(rf"\s*({_IDENT})\s*\(([^)]*)\)\s*:-(.*)\Z", re.S)
_QATOM_RE = re.compile(rf"\s*({_IDENT})\s*\(([^)]*)\)\s*")
_VAR_RE = re.compile(rf"\?({_IDENT})\Z")


def _query_term(tok: str, lineno: int, raw: str):
    tok = tok.strip()
    m = _VAR_RE.match(tok)
    if m:
        return Var(m.group(1))
    return _ident(tok, lineno, raw)


def parse_query(text: str) -> CQ:
    body_lines = [(_strip_comment(l), i) for i, l in enumerate(text.splitlines(), 1)]
    first = next((i for l, i in body_lines if l.strip()), 1)
    src = " ".join(l for l, _ in body_lines).strip()
    raw = text.strip()
    if not src.endswith("."):
        raise ParseError(first, max(len(src), 1), "query must end with '.'", raw)
    m = _HEAD_RE.match(src[:-1])
    if not m:
        raise ParseError(first, 1, "expected 'name(?v, ...) :- body .'", raw)
    name, head, body = m.groups()
    head_vars = []
    for tok in filter(None, (t.strip() for t in head.split(","))):
        v = _query_term(tok, first, raw)
        if not isinstance(v, Var):
            raise ParseError(first, src.find(tok) + 1, "head terms must be variables", raw)
        head_vars.append(v)
    atoms = []
    rest = body.strip()
    while rest:
        am = _QATOM_RE.match(rest)
        if not am:
            raise ParseError(first, src.find(rest) + 1, "malformed atom", raw)
        args = [a for a in am.group(2).split(",")]
        if len(args) not in (1, 2) or not all(a.strip() for a in args):
            raise ParseError(first, src.find(rest) + 1, "atoms are unary or binary", raw)
        pred = _ident(am.group(1), first, raw)
        atoms.append(QAtom(pred, tuple(_query_term(a, first, raw) for a in args)))
        rest = rest[am.end():]
        if rest.startswith(","):
            rest = rest[1:].strip()
            if not rest:
                raise ParseError(first, len(src), "dangling ','", raw)
        elif rest:
            raise ParseError(first, src.find(rest) + 1, "expected ','", raw)
    if not atoms:
        raise ParseError(first, len(src), "empty query body", raw)
    q = CQ.of(head_vars, atoms, name)
    missing = [v for v in head_vars if v not in q.vars]
    if missing:
        raise ParseError(first, 1, f"head variable {missing[0]} does not occur in the body", raw)
    if len(set(head_vars)) != len(head_vars):
        raise ParseError(first, 1, "repeated head variable", raw)
    return q


def print_query(q: CQ) -> str:
    return str(q) + "\n"


# -- fact dumps ---------------------------------------------------------------

def render_term(t) -> str:
    return str(t)


def serialize_facts(store) -> str:
    """One fact per line in code-point order, then `eq member representative` lines."""
    lines = []
    for atom in store.all_facts():
        lines.append(f"{atom.pred}({', '.join(render_term(t) for t in atom.args)})")
    for rep, members in store.eq_classes().items():
        for m in members:
            if m != rep:
                lines.append(f"eq {render_term(m)} {render_term(rep)}")
    lines.sort()
    return "".join(l + "\n" for l in lines)
