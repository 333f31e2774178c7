"""Deterministic synthetic university benchmark with a transitive sub-organisation role."""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import kb as K
from .query import CQ, QAtom, Var

SUB_ORG = "subOrganizationOf"


@dataclass(frozen=True)
class BenchSpec:
    scale: int = 1   # number of universities
    seed: int = 0
    depth: int = 3   # length of each research-group sub-organisation chain

    def __post_init__(self):
        if self.scale < 1 or self.depth < 1:
            raise ValueError("scale and depth must be positive")


BASE_TBOX = [
    K.SubClass("University", "Organization"),
    K.SubClass("Department", "Organization"),
    K.SubClass("ResearchGroup", "Organization"),
    K.SubClass("FullProfessor", "Professor"),
    K.SubClass("AssistantProfessor", "Professor"),
    K.SubClass("Professor", "Faculty"),
    K.SubClass("Faculty", "Employee"),
    K.SubClass("Employee", "Person"),
    K.SubClass("GraduateStudent", "Student"),
    K.SubClass("Student", "Person"),
    K.SubClass("Chair", "Professor"),
    K.Conjunction("Employee", "Student", "TeachingAssistant"),
    K.ExistsSub("headOf", "Department", "Chair"),
    K.ExistsSub("takesCourse", "Course", "Student"),
    K.SubRole("headOf", "worksFor"),
    K.Range("worksFor", "Organization"),
    K.Range("takesCourse", "Course"),
    K.ExistsSup("Department", SUB_ORG, "University"),
    K.ExistsSup("Student", "takesCourse", "Course"),
    K.ExistsSup("Faculty", "worksFor", "Department"),
    K.Transitive(SUB_ORG),
]
# the two axioms added on top of the base schema
EXTRA_TBOX = [
    K.SubRole("worksFor", "memberOf"),
    K.ExistsSup("ResearchGroup", SUB_ORG, "Department"),
]

DEPARTMENTS = 3
GROUPS = 2
FACULTY = 4
STUDENTS = 8
COURSES = 3


def gen_bench(spec: BenchSpec) -> K.KB:
    """KB whose ABox grows linearly in `spec.scale`; identical for identical specs."""
    rng = random.Random(spec.seed)
    abox = []

    def c(concept, ind):
        abox.append(K.ConceptAssertion(concept, ind))

    def r(rl, a, b):
        abox.append(K.RoleAssertion(rl, a, b))

    for u in range(spec.scale):
        univ = f"u{u}"
        c("University", univ)
        for d in range(DEPARTMENTS):
            dept = f"u{u}d{d}"
            c("Department", dept)
            if d:  # the first department's university is left implicit
                r(SUB_ORG, dept, univ)
            for g in range(GROUPS):
                up = dept
                for k in range(spec.depth):
                    grp = f"{dept}g{g}l{k}"
                    c("ResearchGroup", grp)
                    r(SUB_ORG, grp, up)
                    up = grp
            courses = [f"{dept}c{i}" for i in range(COURSES)]
            for crs in courses:
                c("Course", crs)
            for f in range(FACULTY):
                fac = f"{dept}f{f}"
                c("FullProfessor" if f == 0 else rng.choice(["AssistantProfessor", "Faculty"]), fac)
                if f == 0:
                    r("headOf", fac, dept)
                else:
                    r("worksFor", fac, dept)
            for s in range(STUDENTS):
                st = f"{dept}s{s}"
                c(rng.choice(["Student", "GraduateStudent"]), st)
                if rng.random() < 0.5:
                    r("takesCourse", st, rng.choice(courses))
                if s == 0:
                    c("Employee", st)
                    r("worksFor", st, dept)
    return K.KB.of(BASE_TBOX + EXTRA_TBOX, abox)


def _q(name, head, atoms):
    v = {n: Var(n) for n in "xyz"}
    return CQ.of([v[h] for h in head],
                 [QAtom(p, tuple(v[t] for t in args)) for p, args in atoms], name)


def bench_queries() -> dict[str, CQ]:
    """Five query templates; only `q3` uses the transitive role."""
    return {
        "q1": _q("q1", "x", [("Student", "x"), ("takesCourse", "xy")]),
        "q2": _q("q2", "xy", [("Professor", "x"), ("worksFor", "xy"), ("Department", "y")]),
        "q3": _q("q3", "x", [("ResearchGroup", "x"), (SUB_ORG, "xz"), ("University", "z")]),
        "q4": _q("q4", "x", [("Chair", "x"), ("memberOf", "xy"), ("Organization", "y")]),
        "q5": _q("q5", "x", [("TeachingAssistant", "x"), ("memberOf", "xy"),
                             ("Department", "y")]),
    }
