"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 malformed or invalid input, 3 resource limit.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import kb as K
from .answer import certain_answers, prepare
from .arborescent import ShapeError, classify_query
from .bench import BenchSpec, bench_queries, gen_bench
from .chase import DEFAULT_DEPTH_LIMIT, DEFAULT_FACT_LIMIT, oracle_answers
from .filter import DEFAULT_BRANCH_CAP
from .hardgen import GENERATORS, parse_dimacs
from .kb_text import ParseError, parse_kb, parse_query, print_query, serialize_facts, serialize_kb
from .materialize import ResourceLimit, atom_counts, is_unsatisfiable, materialize
from .translate import build_datalog, build_xi

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3
UNSAT_BANNER = "unsatisfiable: every tuple is a certain answer"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="elcq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", metavar="command", parser_class=_Parser)
    sub.required = True

    def common(sp, query=False):
        sp.add_argument("kb", help="KB file")
        if query:
            sp.add_argument("query", help="query file")
        sp.add_argument("--strict", action="store_true",
                        help="treat warnings (e.g. query symbols unknown to the KB) as errors")
        sp.add_argument("--format", choices=("text", "json"), default="text")

    common(sub.add_parser("check", help="satisfiability verdict"))
    common(sub.add_parser("materialize", help="dump the materialisation with statistics"))
    sp = sub.add_parser("answer", help="certain answers with search statistics")
    common(sp, query=True)
    sp.add_argument("--branch-cap", type=_positive, default=DEFAULT_BRANCH_CAP)
    sp.add_argument("--jobs", type=_positive, default=1)
    sp = sub.add_parser("classify", help="query shape: cyclic, acyclic or arborescent")
    sp.add_argument("query")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp = sub.add_parser("oracle", help="answers over a bounded chase")
    common(sp, query=True)
    sp.add_argument("--depth", type=_positive, default=DEFAULT_DEPTH_LIMIT)
    sp.add_argument("--max-facts", type=_positive, default=DEFAULT_FACT_LIMIT)
    sp = sub.add_parser("gen-hard", help="hard KB/query pair from a CNF formula")
    sp.add_argument("kind", choices=sorted(GENERATORS))
    sp.add_argument("--cnf", required=True, help="DIMACS file, or inline DIMACS text")
    sp.add_argument("--out", help="write OUT.kb and OUT.q instead of printing")
    sp = sub.add_parser("gen-bench", help="synthetic benchmark KB and query templates")
    sp.add_argument("--scale", type=_positive, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--depth", type=_positive, default=3)
    sp.add_argument("--out", default=".", help="output directory")
    return p


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_kb(path: str) -> K.KB:
    kb = parse_kb(_read(path))
    diags = K.validate_kb(kb)
    if diags:
        raise K.ValidationFailed(diags)
    return kb


def _warn_query(kb: K.KB, q, strict: bool):
    sig = kb.signature
    known = sig.concepts | sig.roles | {K.TOP, K.BOT}
    unknown = sorted({a.pred for a in q.atoms} - known)
    for name in unknown:
        msg = f"query predicate {name} does not occur in the KB"
        if strict:
            raise K.ValidationFailed([K.Diagnostic("unknown-symbol", msg)])
        print(f"warning: {msg}", file=sys.stderr)


def _render_tuple(t) -> str:
    return "(" + ", ".join(map(str, t)) + ")"


def _emit(args, payload: dict, text: str):
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    kb = _load_kb(args.kb)
    unsat = is_unsatisfiable(prepare(kb))
    verdict = "unsatisfiable" if unsat else "satisfiable"
    _emit(args, {"satisfiable": not unsat}, verdict + "\n")
    return EXIT_OK


def cmd_materialize(args) -> int:
    kb = _load_kb(args.kb)
    store, stats = materialize(build_datalog(kb))
    before = len(kb.abox)
    counts = atom_counts(store)
    ratio = counts["total"] / before if before else 0.0
    info = {"before": before, "after": counts["total"], "ratio": round(ratio, 4),
            "unary": counts["unary"], "binary": counts["binary"],
            "individuals": counts["individuals"], "derived": stats.derived,
            "merges": stats.merges, "wall_ms": round(stats.wall_ms, 2),
            "unsat": is_unsatisfiable(store)}
    facts = serialize_facts(store)
    text = facts + "".join(f"# {k}: {json.dumps(v)}\n" for k, v in info.items())
    _emit(args, {"facts": facts.splitlines(), "stats": info}, text)
    return EXIT_OK


def cmd_answer(args) -> int:
    kb = _load_kb(args.kb)
    q = parse_query(_read(args.query))
    _warn_query(kb, q, args.strict)
    res = certain_answers(kb, q, jobs=args.jobs, branch_cap=args.branch_cap)
    if res.unsatisfiable:
        _emit(args, res.stats.as_json(None, unsat=True), UNSAT_BANNER + "\n")
        return EXIT_OK
    rows = res.sorted()
    payload = res.stats.as_json(None)
    payload["answers"] = [list(r) for r in rows]
    if q.is_boolean:
        lines = ["true" if rows else "false"]
    else:
        lines = [_render_tuple(r) for r in rows]
    stats = res.stats.as_json(len(rows))
    _emit(args, payload, "".join(l + "\n" for l in lines) + "stats: " + json.dumps(stats) + "\n")
    return EXIT_OK


def cmd_classify(args) -> int:
    q = parse_query(_read(args.query))
    shape = classify_query(q)
    payload = {"shape": shape.kind, "root": None if shape.root is None else str(shape.root)}
    _emit(args, payload, shape.kind + "\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    kb = _load_kb(args.kb)
    q = parse_query(_read(args.query))
    _warn_query(kb, q, args.strict)
    res = oracle_answers(build_xi(kb), q, depth_limit=args.depth, fact_limit=args.max_facts)
    inst = res.instance
    payload = {"answers": sorted(list(t) for t in res.answers), "complete": res.complete,
               "unsat": res.unsatisfiable, "depth_reached": inst.depth_reached,
               "facts": len(inst.facts)}
    if res.unsatisfiable:
        text = UNSAT_BANNER + "\n"
    elif q.is_boolean:
        text = ("true" if res.answers else "false") + "\n"
    else:
        text = "".join(_render_tuple(t) + "\n" for t in sorted(res.answers))
    text += f"complete: {str(res.complete).lower()}\n"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_gen_hard(args) -> int:
    src = _read(args.cnf) if os.path.exists(args.cnf) else args.cnf
    try:
        phi = parse_dimacs(src)
    except ValueError as e:
        raise ParseError(1, 1, str(e), src.splitlines()[0] if src else "") from None
    inst = GENERATORS[args.kind](phi)
    kb_text, q_text = serialize_kb(inst.kb), print_query(inst.query)
    if args.out:
        with open(args.out + ".kb", "w", encoding="utf-8") as fh:
            fh.write(kb_text)
        with open(args.out + ".q", "w", encoding="utf-8") as fh:
            fh.write(q_text)
    else:
        sys.stdout.write(kb_text + "# query\n# " + q_text)
    return EXIT_OK


def cmd_gen_bench(args) -> int:
    spec = BenchSpec(scale=args.scale, seed=args.seed, depth=args.depth)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "bench.kb"), "w", encoding="utf-8") as fh:
        fh.write(serialize_kb(gen_bench(spec)))
    for name, q in bench_queries().items():
        with open(os.path.join(args.out, name + ".q"), "w", encoding="utf-8") as fh:
            fh.write(print_query(q))
    return EXIT_OK


COMMANDS = {"check": cmd_check, "materialize": cmd_materialize, "answer": cmd_answer,
            "classify": cmd_classify, "oracle": cmd_oracle, "gen-hard": cmd_gen_hard,
            "gen-bench": cmd_gen_bench}


def run(argv: Optional[list] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.cmd](args)
    except (ParseError, K.ValidationFailed, ShapeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_LIMIT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
