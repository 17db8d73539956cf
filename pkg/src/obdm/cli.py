"""Command-line front end.

Every subcommand reads a specification document; output is canonically
ordered and byte-stable across runs.  Exit codes: 0 for success or an
affirmative verdict, 1 for a negative verdict, 2 for usage, parse or
contract errors (diagnostics on stderr).  ``--format json`` emits a
single object with ``format_version: 1``; the field layout is described
in the README.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .terms import Atom, Instance, Term, sorted_atoms, term_key
from .queries import (
    BOTTOM_FORM,
    NORMAL,
    TOP_FORM,
    ConjunctiveQuery,
    Disjunct,
    UnionQuery,
    instance_of_query,
)
from .chase import abox_of
from .dllite import build_qsat, certain_answers_kb, kb_satisfiable, perfect_reformulation
from .rewriting import check_complete, find_optimal_complete
from .oracle import Budget, oracle_check
from .dsl import (
    ParseError,
    SpecDocument,
    format_atom,
    format_fact,
    format_query,
    load_db,
    parse_spec,
)

FORMAT_VERSION = 1


def _load_document(path: str) -> SpecDocument:
    return parse_spec(Path(path).read_text(encoding="utf-8"))


def _named_query(doc: SpecDocument, name: str, want: str) -> ConjunctiveQuery:
    q = doc.queries.get(name)
    if q is None:
        raise ValueError(f"unknown query {name!r}")
    kind = doc.query_kinds.get(name, "either")
    if want == "source" and kind != "source":
        raise ValueError(f"query {name!r} is not a source query")
    if want == "ontology" and kind not in ("ontology", "either"):
        raise ValueError(f"query {name!r} is not an ontology query")
    return q


def _format_disjunct(d: Disjunct) -> str:
    q = d.query
    head = ", ".join(t.label for t in q.head)
    body = ", ".join(format_atom(a) for a in q.body)
    if d.inequality is not None:
        t1, t2 = d.inequality
        body += f", {t1.label} != {t2.label}"
    return f"({head}) :- {body}."


def _ucq_lines(Q: UnionQuery) -> list[str]:
    return [_format_disjunct(d) for d in Q] or ["(none)"]


def _atom_json(a: Atom) -> dict:
    return {"pred": a.pred, "args": [t.label for t in a.args]}


def _tuples_text(tuples: set[tuple[Term, ...]]) -> list[str]:
    rows = sorted(tuples, key=lambda t: tuple(term_key(x) for x in t))
    return [f"({', '.join(x.label for x in t)})" for t in rows] or ["(no answers)"]


def _emit(out, payload: dict, text_lines: list[str], fmt: str):
    if fmt == "json":
        payload = {"format_version": FORMAT_VERSION, **payload}
        print(json.dumps(payload, indent=2, sort_keys=True), file=out)
    else:
        for line in text_lines:
            print(line, file=out)


def _cmd_validate(args, out) -> int:
    doc = _load_document(args.spec)
    payload = {
        "command": "validate",
        "ok": True,
        "source_relations": len(doc.source),
        "tbox_assertions": len(doc.tbox.assertions),
        "mapping_rules": len(doc.mapping),
        "queries": list(doc.queries),
    }
    lines = [
        "OK",
        f"source relations: {len(doc.source)}",
        f"tbox assertions: {len(doc.tbox.assertions)}",
        f"mapping rules: {len(doc.mapping)}",
        f"queries: {', '.join(doc.queries) if doc.queries else '(none)'}",
    ]
    _emit(out, payload, lines, args.format)
    return 0


def _cmd_chase(args, out) -> int:
    doc = _load_document(args.spec)
    q = _named_query(doc, args.query, "source")
    spec = doc.spec()
    spec.check_source_query(q)
    trace_lines: list[str] = []
    trace = trace_lines.append if args.trace else None
    ioq = instance_of_query(q)
    res = abox_of(ioq.instance, spec.mapping, spec.tbox, trace=trace)
    lines = list(trace_lines)
    if res.failed:
        lines.append("BOTTOM")
        payload = {"command": "chase", "bottom": True, "abox": None, "psi": None,
                   "trace": trace_lines if args.trace else None}
    else:
        atom_lines = [format_fact(a) for a in sorted_atoms(res.abox)]
        lines += atom_lines or ["(no atoms)"]
        psi_items = sorted(res.psi.items(), key=lambda kv: term_key(kv[0]))
        lines += [f"psi: {k.label} -> {v.label}" for k, v in psi_items]
        payload = {
            "command": "chase",
            "bottom": False,
            "abox": [_atom_json(a) for a in sorted_atoms(res.abox)],
            "psi": {k.label: v.label for k, v in psi_items},
            "trace": trace_lines if args.trace else None,
        }
    _emit(out, payload, lines, args.format)
    return 0


def _cmd_qsat(args, out) -> int:
    doc = _load_document(args.spec)
    q0, q1 = build_qsat(doc.tbox)
    lines = ["qsat0:"] + _ucq_lines(q0) + ["qsat1:"] + _ucq_lines(q1)
    payload = {
        "command": "qsat",
        "qsat0": [_format_disjunct(d) for d in q0],
        "qsat1": [_format_disjunct(d) for d in q1],
    }
    _emit(out, payload, lines, args.format)
    return 0


def _cmd_perfect_ref(args, out) -> int:
    doc = _load_document(args.spec)
    q = _named_query(doc, args.onto_query, "ontology")
    if q.form != NORMAL:
        raise ValueError("perfect reformulation expects a normal conjunctive query")
    ref = perfect_reformulation(doc.tbox, q)
    lines = [format_query(args.onto_query, d.query) for d in ref]
    payload = {"command": "perfect-ref", "disjuncts": lines}
    _emit(out, payload, lines, args.format)
    return 0


def _cmd_cert(args, out) -> int:
    doc = _load_document(args.spec)
    q = _named_query(doc, args.onto_query, "ontology")
    abox = load_db(args.db)
    vocab = doc.spec().ontology_vocabulary
    for a in abox:
        want = vocab.get(a.pred)
        if want is None:
            raise ValueError(f"database fact uses unknown ontology predicate {a.pred!r}")
        if want != len(a.args):
            raise ValueError(f"arity mismatch on {a.pred!r} in the database")
    if not kb_satisfiable(doc.tbox, abox):
        payload = {"command": "cert", "satisfiable": False, "answers": None}
        _emit(out, payload, ["UNSATISFIABLE"], args.format)
        return 1
    answers = certain_answers_kb(doc.tbox, abox, q)
    payload = {
        "command": "cert",
        "satisfiable": True,
        "answers": sorted([x.label for x in t] for t in answers),
    }
    _emit(out, payload, _tuples_text(answers), args.format)
    return 0


def _cmd_check_complete(args, out) -> int:
    doc = _load_document(args.spec)
    qs = _named_query(doc, args.source_query, "source")
    qg = _named_query(doc, args.onto_query, "ontology")
    verdict = check_complete(doc.spec(), qs, qg)
    payload = {"command": "check-complete", "complete": verdict}
    _emit(out, payload, ["COMPLETE" if verdict else "NOT COMPLETE"], args.format)
    return 0 if verdict else 1


def _cmd_find_complete(args, out) -> int:
    doc = _load_document(args.spec)
    qs = _named_query(doc, args.source_query, "source")
    q = find_optimal_complete(doc.spec(), qs)
    rendered = format_query("qg", q)
    if q.form == TOP_FORM:
        lines = ["TOP-QUERY"]
    elif q.form == BOTTOM_FORM:
        lines = ["BOTTOM-QUERY"]
    else:
        lines = [rendered]
    payload = {"command": "find-complete", "form": q.form, "query": rendered}
    _emit(out, payload, lines, args.format)
    return 0


def _parse_budget(text: str | None) -> Budget:
    if not text:
        return Budget()
    kwargs: dict = {}
    for part in text.split(","):
        if "=" not in part:
            raise ValueError(f"budget entries look like key=value, got {part!r}")
        key, value = part.split("=", 1)
        key = key.strip()
        n = int(value)
        if key == "pool":
            kwargs["const_pool"] = tuple(f"v{i}" for i in range(1, n + 1))
        elif key == "atoms":
            kwargs["max_model_atoms"] = n
        elif key == "extra":
            kwargs["extra_domain"] = tuple(f"f{i}" for i in range(1, n + 1))
        elif key == "depth":
            kwargs["canonical_depth"] = n
        else:
            raise ValueError(f"unknown budget key {key!r} (use pool, atoms, extra, depth)")
    return Budget(**kwargs)


def _cmd_oracle(args, out) -> int:
    doc = _load_document(args.spec)
    qs = _named_query(doc, args.source_query, "source")
    qg = _named_query(doc, args.onto_query, "ontology")
    budget = _parse_budget(args.budget)
    source_db: Instance | None = load_db(args.db) if args.db else None
    verdict = oracle_check(doc.spec(), qs, qg, args.variant, args.semantics,
                           budget, source_db=source_db)
    lines = [f"holds: {'true' if verdict.complete else 'false'}"]
    payload = {
        "command": "oracle",
        "variant": args.variant,
        "semantics": args.semantics,
        "holds": verdict.complete,
        "witness": None,
    }
    if verdict.witness is not None:
        w = verdict.witness
        if w.valuation:
            lines.append("valuation: " + ", ".join(f"{k} -> {v}" for k, v in w.valuation))
        if w.model is not None:
            lines.append("model:")
            lines += [f"  {format_fact(a)}" for a in sorted_atoms(w.model)]
        if w.detail:
            lines.append(f"detail: {w.detail}")
        payload["witness"] = {
            "valuation": {k: v for k, v in w.valuation},
            "model": [_atom_json(a) for a in sorted_atoms(w.model)] if w.model is not None else None,
            "detail": w.detail,
        }
    _emit(out, payload, lines, args.format)
    return 0 if verdict.complete else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obdm",
        description="Source-to-target rewriting over OBDM specifications.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, **extra_args):
        p = sub.add_parser(name)
        p.add_argument("spec", help="specification document")
        p.add_argument("--format", choices=("text", "json"), default="text")
        for flag, kw in extra_args.items():
            p.add_argument(flag, **kw)
        p.set_defaults(func=func)
        return p

    add("validate", _cmd_validate)
    add("chase", _cmd_chase,
        **{"--query": dict(required=True), "--trace": dict(action="store_true")})
    add("qsat", _cmd_qsat)
    add("perfect-ref", _cmd_perfect_ref, **{"--onto-query": dict(required=True)})
    add("cert", _cmd_cert,
        **{"--db": dict(required=True), "--onto-query": dict(required=True)})
    add("check-complete", _cmd_check_complete,
        **{"--source-query": dict(required=True), "--onto-query": dict(required=True)})
    add("find-complete", _cmd_find_complete, **{"--source-query": dict(required=True)})
    add("oracle", _cmd_oracle, **{
        "--source-query": dict(required=True),
        "--onto-query": dict(required=True),
        "--variant": dict(choices=("complete", "sound", "exact"), default="complete"),
        "--semantics": dict(choices=("model", "cert"), default="model"),
        "--budget": dict(default=None, help="pool=3,atoms=6,extra=2,depth=4"),
        "--db": dict(default=None, help="fix the source database instead of enumerating valuations"),
    })
    return parser


def cli_dispatch(argv: list[str], out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args, out)
    except (ParseError, ValueError, OSError) as e:
        print(f"error: {e}", file=err)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
