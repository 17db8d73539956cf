"""Line-oriented surface syntax for specifications, queries and facts.

A specification document has four sections, in this order::

    [source]
    r1/2.
    r2/1.
    [tbox]
    Man isa Person.
    Man disjoint Woman.
    hasPart subrole relatedTo.
    funct hasHead.
    funct inv(hasHead).
    id Person hasHead.
    exists hasHead isa Person.
    [mapping]
    r1(x,y) -> G(x,y).
    r2(x) -> G(x,w).
    [query qs]
    qs(w) :- r1(z,w).
    [query nothing]
    nothing(x) :- bottom.

Identifiers in rule arguments are variables; constants are written as
quoted strings (`qs(x, "b") :- r(x).`).  Head-only variables in mapping
rules are existentially quantified.  In facts files every bare
identifier starting with a lowercase letter or digit is a constant and
uppercase-initial identifiers are rejected as variables.  Blank lines
and `#` comments are ignored.  The predicates `top` and `bottom` are
reserved builtins.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .terms import Atom, BUILTINS, CONST, Instance, Term, VAR, const, var
from .queries import (
    BOTTOM_FORM,
    NORMAL,
    TOP_FORM,
    ConjunctiveQuery,
    bottom_query,
    top_query,
)
from .chase import StTgd
from .dllite import (
    BasicConcept,
    Concept,
    Exists,
    Functional,
    Identification,
    Role,
    DisjointConcepts,
    SubConcept,
    SubRole,
    TBox,
)
from .rewriting import ObdmSpec


class ParseError(ValueError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.reason = message


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SECTION = re.compile(r"\[(source|tbox|mapping|query(?:\s+([A-Za-z_][A-Za-z0-9_]*))?)\]\s*$")


@dataclass(frozen=True)
class SpecDocument:
    source: dict[str, int]
    tbox: TBox
    mapping: tuple[StTgd, ...]
    queries: dict[str, ConjunctiveQuery]
    query_kinds: dict[str, str] = field(default_factory=dict)  # source | ontology | either

    def spec(self) -> ObdmSpec:
        return ObdmSpec(source_schema=dict(self.source), tbox=self.tbox,
                        mapping=self.mapping)


class _Cursor:
    def __init__(self, text: str, line: int):
        self.text = text
        self.line = line
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(self.line, self.pos + 1, message)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, ch: str):
        self.skip_ws()
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def try_eat(self, ch: str) -> bool:
        self.skip_ws()
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def ident(self) -> str:
        self.skip_ws()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            raise self.error("expected an identifier")
        self.pos = m.end()
        return m.group(0)

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def _parse_term(cur: _Cursor, context: str) -> Term:
    cur.skip_ws()
    if cur.peek() == '"':
        cur.pos += 1
        start = cur.pos
        while cur.pos < len(cur.text) and cur.text[cur.pos] != '"':
            cur.pos += 1
        if cur.pos >= len(cur.text):
            raise cur.error("unterminated string constant")
        label = cur.text[start:cur.pos]
        cur.pos += 1
        return const(label)
    m = re.match(r"[A-Za-z0-9_]+", cur.text[cur.pos:])
    if not m:
        raise cur.error("expected a term")
    label = m.group(0)
    cur.pos += m.end()
    if context == "fact":
        if label[0].isupper():
            raise cur.error(f"variable {label!r} in a database file")
        return const(label)
    return var(label)


def _parse_atom(cur: _Cursor, context: str) -> Atom:
    name = cur.ident()
    cur.eat("(")
    args: list[Term] = []
    if not cur.try_eat(")"):
        while True:
            args.append(_parse_term(cur, context))
            if cur.try_eat(")"):
                break
            cur.eat(",")
    return Atom(name, tuple(args))


def _parse_atom_list(cur: _Cursor, context: str) -> list[Atom]:
    atoms = [_parse_atom(cur, context)]
    while cur.try_eat(","):
        atoms.append(_parse_atom(cur, context))
    return atoms


def _parse_role(cur: _Cursor) -> Role:
    name = cur.ident()
    if name == "inv":
        cur.eat("(")
        inner = cur.ident()
        cur.eat(")")
        return Role(inner, inverse=True)
    return Role(name)


def _parse_basic_concept(cur: _Cursor) -> BasicConcept:
    cur.skip_ws()
    save = cur.pos
    name = cur.ident()
    if name == "exists":
        r = _parse_role(cur)
        return Exists(r.name, r.inverse)
    cur.pos = save
    return Concept(cur.ident())


def _strip(line: str) -> str:
    if "#" in line:
        line = line[: line.index("#")]
    return line.rstrip()


def parse_spec(text: str) -> SpecDocument:
    source: dict[str, int] = {}
    tbox_assertions: list = []
    mapping: list[StTgd] = []
    queries: dict[str, ConjunctiveQuery] = {}
    query_kinds: dict[str, str] = {}

    section: str | None = None
    section_order = {"source": 0, "tbox": 1, "mapping": 2, "query": 3}
    last_rank = -1
    pending_query: str | None = None
    pending_query_line = 0

    lines = text.splitlines()
    for line_no, raw in enumerate(lines, start=1):
        line = _strip(raw)
        if not line.strip():
            continue
        stripped = line.strip()
        m = _SECTION.match(stripped)
        if m:
            if pending_query is not None:
                raise ParseError(pending_query_line, 1,
                                 f"query section {pending_query!r} has no rule")
            kind = m.group(1).split()[0]
            rank = section_order[kind]
            if rank < last_rank or (rank == last_rank and kind != "query"):
                raise ParseError(line_no, 1,
                                 "sections must appear in order: source, tbox, mapping, queries")
            last_rank = rank
            section = kind
            if kind == "query":
                name = m.group(2)
                if not name:
                    raise ParseError(line_no, 1, "query section needs a name")
                if name in queries:
                    raise ParseError(line_no, 1, f"duplicate query name {name!r}")
                pending_query = name
                pending_query_line = line_no
            continue
        cur = _Cursor(line, line_no)
        if section is None:
            raise ParseError(line_no, 1, "content before the [source] section")
        if section == "source":
            name = cur.ident()
            cur.eat("/")
            cur.skip_ws()
            m2 = re.match(r"\d+", cur.text[cur.pos:])
            if not m2:
                raise cur.error("expected an arity")
            arity = int(m2.group(0))
            cur.pos += m2.end()
            cur.eat(".")
            if name in BUILTINS:
                raise ParseError(line_no, 1, f"{name!r} is a reserved builtin")
            if name in source:
                raise ParseError(line_no, 1, f"duplicate source relation {name!r}")
            source[name] = arity
        elif section == "tbox":
            tbox_assertions.append(_parse_tbox_line(cur))
        elif section == "mapping":
            body = _parse_atom_list(cur, "rule")
            cur.skip_ws()
            if not cur.text[cur.pos:].startswith("->"):
                raise cur.error("expected '->'")
            cur.pos += 2
            head = _parse_atom_list(cur, "rule")
            cur.eat(".")
            if not cur.at_end():
                raise cur.error("trailing content")
            _check_mapping_rule(body, head, source, line_no)
            mapping.append(StTgd(f"m{len(mapping) + 1}", tuple(body), tuple(head)))
        elif section == "query":
            if pending_query is None:
                raise ParseError(line_no, 1, "query rule outside a query section")
            q, qkind = _parse_query_rule(cur, pending_query, source)
            queries[pending_query] = q
            query_kinds[pending_query] = qkind
            pending_query = None
        else:  # pragma: no cover
            raise ParseError(line_no, 1, f"unhandled section {section!r}")

    if pending_query is not None:
        raise ParseError(pending_query_line, 1, f"query section {pending_query!r} has no rule")
    if last_rank < 0:
        raise ParseError(1, 1, "empty specification: the [source] section is missing")

    try:
        tbox = TBox(tuple(tbox_assertions))
    except ValueError as e:
        raise ParseError(1, 1, str(e)) from e
    clash = (set(source) & (tbox.concept_names | tbox.role_names))
    if clash:
        raise ParseError(1, 1, f"names used both as source relation and ontology predicate: {sorted(clash)}")
    doc = SpecDocument(source, tbox, tuple(mapping), queries, query_kinds)
    try:
        spec = doc.spec()
    except ValueError as e:
        raise ParseError(1, 1, str(e)) from e
    vocab = spec.ontology_vocabulary
    for name, q in queries.items():
        if query_kinds[name] == "ontology":
            for a in q.body:
                if a.is_builtin:
                    continue
                want = vocab.get(a.pred)
                if want is None:
                    raise ParseError(1, 1, f"query {name!r} uses undeclared predicate {a.pred!r}")
                if want != len(a.args):
                    raise ParseError(1, 1, f"arity mismatch on {a.pred!r} in query {name!r}")
    return doc


def _parse_tbox_line(cur: _Cursor):
    text = cur.text
    if re.match(r"\s*funct\b", text):
        cur.ident()  # funct
        role = _parse_role(cur)
        cur.eat(".")
        return Functional(role.name, role.inverse)
    if re.match(r"\s*id\b", text):
        cur.ident()  # id
        concept = _parse_basic_concept(cur)
        paths = [_parse_role(cur)]
        while cur.try_eat(","):
            paths.append(_parse_role(cur))
        cur.eat(".")
        return Identification(concept, tuple(paths))
    if " subrole " in text:
        sub = _parse_role(cur)
        kw = cur.ident()
        if kw != "subrole":
            raise cur.error("expected 'subrole'")
        sup = _parse_role(cur)
        cur.eat(".")
        return SubRole(sub, sup)
    left = _parse_basic_concept(cur)
    kw = cur.ident()
    if kw == "isa":
        right = _parse_basic_concept(cur)
        cur.eat(".")
        return SubConcept(left, right)
    if kw == "disjoint":
        right = _parse_basic_concept(cur)
        cur.eat(".")
        return DisjointConcepts(left, right)
    raise cur.error("expected 'isa', 'disjoint', 'subrole', 'funct' or 'id'")


def _check_mapping_rule(body: list[Atom], head: list[Atom],
                        source: dict[str, int], line_no: int):
    body_vars = {t for a in body for t in a.args if t.kind == VAR}
    for a in body:
        if a.pred in BUILTINS:
            raise ParseError(line_no, 1, "builtins cannot appear in mapping rules")
        want = source.get(a.pred)
        if want is None:
            raise ParseError(line_no, 1, f"undeclared source relation {a.pred!r}")
        if want != len(a.args):
            raise ParseError(line_no, 1, f"arity mismatch on {a.pred!r}")
    for a in head:
        if a.pred in BUILTINS:
            raise ParseError(line_no, 1, "builtins cannot appear in mapping rules")
        if a.pred in source:
            raise ParseError(line_no, 1, f"source relation {a.pred!r} in a mapping head")
    # head-only variables are existential; nothing to check for them
    del body_vars


def _parse_query_rule(cur: _Cursor, name: str, source: dict[str, int]):
    head_atom = _parse_atom(cur, "rule")
    if head_atom.pred != name:
        raise cur.error(f"query head {head_atom.pred!r} does not match section name {name!r}")
    cur.skip_ws()
    if not cur.text[cur.pos:].startswith(":-"):
        raise cur.error("expected ':-'")
    cur.pos += 2
    cur.skip_ws()
    rest = cur.text[cur.pos:]
    if rest in ("top.", "bottom."):
        q = top_query(head_atom.args) if rest == "top." else bottom_query(head_atom.args)
        return q, "either"
    body = _parse_atom_list(cur, "rule")
    cur.eat(".")
    if not cur.at_end():
        raise cur.error("trailing content")
    try:
        q = ConjunctiveQuery(head_atom.args, tuple(body), NORMAL)
    except ValueError as e:
        raise cur.error(str(e)) from e
    preds = {a.pred for a in body if a.pred not in BUILTINS}
    in_source = preds & set(source)
    if in_source and in_source != preds:
        raise cur.error("query mixes source and ontology predicates")
    if in_source:
        for a in body:
            if a.pred in BUILTINS:
                raise cur.error("builtins cannot appear in source queries")
            if source[a.pred] != len(a.args):
                raise cur.error(f"arity mismatch on {a.pred!r}")
        return q, "source"
    return q, "ontology" if preds else "either"


# --- facts files -------------------------------------------------------------


def parse_facts(text: str) -> Instance:
    atoms: list[Atom] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line.strip():
            continue
        cur = _Cursor(line, line_no)
        a = _parse_atom(cur, "fact")
        cur.eat(".")
        if not cur.at_end():
            raise cur.error("trailing content")
        atoms.append(a)
    return frozenset(atoms)


def load_db(path: str | Path) -> Instance:
    """Read a ground instance from a facts file, one `pred(c1,...,cn).`
    per line."""
    return parse_facts(Path(path).read_text(encoding="utf-8"))


# --- printing ----------------------------------------------------------------


_BARE = re.compile(r"[a-z0-9_][A-Za-z0-9_]*$")


def format_term(t: Term, context: str = "rule") -> str:
    if t.kind == VAR:
        return t.label
    if t.kind == CONST:
        if context == "rule":
            return f'"{t.label}"'
        return t.label if _BARE.match(t.label) else f'"{t.label}"'
    return t.label  # nulls print bare; they only appear in traces and facts


def format_atom(a: Atom, context: str = "rule") -> str:
    return f"{a.pred}({', '.join(format_term(t, context) for t in a.args)})"


def format_fact(a: Atom) -> str:
    return format_atom(a, "fact") + "."


def format_role(r: Role) -> str:
    return f"inv({r.name})" if r.inverse else r.name


def format_basic_concept(b: BasicConcept) -> str:
    if isinstance(b, Concept):
        return b.name
    return f"exists {format_role(Role(b.role, b.inverse))}"


def format_tbox_assertion(a) -> str:
    if isinstance(a, SubConcept):
        return f"{format_basic_concept(a.sub)} isa {format_basic_concept(a.sup)}."
    if isinstance(a, DisjointConcepts):
        return f"{format_basic_concept(a.left)} disjoint {format_basic_concept(a.right)}."
    if isinstance(a, SubRole):
        return f"{format_role(a.sub)} subrole {format_role(a.sup)}."
    if isinstance(a, Functional):
        return f"funct {format_role(Role(a.role, a.inverse))}."
    if isinstance(a, Identification):
        paths = ", ".join(format_role(p) for p in a.paths)
        return f"id {format_basic_concept(a.concept)} {paths}."
    raise ValueError(f"{type(a).__name__} has no surface syntax")


def format_query(name: str, q: ConjunctiveQuery) -> str:
    head = ", ".join(format_term(t) for t in q.head)
    if q.form == TOP_FORM:
        return f"{name}({head}) :- top."
    if q.form == BOTTOM_FORM:
        return f"{name}({head}) :- bottom."
    body = ", ".join(format_atom(a) for a in q.body)
    return f"{name}({head}) :- {body}."


def print_spec(doc: SpecDocument) -> str:
    out = ["[source]"]
    out += [f"{name}/{arity}." for name, arity in doc.source.items()]
    out.append("[tbox]")
    out += [format_tbox_assertion(a) for a in doc.tbox.assertions]
    out.append("[mapping]")
    for tgd in doc.mapping:
        body = ", ".join(format_atom(a) for a in tgd.body)
        head = ", ".join(format_atom(a) for a in tgd.head)
        out.append(f"{body} -> {head}.")
    for name, q in doc.queries.items():
        out.append(f"[query {name}]")
        out.append(format_query(name, q))
    return "\n".join(out) + "\n"
