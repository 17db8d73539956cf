"""Conjunctive queries, unions of CQs, and the instance/query duality.

A query whose form is ``top`` or ``bottom`` stands for the trivially
all-accepting or all-rejecting query of its head arity; its body is the
single builtin atom over the whole head tuple.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    BOTTOM,
    CONST,
    NULL_D,
    NULL_S,
    TOP,
    VAR,
    Atom,
    Instance,
    NullMinter,
    Term,
    atom_key,
    term_key,
    var,
)

NORMAL = "normal"
TOP_FORM = "top"
BOTTOM_FORM = "bottom"


@dataclass(frozen=True)
class ConjunctiveQuery:
    head: tuple[Term, ...]
    body: tuple[Atom, ...]
    form: str = NORMAL

    def __post_init__(self):
        if self.form == NORMAL:
            body_vars = {t for a in self.body for t in a.args if t.kind == VAR}
            for t in self.head:
                if t.kind == VAR and t not in body_vars:
                    raise ValueError(f"unsafe head variable {t.label!r}")
                if t.kind not in (VAR, CONST):
                    raise ValueError("query heads hold variables and constants only")
        elif self.form in (TOP_FORM, BOTTOM_FORM):
            want = TOP if self.form == TOP_FORM else BOTTOM
            if self.body != (Atom(want, self.head),):
                raise ValueError(f"{self.form} query body must be the single {want} atom")
        else:
            raise ValueError(f"unknown query form {self.form!r}")

    @property
    def arity(self) -> int:
        return len(self.head)

    def variables(self) -> set[Term]:
        vs = {t for a in self.body for t in a.args if t.kind == VAR}
        vs |= {t for t in self.head if t.kind == VAR}
        return vs


def cq(head: tuple[Term, ...], body: tuple[Atom, ...]) -> ConjunctiveQuery:
    return ConjunctiveQuery(tuple(head), tuple(body), NORMAL)


def top_query(head: tuple[Term, ...]) -> ConjunctiveQuery:
    head = tuple(head)
    return ConjunctiveQuery(head, (Atom(TOP, head),), TOP_FORM)


def bottom_query(head: tuple[Term, ...]) -> ConjunctiveQuery:
    head = tuple(head)
    return ConjunctiveQuery(head, (Atom(BOTTOM, head),), BOTTOM_FORM)


@dataclass(frozen=True)
class Disjunct:
    query: ConjunctiveQuery
    inequality: tuple[Term, Term] | None = None

    def __post_init__(self):
        if self.inequality is not None:
            body_terms = {t for a in self.query.body for t in a.args}
            for t in self.inequality:
                if t not in body_terms:
                    raise ValueError(f"inequality term {t!r} not in disjunct body")


@dataclass(frozen=True)
class UnionQuery:
    disjuncts: tuple[Disjunct, ...] = ()

    def __post_init__(self):
        arities = {d.query.arity for d in self.disjuncts}
        if len(arities) > 1:
            raise ValueError("disjuncts must share head arity")

    def __iter__(self):
        return iter(self.disjuncts)

    def __len__(self) -> int:
        return len(self.disjuncts)


def union_of(*queries: ConjunctiveQuery) -> UnionQuery:
    return UnionQuery(tuple(Disjunct(q) for q in queries))


@dataclass(frozen=True)
class QueryInstance:
    """Result of turning a query into an instance: the atoms, the head
    tuple re-expressed over the instance, and the variable renaming."""

    instance: Instance
    head: tuple[Term, ...]
    var_to_null: dict[Term, Term] = field(compare=False, hash=False, default_factory=dict)


def instance_of_query(q: ConjunctiveQuery, minter: NullMinter | None = None) -> QueryInstance:
    """Read a normal CQ as an instance: each variable becomes a fresh
    source null, constants pass through.  Builtin atoms contribute no
    instance facts (they constrain nothing about the data), but their
    variables still receive nulls.
    """
    if q.form != NORMAL:
        raise ValueError(f"{q.form} queries have no instance representation")
    if minter is None:
        minter = NullMinter(reserved={t.label for t in q.head if t.kind == CONST}
                            | {t.label for a in q.body for t in a.args if t.kind == CONST})
    mapping: dict[Term, Term] = {}

    def image(t: Term) -> Term:
        if t.kind != VAR:
            return t
        if t not in mapping:
            mapping[t] = minter.fresh_d()
        return mapping[t]

    for t in q.head:
        image(t)
    atoms = []
    for a in q.body:
        args = tuple(image(t) for t in a.args)
        if not a.is_builtin:
            atoms.append(Atom(a.pred, args))
        # builtin atoms still walked above so their variables get nulls
    head = tuple(mapping.get(t, t) for t in q.head)
    return QueryInstance(frozenset(atoms), head, mapping)


def query_of_instance(inst: Instance, free: tuple[Term, ...] = ()) -> ConjunctiveQuery:
    """Read an instance back as a CQ: nulls listed in ``free`` become head
    variables, all other nulls become existential variables."""
    q, _ = query_of_instance_with_map(inst, free)
    return q


def instance_query_parts(
    inst: Instance, free: tuple[Term, ...] = ()
) -> tuple[tuple[Term, ...], tuple[Atom, ...], dict[Term, Term]]:
    """Head, body and null-to-variable map for the query reading of an
    instance.

    Nulls in ``free`` that do not occur in the instance still get head
    variables; the caller is expected to constrain them (the optimal
    rewriting conjoins a top atom per such term) before assembling a
    query, or the safety check will reject the head.
    """
    for t in free:
        if t.kind == VAR:
            raise ValueError("free tuple holds instance terms, not variables")
    null_to_var: dict[Term, Term] = {}
    counter = 0
    for t in free:
        if t.kind in (NULL_D, NULL_S) and t not in null_to_var:
            counter += 1
            null_to_var[t] = var(f"x{counter}")
    rest = sorted({t for a in inst for t in a.args if t.kind in (NULL_D, NULL_S)}
                  - null_to_var.keys(), key=term_key)
    for i, t in enumerate(rest, start=1):
        null_to_var[t] = var(f"y{i}")
    body = tuple(sorted((Atom(a.pred, tuple(null_to_var.get(t, t) for t in a.args))
                         for a in inst), key=atom_key))
    head = tuple(null_to_var.get(t, t) for t in free)
    if not body:
        raise ValueError("empty instance has no query representation")
    return head, body, null_to_var


def query_of_instance_with_map(
    inst: Instance, free: tuple[Term, ...] = ()
) -> tuple[ConjunctiveQuery, dict[Term, Term]]:
    head, body, null_to_var = instance_query_parts(inst, free)
    return ConjunctiveQuery(head, body), null_to_var
