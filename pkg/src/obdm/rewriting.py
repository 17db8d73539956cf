"""Recognition and synthesis of complete source-to-target rewritings.

``check_complete`` decides whether an ontology query captures every
answer a source query can produce, for every source database and every
admissible target model.  ``find_optimal_complete`` computes the unique
(up to equivalence) optimal such query: chase the source query's frozen
shape through the mapping, fold the result back into a query, and mark
head positions the chase lost with the all-accepting builtin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    CONST,
    VAR,
    Atom,
    Instance,
    Term,
    dom,
    freeze_instance,
    freeze_tuple,
)
from .queries import (
    BOTTOM_FORM,
    NORMAL,
    TOP_FORM,
    ConjunctiveQuery,
    bottom_query,
    instance_of_query,
    instance_query_parts,
    top_query,
)
from .evaluation import evaluate_ucq
from .chase import StTgd, abox_of, chase_egds, chase_tgds, egds_of_negated_ucq
from .dllite import TBox, build_qsat, certain_answers_kb
from .terms import BUILTINS, NullMinter


@dataclass(frozen=True)
class ObdmSpec:
    """An ontology, a source schema (relation name to arity), and the
    GLAV mapping between them."""

    source_schema: dict[str, int] = field(default_factory=dict)
    tbox: TBox = field(default_factory=TBox)
    mapping: tuple[StTgd, ...] = ()

    def __post_init__(self):
        onto_arity: dict[str, int] = {}
        for name in self.tbox.concept_names:
            onto_arity[name] = 1
        for name in self.tbox.role_names:
            onto_arity[name] = 2
        for tgd in self.mapping:
            for a in tgd.body:
                if a.pred in BUILTINS:
                    raise ValueError("builtin atoms cannot appear in mapping bodies")
                want = self.source_schema.get(a.pred)
                if want is None:
                    raise ValueError(f"mapping body uses undeclared source relation {a.pred!r}")
                if want != len(a.args):
                    raise ValueError(f"arity mismatch on source relation {a.pred!r}")
            for a in tgd.head:
                if a.pred in BUILTINS:
                    raise ValueError("builtin atoms cannot appear in mapping heads")
                if a.pred in self.source_schema:
                    raise ValueError(f"mapping head uses source relation {a.pred!r}")
                if len(a.args) not in (1, 2):
                    raise ValueError(f"ontology predicate {a.pred!r} must have arity 1 or 2")
                seen = onto_arity.setdefault(a.pred, len(a.args))
                if seen != len(a.args):
                    raise ValueError(f"inconsistent arity for ontology predicate {a.pred!r}")
        object.__setattr__(self, "_onto_arity", dict(onto_arity))

    @property
    def ontology_vocabulary(self) -> dict[str, int]:
        return dict(self._onto_arity)

    def check_source_query(self, q: ConjunctiveQuery) -> None:
        if q.form != NORMAL:
            raise ValueError("source queries must be normal conjunctive queries")
        for a in q.body:
            if a.pred in BUILTINS:
                raise ValueError("builtin atoms cannot appear in source queries")
            want = self.source_schema.get(a.pred)
            if want is None:
                raise ValueError(f"source query uses undeclared relation {a.pred!r}")
            if want != len(a.args):
                raise ValueError(f"arity mismatch on source relation {a.pred!r}")

    def check_ontology_query(self, q: ConjunctiveQuery) -> None:
        if q.form != NORMAL:
            return
        vocab = self._onto_arity
        for a in q.body:
            if a.pred in BUILTINS:
                continue
            want = vocab.get(a.pred)
            if want is None:
                raise ValueError(f"ontology query uses unknown predicate {a.pred!r}")
            if want != len(a.args):
                raise ValueError(f"arity mismatch on ontology predicate {a.pred!r}")


@dataclass(frozen=True)
class RewritingVerdict:
    complete: bool
    witness: "Witness | None" = None

    def __post_init__(self):
        if self.witness is not None and self.complete:
            raise ValueError("a witness refutes; it cannot accompany a positive verdict")


@dataclass(frozen=True)
class Witness:
    """A refuting pair: the valuation of the source-query instance, and
    the model under which the rewriting property breaks."""

    valuation: tuple[tuple[str, str], ...]
    model: Instance | None = None
    detail: str = ""


def _psi_tuple(psi: dict[Term, Term], tup: tuple[Term, ...]) -> tuple[Term, ...]:
    return tuple(psi.get(t, t) for t in tup)


def check_complete(
    spec: ObdmSpec,
    Qs: ConjunctiveQuery,
    Qg: ConjunctiveQuery,
) -> bool:
    """Decide whether Qg is a complete source-to-target rewriting of Qs.

    The recognition procedure: build the instance of Qs, chase it into
    an ABox (mapping, then the egds negating the one-inequality
    satisfiability disjuncts), and answer true if the chase failed, or
    the inequality-free satisfiability part fires, or the (frozen,
    equality-adjusted) head tuple is a certain answer of Qg over the
    resulting knowledge base.
    """
    spec.check_source_query(Qs)
    spec.check_ontology_query(Qg)
    if Qs.arity != Qg.arity:
        raise ValueError("source and ontology queries must share head arity")

    ioq = instance_of_query(Qs)
    res = abox_of(ioq.instance, spec.mapping, spec.tbox)
    if res.failed:
        return True
    q0, _ = build_qsat(spec.tbox)
    if evaluate_ucq(q0, res.abox):
        return True
    t = freeze_tuple(_psi_tuple(res.psi, ioq.head))
    answers = certain_answers_kb(spec.tbox, res.abox, Qg, extra_top_domain=set(t))
    return t in answers


def find_optimal_complete(spec: ObdmSpec, Qs: ConjunctiveQuery) -> ConjunctiveQuery:
    """Compute the optimal complete source-to-target rewriting of Qs.

    Degenerate branches: a failing egd chase or a fired inequality-free
    satisfiability disjunct means every rewriting is vacuously complete,
    so the all-rejecting query is optimal; an empty chase result leaves
    nothing to say, so the all-accepting query is.  Otherwise the chased
    instance itself becomes the query, with one all-accepting atom per
    head term the chase result does not mention.
    """
    spec.check_source_query(Qs)
    ioq = instance_of_query(Qs)
    minter = NullMinter(reserved={t.label for t in dom(ioq.instance)}
                        | {t.label for t in ioq.head})
    J_prime = chase_tgds(ioq.instance, spec.mapping, minter)
    q0, q1 = build_qsat(spec.tbox)
    outcome = chase_egds(J_prime, egds_of_negated_ucq(q1))
    if outcome.failed:
        return bottom_query(Qs.head)
    J = outcome.result
    if evaluate_ucq(q0, J):
        return bottom_query(Qs.head)
    if not J:
        return top_query(Qs.head)
    head_terms = _psi_tuple(outcome.psi, ioq.head)
    head, body, null_to_var = instance_query_parts(J, head_terms)
    j_terms = dom(J)
    missing = [t for t in dict.fromkeys(head_terms) if t not in j_terms]
    body += tuple(Atom("top", (null_to_var.get(t, t),)) for t in missing)
    return ConjunctiveQuery(head, body, NORMAL)


def contained_wrt(tbox: TBox, Qg: ConjunctiveQuery, Qg2: ConjunctiveQuery) -> bool:
    """Decide containment of two ontology queries over every model of
    the TBox, via the frozen canonical instance of the left query.

    The left query's instance is egd-chased before freezing, so queries
    whose shape only violates functionality through distinct variables
    are collapsed rather than misread as unsatisfiable; an actual chase
    failure (or a fired disjointness) means the left query is empty in
    every model and containment holds vacuously.
    """
    if Qg.arity != Qg2.arity:
        raise ValueError("containment needs equal head arity")
    if Qg.form == BOTTOM_FORM:
        return True

    q0, q1 = build_qsat(tbox)
    if Qg.form == TOP_FORM:
        # generic witness: an empty ABox plus fresh constants in the head
        abox: Instance = frozenset()
        taken = {t.label for t in Qg.head if t.kind == CONST}
        frozen_head = []
        fresh_i = 0
        fresh_map: dict[Term, Term] = {}
        for t in Qg.head:
            if t.kind == VAR:
                if t not in fresh_map:
                    while True:
                        fresh_i += 1
                        label = f"f{fresh_i}"
                        if label not in taken:
                            break
                    fresh_map[t] = Term(CONST, label)
                frozen_head.append(fresh_map[t])
            else:
                frozen_head.append(t)
        t_tuple = tuple(frozen_head)
    else:
        ioq = instance_of_query(Qg)
        outcome = chase_egds(ioq.instance, egds_of_negated_ucq(q1))
        if outcome.failed:
            return True
        if evaluate_ucq(q0, outcome.result):
            return True
        abox = freeze_instance(outcome.result)
        t_tuple = freeze_tuple(_psi_tuple(outcome.psi, ioq.head))
    answers = certain_answers_kb(tbox, abox, Qg2, extra_top_domain=set(t_tuple))
    return t_tuple in answers


def proper_contained_wrt(tbox: TBox, Qg: ConjunctiveQuery, Qg2: ConjunctiveQuery) -> bool:
    return contained_wrt(tbox, Qg, Qg2) and not contained_wrt(tbox, Qg2, Qg)


def equivalent_wrt(tbox: TBox, Qg: ConjunctiveQuery, Qg2: ConjunctiveQuery) -> bool:
    return contained_wrt(tbox, Qg, Qg2) and contained_wrt(tbox, Qg2, Qg)
