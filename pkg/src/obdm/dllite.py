"""DL-Lite TBox reasoning support.

The fragment covers atomic concepts, unqualified existential role
restrictions (forward and inverse), positive and negative concept and
role inclusions, role functionality, and identification assertions over
length-1 role paths.  Knowledge-base satisfiability reduces to the
evaluation of a boolean union query over the ABox read as a database:
the inequality-free part collects violated disjointness assertions, the
one-inequality part collects functionality and identification
violations.  Query answering over a satisfiable knowledge base goes
through the classic rewriting fixpoint: rewrite single atoms backwards
along inclusions, unify body atoms to unlock further rewritings, then
evaluate the resulting union over the ABox directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence, Union

from .terms import Atom, CONST, Instance, Term, VAR, term_key, var
from .queries import (
    BOTTOM_FORM,
    NORMAL,
    TOP_FORM,
    ConjunctiveQuery,
    Disjunct,
    UnionQuery,
)
from .evaluation import evaluate_cq, evaluate_ucq


@dataclass(frozen=True)
class Concept:
    name: str


@dataclass(frozen=True)
class Exists:
    role: str
    inverse: bool = False


BasicConcept = Union[Concept, Exists]


@dataclass(frozen=True)
class Role:
    name: str
    inverse: bool = False

    def flipped(self) -> "Role":
        return Role(self.name, not self.inverse)


@dataclass(frozen=True)
class SubConcept:
    sub: BasicConcept
    sup: BasicConcept


@dataclass(frozen=True)
class DisjointConcepts:
    left: BasicConcept
    right: BasicConcept


@dataclass(frozen=True)
class SubRole:
    sub: Role
    sup: Role


@dataclass(frozen=True)
class DisjointRoles:
    left: Role
    right: Role


@dataclass(frozen=True)
class Functional:
    role: str
    inverse: bool = False


@dataclass(frozen=True)
class Identification:
    concept: BasicConcept
    paths: tuple[Role, ...]

    def __post_init__(self):
        if not self.paths:
            raise ValueError("identification assertion needs at least one role path")


TBoxAssertion = Union[
    SubConcept, DisjointConcepts, SubRole, DisjointRoles, Functional, Identification
]


def _concept_names(b: BasicConcept) -> set[str]:
    return {b.name} if isinstance(b, Concept) else set()


def _role_names(b: BasicConcept) -> set[str]:
    return {b.role} if isinstance(b, Exists) else set()


@dataclass(frozen=True)
class TBox:
    assertions: tuple[TBoxAssertion, ...] = ()

    def __post_init__(self):
        concepts, roles = set(), set()
        rhs_roles = set()
        for a in self.assertions:
            if isinstance(a, SubConcept):
                for b in (a.sub, a.sup):
                    concepts |= _concept_names(b)
                    roles |= _role_names(b)
            elif isinstance(a, DisjointConcepts):
                for b in (a.left, a.right):
                    concepts |= _concept_names(b)
                    roles |= _role_names(b)
            elif isinstance(a, SubRole):
                roles |= {a.sub.name, a.sup.name}
                rhs_roles.add(a.sup.name)
            elif isinstance(a, DisjointRoles):
                roles |= {a.left.name, a.right.name}
            elif isinstance(a, Functional):
                roles.add(a.role)
            elif isinstance(a, Identification):
                concepts |= _concept_names(a.concept)
                roles |= _role_names(a.concept)
                roles |= {p.name for p in a.paths}
            else:
                raise ValueError(f"unknown TBox assertion {a!r}")
        clash = concepts & roles
        if clash:
            raise ValueError(f"names used both as concept and role: {sorted(clash)}")
        for a in self.assertions:
            if isinstance(a, Functional) and a.role in rhs_roles:
                raise ValueError(
                    f"functionality on {a.role!r}, which is specialized by a role inclusion"
                )
            if isinstance(a, Identification):
                bad = {p.name for p in a.paths} & rhs_roles
                if bad:
                    raise ValueError(
                        f"identification path on {sorted(bad)}, specialized by a role inclusion"
                    )
        object.__setattr__(self, "_concepts", frozenset(concepts))
        object.__setattr__(self, "_roles", frozenset(roles))

    @property
    def concept_names(self) -> frozenset[str]:
        return self._concepts

    @property
    def role_names(self) -> frozenset[str]:
        return self._roles

    def pos_inclusions(self) -> list[SubConcept]:
        return [a for a in self.assertions if isinstance(a, SubConcept)]

    def role_inclusions(self) -> list[SubRole]:
        return [a for a in self.assertions if isinstance(a, SubRole)]


def role_edge(p: Role, u: Term, v: Term) -> Atom:
    """The atom asserting a p-edge from u to v."""
    return Atom(p.name, (v, u) if p.inverse else (u, v))


def gamma(b: BasicConcept, x: Term, fresh) -> list[Atom]:
    """Atoms expressing membership of x in a basic concept; ``fresh``
    supplies the existential witness variable when one is needed."""
    if isinstance(b, Concept):
        return [Atom(b.name, (x,))]
    w = fresh()
    return [role_edge(Role(b.role, b.inverse), x, w)]


def _derived_pos_inclusions(tbox: TBox) -> list[SubConcept]:
    # a role inclusion makes the sub-role's domains/ranges sub-concepts
    out = []
    for ri in tbox.role_inclusions():
        out.append(SubConcept(Exists(ri.sub.name, ri.sub.inverse),
                              Exists(ri.sup.name, ri.sup.inverse)))
        out.append(SubConcept(Exists(ri.sub.name, not ri.sub.inverse),
                              Exists(ri.sup.name, not ri.sup.inverse)))
    return out


def concept_predecessors(tbox: TBox, b: BasicConcept) -> list[BasicConcept]:
    """All basic concepts entailed to be subsumed by b (b included)."""
    pis = tbox.pos_inclusions() + _derived_pos_inclusions(tbox)
    found = [b]
    seen = {b}
    i = 0
    while i < len(found):
        cur = found[i]
        i += 1
        for pi in pis:
            if pi.sup == cur and pi.sub not in seen:
                seen.add(pi.sub)
                found.append(pi.sub)
    return found


def role_predecessors(tbox: TBox, p: Role) -> list[Role]:
    """All role expressions entailed to be subsumed by p (p included)."""
    ris = list(tbox.role_inclusions())
    ris += [SubRole(r.sub.flipped(), r.sup.flipped()) for r in ris]
    found = [p]
    seen = {p}
    i = 0
    while i < len(found):
        cur = found[i]
        i += 1
        for ri in ris:
            if ri.sup == cur and ri.sub not in seen:
                seen.add(ri.sub)
                found.append(ri.sub)
    return found


def ni_closure(tbox: TBox) -> list[TBoxAssertion]:
    """Close the negative inclusions under the positive ones: whatever is
    subsumed by a member of a disjoint pair inherits the disjointness."""
    out: list[TBoxAssertion] = []
    seen_c: set[frozenset] = set()
    seen_r: set[frozenset] = set()
    for a in tbox.assertions:
        if isinstance(a, DisjointConcepts):
            for l in concept_predecessors(tbox, a.left):
                for r in concept_predecessors(tbox, a.right):
                    key = frozenset({l, r})
                    if key not in seen_c:
                        seen_c.add(key)
                        out.append(DisjointConcepts(l, r))
        elif isinstance(a, DisjointRoles):
            for l in role_predecessors(tbox, a.left):
                for r in role_predecessors(tbox, a.right):
                    key = frozenset({l, r, l.flipped(), r.flipped()})
                    if key not in seen_r:
                        seen_r.add(key)
                        out.append(DisjointRoles(l, r))
    return out


def build_qsat(tbox: TBox) -> tuple[UnionQuery, UnionQuery]:
    """The satisfiability query, split into its inequality-free part
    (violated disjointness) and its one-inequality part (violated
    functionality and identification).  An empty TBox yields empty
    unions: nothing can be violated."""
    zero: list[Disjunct] = []
    one: list[Disjunct] = []

    def make_fresh(taken: list[int]):
        def fresh() -> Term:
            taken[0] += 1
            return var(f"w{taken[0]}")
        return fresh

    for ni in ni_closure(tbox):
        counter = [0]
        fresh = make_fresh(counter)
        x = var("x")
        if isinstance(ni, DisjointConcepts):
            body = gamma(ni.left, x, fresh) + gamma(ni.right, x, fresh)
        else:
            y = var("y")
            body = [role_edge(ni.left, x, y), role_edge(ni.right, x, y)]
        body = tuple(dict.fromkeys(body))
        zero.append(Disjunct(ConjunctiveQuery((), body)))

    for a in tbox.assertions:
        if isinstance(a, Functional):
            x, y1, y2 = var("x"), var("y1"), var("y2")
            p = Role(a.role, a.inverse)
            body = (role_edge(p, x, y1), role_edge(p, x, y2))
            one.append(Disjunct(ConjunctiveQuery((), body), (y1, y2)))
        elif isinstance(a, Identification):
            # concept membership may be entailed, so expand both copies
            # over everything subsumed by the identified concept
            alts = concept_predecessors(tbox, a.concept)
            seen_pairs = set()
            for b1 in alts:
                for b2 in alts:
                    key = frozenset({b1, b2})
                    if key in seen_pairs:
                        continue
                    seen_pairs.add(key)
                    counter = [0]
                    fresh = make_fresh(counter)
                    x, x2 = var("x"), var("xp")
                    body = gamma(b1, x, fresh) + gamma(b2, x2, fresh)
                    for i, p in enumerate(a.paths, start=1):
                        z = var(f"z{i}")
                        body.append(role_edge(p, x, z))
                        body.append(role_edge(p, x2, z))
                    one.append(Disjunct(ConjunctiveQuery((), tuple(body)), (x, x2)))
    return UnionQuery(tuple(zero)), UnionQuery(tuple(one))


def kb_satisfiable(tbox: TBox, abox: Instance) -> bool:
    q0, q1 = build_qsat(tbox)
    return not evaluate_ucq(q0, abox) and not evaluate_ucq(q1, abox)


# --- perfect reformulation -------------------------------------------------


def _canonical(q: ConjunctiveQuery) -> tuple[ConjunctiveQuery, tuple]:
    """Rename variables by first occurrence (head first, then body) and
    produce a dedup key insensitive to body atom order."""
    renaming: dict[Term, Term] = {}

    def image(t: Term) -> Term:
        if t.kind != VAR:
            return t
        if t not in renaming:
            renaming[t] = var(f"v{len(renaming) + 1}")
        return renaming[t]

    head = tuple(image(t) for t in q.head)
    body = tuple(Atom(a.pred, tuple(image(t) for t in a.args)) for a in q.body)
    out = ConjunctiveQuery(head, body, q.form)
    return out, (head, frozenset(body), q.form)


def _unbound(t: Term, q: ConjunctiveQuery) -> bool:
    if t.kind != VAR or t in q.head:
        return False
    return sum(a.args.count(t) for a in q.body) == 1


def _mgu(a: Atom, b: Atom) -> dict[Term, Term] | None:
    if a.pred != b.pred or len(a.args) != len(b.args):
        return None
    subst: dict[Term, Term] = {}

    def find(t: Term) -> Term:
        while t in subst:
            t = subst[t]
        return t

    for u, v in zip(a.args, b.args):
        u, v = find(u), find(v)
        if u == v:
            continue
        if u.kind == VAR:
            subst[u] = v
        elif v.kind == VAR:
            subst[v] = u
        else:
            return None
    return {t: find(t) for t in subst}


def _apply_subst(q: ConjunctiveQuery, s: dict[Term, Term]) -> ConjunctiveQuery:
    head = tuple(s.get(t, t) for t in q.head)
    body = tuple(dict.fromkeys(Atom(a.pred, tuple(s.get(t, t) for t in a.args))
                               for a in q.body))
    return ConjunctiveQuery(head, body, q.form)


def perfect_reformulation(tbox: TBox, Q: UnionQuery | ConjunctiveQuery) -> UnionQuery:
    """Rewrite the union so that direct evaluation over an ABox computes
    the certain answers.  Two moves are iterated to a fixpoint: replace
    an atom by the left side of an inclusion that applies to it, and
    unify two body atoms to free up otherwise-bound positions."""
    if isinstance(Q, ConjunctiveQuery):
        Q = UnionQuery((Disjunct(Q),))
    for d in Q:
        if d.inequality is not None:
            raise ValueError("reformulation input must be inequality-free")

    pis = tbox.pos_inclusions()
    ris = tbox.role_inclusions()
    results: dict[tuple, ConjunctiveQuery] = {}
    work: list[ConjunctiveQuery] = []
    for d in Q:
        canon, key = _canonical(d.query)
        if key not in results:
            results[key] = d.query  # seeds keep their spelling
            work.append(canon)

    def push(q: ConjunctiveQuery):
        canon, key = _canonical(q)
        if key not in results:
            results[key] = canon
            work.append(canon)

    while work:
        q = work.pop(0)
        if q.form != NORMAL:
            continue
        taken = {t.label for t in q.variables()}
        counter = [0]

        def fresh() -> Term:
            while True:
                counter[0] += 1
                label = f"w{counter[0]}"
                if label not in taken:
                    taken.add(label)
                    return var(label)

        for i, a in enumerate(q.body):
            if a.is_builtin:
                continue
            rewrites: list[list[Atom]] = []
            if len(a.args) == 1:
                for pi in pis:
                    if pi.sup == Concept(a.pred):
                        rewrites.append(gamma(pi.sub, a.args[0], fresh))
            else:
                t1, t2 = a.args
                for pi in pis:
                    if pi.sup == Exists(a.pred, False) and _unbound(t2, q):
                        rewrites.append(gamma(pi.sub, t1, fresh))
                    if pi.sup == Exists(a.pred, True) and _unbound(t1, q):
                        rewrites.append(gamma(pi.sub, t2, fresh))
                for ri in ris:
                    if ri.sup.name == a.pred:
                        u, v = (t2, t1) if ri.sup.inverse else (t1, t2)
                        rewrites.append([role_edge(ri.sub, u, v)])
            for new_atoms in rewrites:
                body = q.body[:i] + tuple(new_atoms) + q.body[i + 1:]
                push(ConjunctiveQuery(q.head, tuple(dict.fromkeys(body)), NORMAL))
        for i, j in combinations(range(len(q.body)), 2):
            if q.body[i].is_builtin or q.body[j].is_builtin:
                continue
            s = _mgu(q.body[i], q.body[j])
            if s is not None and s:
                push(_apply_subst(q, s))

    return UnionQuery(tuple(Disjunct(q) for q in results.values()))


def certain_answers_kb(
    tbox: TBox,
    abox: Instance,
    Q: UnionQuery | ConjunctiveQuery,
    extra_top_domain: Iterable[Term] = (),
) -> set[tuple[Term, ...]]:
    """Certain answers over a satisfiable knowledge base, computed by
    evaluating the perfect reformulation over the ABox as a database."""
    if not kb_satisfiable(tbox, abox):
        raise ValueError("certain answers requested over an unsatisfiable knowledge base")
    if isinstance(Q, ConjunctiveQuery):
        if Q.form == BOTTOM_FORM:
            return set()
        if Q.form == TOP_FORM:
            return evaluate_cq(Q, abox, extra_top_domain)
        Q = UnionQuery((Disjunct(Q),))
    return evaluate_ucq(perfect_reformulation(tbox, Q), abox, extra_top_domain)
