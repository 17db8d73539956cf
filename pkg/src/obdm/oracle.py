"""Brute-force ground truth at desk scale.

Everything here decides by exhaustive enumeration against the bare
definitions: query answers by trying every assignment of variables into
the active domain, rewriting properties by walking every valuation of
the source-query instance and every bounded target model, TBox
satisfaction by checking each assertion directly on a finite structure.
None of it shares code with the chase, the satisfiability query, or the
reformulation engine it exists to validate.

Bounded verdicts are decisive for refutation (a found witness disproves)
and confirmatory only within budget; ``refutation_decisive`` estimates
whether the frame provably covers the canonical countermodel space.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Iterator, Sequence

from .terms import (
    CONST,
    NULL_S,
    VAR,
    Atom,
    Instance,
    NullMinter,
    Term,
    atom_key,
    dom,
    term_key,
)
from .queries import (
    BOTTOM_FORM,
    TOP_FORM,
    ConjunctiveQuery,
    UnionQuery,
    instance_of_query,
)
from .evaluation import all_tup
from .dllite import (
    Concept,
    DisjointConcepts,
    DisjointRoles,
    Functional,
    Identification,
    Role,
    SubConcept,
    SubRole,
    TBox,
)
from .rewriting import ObdmSpec, RewritingVerdict, Witness
from .chase import StTgd


@dataclass(frozen=True)
class Budget:
    """Search bounds for the enumerations; verdicts are only meaningful
    relative to these."""

    const_pool: tuple[str, ...] = ("v1", "v2", "v3")
    max_model_atoms: int = 6
    extra_domain: tuple[str, ...] = ("f1", "f2")
    canonical_depth: int | None = None  # None: atom count of the query under test

    def __post_init__(self):
        if not self.const_pool or not self.extra_domain:
            raise ValueError("constant pools must be nonempty")
        if self.max_model_atoms < 1:
            raise ValueError("max_model_atoms must be at least 1")
        if self.canonical_depth is not None and self.canonical_depth < 1:
            raise ValueError("canonical_depth must be at least 1")


# --- assignment-enumeration query answers ----------------------------------


def brute_assignments(
    body: Sequence[Atom],
    db: Iterable[Atom],
    tops: Iterable[Term] = (),
    fixed: dict[Term, Term] | None = None,
) -> Iterator[dict[Term, Term]]:
    """Every assignment of the body's variables into the active domain
    (plus the top domain) satisfying all atoms, by raw enumeration."""
    facts = set(db)
    tops = set(tops)
    domain = sorted(dom(facts) | tops, key=term_key)
    fixed = fixed or {}
    vs = sorted(
        {t for a in body for t in a.args if t.kind == VAR and t not in fixed},
        key=term_key,
    )
    for choice in product(domain, repeat=len(vs)):
        assignment = dict(fixed)
        assignment.update(zip(vs, choice))

        def val(t: Term) -> Term:
            return assignment.get(t, t)

        ok = True
        for a in body:
            if a.pred == "bottom":
                ok = False
            elif a.pred == "top":
                ok = all(val(t) in tops for t in a.args)
            else:
                ok = Atom(a.pred, tuple(val(t) for t in a.args)) in facts
            if not ok:
                break
        if ok:
            yield assignment


def brute_force_cq_answers(
    q: ConjunctiveQuery,
    db: Instance,
    extra_top_domain: Iterable[Term] = (),
) -> set[tuple[Term, ...]]:
    """Assignment-enumeration twin of the homomorphism evaluator."""
    if q.form == BOTTOM_FORM:
        return set()
    tops = dom(db) | {t for t in q.head if t.kind == CONST} | set(extra_top_domain)
    out = set()
    for h in brute_assignments(q.body, db, tops):
        out.add(tuple(h.get(t, t) for t in q.head))
    return out


def brute_force_ucq_answers(
    Q: UnionQuery,
    db: Instance,
    extra_top_domain: Iterable[Term] = (),
) -> set[tuple[Term, ...]]:
    out: set[tuple[Term, ...]] = set()
    for d in Q:
        if d.query.form == BOTTOM_FORM:
            continue
        tops = dom(db) | {t for t in d.query.head if t.kind == CONST} | set(extra_top_domain)
        for h in brute_assignments(d.query.body, db, tops):
            if d.inequality is not None:
                t1, t2 = d.inequality
                if h.get(t1, t1) == h.get(t2, t2):
                    continue
            out.add(tuple(h.get(t, t) for t in d.query.head))
    return out


# --- direct finite-model checks ---------------------------------------------


def _members(b, facts: set[Atom]) -> set[Term]:
    if isinstance(b, Concept):
        return {a.args[0] for a in facts if a.pred == b.name and len(a.args) == 1}
    pos = 1 if b.inverse else 0
    return {a.args[pos] for a in facts if a.pred == b.role and len(a.args) == 2}


def _edges(p: Role, facts: set[Atom]) -> set[tuple[Term, Term]]:
    raw = {a.args for a in facts if a.pred == p.name and len(a.args) == 2}
    return {(v, u) for u, v in raw} if p.inverse else raw


def tbox_satisfied(B: Instance, tbox: TBox) -> bool:
    """Check every TBox assertion directly on the finite structure B."""
    facts = set(B)
    for a in tbox.assertions:
        if isinstance(a, SubConcept):
            if not _members(a.sub, facts) <= _members(a.sup, facts):
                return False
        elif isinstance(a, DisjointConcepts):
            if _members(a.left, facts) & _members(a.right, facts):
                return False
        elif isinstance(a, SubRole):
            if not _edges(a.sub, facts) <= _edges(a.sup, facts):
                return False
        elif isinstance(a, DisjointRoles):
            if _edges(a.left, facts) & _edges(a.right, facts):
                return False
        elif isinstance(a, Functional):
            succ: dict[Term, set[Term]] = {}
            for u, v in _edges(Role(a.role, a.inverse), facts):
                succ.setdefault(u, set()).add(v)
            if any(len(vs) > 1 for vs in succ.values()):
                return False
        elif isinstance(a, Identification):
            elems = sorted(_members(a.concept, facts), key=term_key)
            succs = {
                e: [
                    {v for u, v in _edges(p, facts) if u == e}
                    for p in a.paths
                ]
                for e in elems
            }
            for e1, e2 in combinations(elems, 2):
                if all(s1 & s2 for s1, s2 in zip(succs[e1], succs[e2])):
                    return False
    return True


def mapping_satisfied(B: Instance, C: Instance, tgds: Sequence[StTgd]) -> bool:
    """Direct check that (B, C) satisfies every mapping assertion."""
    for tgd in tgds:
        for h in brute_assignments(tgd.body, C):
            frontier = {v: h[v] for v in tgd.frontier()}
            if next(brute_assignments(tgd.head, B, fixed=frontier), None) is None:
                return False
    return True


# --- bounded model enumeration ----------------------------------------------


def _vocabulary(spec: ObdmSpec) -> dict[str, int]:
    return spec.ontology_vocabulary


def oracle_models(
    spec: ObdmSpec,
    C: Instance,
    budget: Budget | None = None,
) -> Iterator[Instance]:
    """All target models for the spec relative to C, over the domain of
    C extended by the budget's fresh elements, with at most
    ``max_model_atoms`` atoms, smallest first."""
    budget = budget or Budget()
    domain = sorted(dom(C), key=term_key) + [Term(CONST, x) for x in budget.extra_domain]
    vocab = _vocabulary(spec)
    universe = sorted(
        (
            Atom(p, args)
            for p, ar in vocab.items()
            for args in product(domain, repeat=ar)
        ),
        key=atom_key,
    )

    trigger_options: list[list[frozenset[Atom]]] = []
    for tgd in spec.mapping:
        ex = tgd.existentials()
        for h in brute_assignments(tgd.body, C):
            options = []
            for choice in product(domain, repeat=len(ex)):
                inst = dict(h)
                inst.update(zip(ex, choice))
                options.append(frozenset(Atom(a.pred, tuple(inst.get(t, t) for t in a.args))
                                         for a in tgd.head))
            trigger_options.append(sorted(set(options), key=lambda s: sorted(map(atom_key, s))))

    bases = sorted(
        {frozenset().union(*combo) if combo else frozenset()
         for combo in product(*trigger_options)},
        key=lambda s: (len(s), sorted(map(atom_key, s))),
    ) or [frozenset()]

    seen: set[frozenset[Atom]] = set()
    for size in range(budget.max_model_atoms + 1):
        layer: list[Instance] = []
        for base in bases:
            if len(base) > size:
                continue
            rest = [a for a in universe if a not in base]
            for ext in combinations(rest, size - len(base)):
                Bset = base | frozenset(ext)
                if Bset in seen:
                    continue
                seen.add(Bset)
                if tbox_satisfied(Bset, spec.tbox):
                    layer.append(Bset)
        for B in sorted(layer, key=lambda s: sorted(map(atom_key, s))):
            yield B


# --- definitional rewriting checks ------------------------------------------


def _valuations(
    nulls: Sequence[Term],
    pool: Sequence[Term],
) -> Iterator[dict[Term, Term]]:
    for choice in product(pool, repeat=len(nulls)):
        yield dict(zip(nulls, choice))


def _valuation_pool(spec_consts: set[Term], budget: Budget) -> list[Term]:
    pool = {Term(CONST, x) for x in budget.const_pool} | spec_consts
    return sorted(pool, key=term_key)


def apply_valuation(v: dict[Term, Term], inst: Instance) -> Instance:
    return frozenset(Atom(a.pred, tuple(v.get(t, t) for t in a.args)) for a in inst)


def oracle_check(
    spec: ObdmSpec,
    Qs: ConjunctiveQuery,
    Qg: ConjunctiveQuery,
    variant: str = "complete",
    semantics: str = "model",
    budget: Budget | None = None,
    source_db: Instance | None = None,
) -> RewritingVerdict:
    """Check a rewriting variant by its definition, over every valuation
    of the source query's instance (or over the one supplied source
    database) and every bounded model.

    Under the model-based semantics the property is tested against each
    model separately; under the certain-answers-based semantics against
    the intersection of the query's answers across the stream, skipping
    source databases admitting no bounded model.
    """
    if variant not in ("complete", "sound", "exact"):
        raise ValueError(f"unknown variant {variant!r}")
    if semantics not in ("model", "cert"):
        raise ValueError(f"unknown semantics {semantics!r}")
    budget = budget or Budget()

    ioq = instance_of_query(Qs)
    if source_db is not None:
        cases: Iterable[tuple[dict[Term, Term], Instance]] = [({}, source_db)]
    else:
        nulls = sorted({t for t in dom(ioq.instance) | set(ioq.head)
                        if t.kind != CONST}, key=term_key)
        spec_consts = {t for t in dom(ioq.instance) if t.kind == CONST}
        spec_consts |= {t for t in Qs.head if t.kind == CONST}
        spec_consts |= {t for t in Qg.head if t.kind == CONST}
        pool = _valuation_pool(spec_consts, budget)
        cases = ((v, apply_valuation(v, ioq.instance)) for v in _valuations(nulls, pool))

    for v, C in cases:
        target = tuple(v.get(t, t) for t in ioq.head)
        QsC = brute_force_cq_answers(Qs, C)
        assert source_db is not None or target in QsC
        extra = dom(C)

        def bad(model: Instance | None, detail: str) -> RewritingVerdict:
            valuation = tuple(sorted((k.label, val.label) for k, val in v.items()))
            return RewritingVerdict(False, Witness(valuation, model, detail))

        if semantics == "model":
            for B in oracle_models(spec, C, budget):
                QgB = brute_force_cq_answers(Qg, B, extra_top_domain=extra)
                if variant in ("complete", "exact") and not QsC <= QgB:
                    return bad(B, "source answers escape the model")
                if variant in ("sound", "exact") and not QgB <= QsC:
                    return bad(B, "model answers escape the source")
        else:
            cert: set[tuple[Term, ...]] | None = None
            for B in oracle_models(spec, C, budget):
                QgB = brute_force_cq_answers(Qg, B, extra_top_domain=extra)
                cert = QgB if cert is None else cert & QgB
                if not cert:
                    break
            if cert is None:
                continue  # no bounded model: this source database is out of scope
            if variant in ("complete", "exact") and not QsC <= cert:
                return bad(None, "source answers escape the certain answers")
            if variant in ("sound", "exact") and not cert <= QsC:
                return bad(None, "certain answers escape the source")
    return RewritingVerdict(True)


def oracle_cert(
    spec: ObdmSpec,
    C: Instance,
    Qg: ConjunctiveQuery,
    budget: Budget | None = None,
) -> set[tuple[Term, ...]]:
    """Certain answers by intersection over the bounded model stream;
    with no model in the stream, every tuple over C's constants."""
    budget = budget or Budget()
    ans: set[tuple[Term, ...]] | None = None
    extra = dom(C)
    for B in oracle_models(spec, C, budget):
        QgB = brute_force_cq_answers(Qg, B, extra_top_domain=extra)
        ans = QgB if ans is None else ans & QgB
        if not ans:
            return set()
    if ans is None:
        return all_tup(Qg, C)
    return ans


# --- bounded canonical model for the ontology layer -------------------------


def kb_models(
    tbox: TBox,
    abox: Instance,
    budget: Budget | None = None,
    vocab: dict[str, int] | None = None,
) -> Iterator[Instance]:
    """Bounded models of the knowledge base: supersets of the ABox over
    its domain plus fresh elements, satisfying the TBox directly."""
    budget = budget or Budget()
    if vocab is None:
        vocab = {}
        for name in tbox.concept_names:
            vocab[name] = 1
        for name in tbox.role_names:
            vocab[name] = 2
        for a in abox:
            vocab.setdefault(a.pred, len(a.args))
    domain = sorted(dom(abox), key=term_key) + [Term(CONST, x) for x in budget.extra_domain]
    universe = sorted(
        (Atom(p, args) for p, ar in vocab.items() for args in product(domain, repeat=ar)),
        key=atom_key,
    )
    base = frozenset(abox)
    rest = [a for a in universe if a not in base]
    for size in range(len(base), budget.max_model_atoms + 1):
        for ext in combinations(rest, size - len(base)):
            B = base | frozenset(ext)
            if tbox_satisfied(B, tbox):
                yield B


def kb_finite_model_satisfiable(
    tbox: TBox, abox: Instance, budget: Budget | None = None
) -> bool:
    return next(kb_models(tbox, abox, budget), None) is not None


def canonical_model(
    tbox: TBox,
    abox: Instance,
    depth: int,
    minter: NullMinter | None = None,
) -> Instance:
    """Restricted chase of the ABox by positive and role inclusions:
    concept obligations add atoms, existential obligations add a fresh
    anonymous successor when none exists, anonymous chains stop at the
    given depth."""
    facts: set[Atom] = set(abox)
    level: dict[Term, int] = {t: 0 for t in dom(abox)}
    if minter is None:
        minter = NullMinter(reserved={t.label for t in dom(abox)})
    changed = True
    while changed:
        changed = False
        for ri in tbox.role_inclusions():
            for u, vtm in sorted(_edges(ri.sub, facts), key=lambda e: (term_key(e[0]), term_key(e[1]))):
                new = Atom(ri.sup.name, (vtm, u) if ri.sup.inverse else (u, vtm))
                if new not in facts:
                    facts.add(new)
                    changed = True
        for pi in tbox.pos_inclusions():
            for e in sorted(_members(pi.sub, facts), key=term_key):
                if isinstance(pi.sup, Concept):
                    new = Atom(pi.sup.name, (e,))
                    if new not in facts:
                        facts.add(new)
                        changed = True
                else:
                    if e in _members(pi.sup, facts):
                        continue
                    if level.get(e, 0) >= depth:
                        continue
                    w = minter.fresh_s()
                    level[w] = level.get(e, 0) + 1
                    facts.add(Atom(pi.sup.role, (w, e) if pi.sup.inverse else (e, w)))
                    changed = True
    return frozenset(facts)


def oracle_cert_kb(
    tbox: TBox,
    abox: Instance,
    Q: ConjunctiveQuery | UnionQuery,
    budget: Budget | None = None,
) -> set[tuple[Term, ...]]:
    """Certain answers over the knowledge base via the bounded canonical
    model, admitting only constants as head images."""
    budget = budget or Budget()
    if not kb_finite_model_satisfiable(tbox, abox, budget):
        raise ValueError("certain answers requested over an unsatisfiable knowledge base")
    queries = [Q] if isinstance(Q, ConjunctiveQuery) else [d.query for d in Q]
    depth = budget.canonical_depth
    if depth is None:
        depth = max(1, max(len(q.body) for q in queries)) if queries else 1
    canon = canonical_model(tbox, abox, depth)
    out: set[tuple[Term, ...]] = set()
    for q in queries:
        for t in brute_force_cq_answers(q, canon):
            if all(x.kind == CONST for x in t):
                out.add(t)
    return out


# --- structure comparison helpers -------------------------------------------


def instances_isomorphic(
    a: Instance,
    b: Instance,
    rigid: Iterable[Term] = (),
    renamable_kinds: frozenset[str] = frozenset({CONST, NULL_S}),
) -> bool:
    """Is there a bijection between the terms of the two instances,
    fixing the rigid ones and only renaming terms of the given kinds
    (within their kind), under which the atom sets coincide?"""
    rigid = set(rigid)

    def flexible(t: Term) -> bool:
        return t not in rigid and t.kind in renamable_kinds

    if len(a) != len(b):
        return False
    a_sorted = sorted(a, key=atom_key)

    def extend(i: int, fwd: dict[Term, Term], bwd: dict[Term, Term], remaining: set[Atom]) -> bool:
        if i == len(a_sorted):
            return not remaining
        atom_a = a_sorted[i]
        for atom_b in sorted(remaining, key=atom_key):
            if atom_b.pred != atom_a.pred or len(atom_b.args) != len(atom_a.args):
                continue
            new_fwd, new_bwd = dict(fwd), dict(bwd)
            ok = True
            for ta, tb in zip(atom_a.args, atom_b.args):
                if not flexible(ta) or not flexible(tb):
                    if ta != tb:
                        ok = False
                        break
                    continue
                if ta.kind != tb.kind:
                    ok = False
                    break
                if new_fwd.get(ta, tb) != tb or new_bwd.get(tb, ta) != ta:
                    ok = False
                    break
                new_fwd[ta] = tb
                new_bwd[tb] = ta
            if ok and extend(i + 1, new_fwd, new_bwd, remaining - {atom_b}):
                return True
        return False

    return extend(0, {}, {}, set(b))


def pattern_embeds(
    pattern: Instance,
    target: Instance,
    rigid: Iterable[Term] = (),
) -> bool:
    """Does the pattern occur inside the target, injectively, with the
    rigid terms fixed and all others renamed freely?"""
    rigid = set(rigid)
    pat = sorted(pattern, key=atom_key)
    seed_used = {t for a in pat for t in a.args if t in rigid}

    def extend(i: int, fwd: dict[Term, Term], used: set[Term]) -> bool:
        if i == len(pat):
            return True
        atom_p = pat[i]
        for atom_t in sorted(target, key=atom_key):
            if atom_t.pred != atom_p.pred or len(atom_t.args) != len(atom_p.args):
                continue
            new_fwd, new_used = dict(fwd), set(used)
            ok = True
            for tp, tt in zip(atom_p.args, atom_t.args):
                if tp in rigid:
                    if tp != tt:
                        ok = False
                        break
                    continue
                bound = new_fwd.get(tp)
                if bound is None:
                    if tt in new_used:
                        ok = False
                        break
                    new_fwd[tp] = tt
                    new_used.add(tt)
                elif bound != tt:
                    ok = False
                    break
            if ok and extend(i + 1, new_fwd, new_used):
                return True
        return False

    return extend(0, {}, seed_used)


# --- refutation decisiveness ------------------------------------------------


def refutation_decisive(
    spec: ObdmSpec,
    Qs: ConjunctiveQuery,
    budget: Budget | None = None,
) -> bool:
    """Conservative estimate of whether the bounded search frame covers
    the canonical countermodel space for this source query: the pool
    must be able to name every source null distinctly, and for every
    valuation the canonically completed target (ignoring equality
    merges, which only shrink it) must fit the atom and fresh-element
    bounds."""
    budget = budget or Budget()
    ioq = instance_of_query(Qs)
    nulls = sorted({t for t in dom(ioq.instance) | set(ioq.head)
                    if t.kind != CONST}, key=term_key)
    spec_consts = {t for t in dom(ioq.instance) if t.kind == CONST}
    pool = _valuation_pool(spec_consts, budget)
    if len(pool) < len(nulls):
        return False
    for v in _valuations(nulls, pool):
        C = apply_valuation(v, ioq.instance)
        base: set[Atom] = set()
        fresh_needed = 0
        extras = [Term(CONST, x) for x in budget.extra_domain]
        for tgd in spec.mapping:
            ex = tgd.existentials()
            for h in brute_assignments(tgd.body, C):
                inst = dict(h)
                for z in ex:
                    if fresh_needed >= len(extras):
                        return False
                    inst[z] = extras[fresh_needed]
                    fresh_needed += 1
                base |= {Atom(a.pred, tuple(inst.get(t, t) for t in a.args))
                         for a in tgd.head}
        minter = _ExtrasMinter(extras[fresh_needed:])
        try:
            completed = canonical_model(spec.tbox, frozenset(base), depth=len(extras) + 1,
                                        minter=minter)
        except _ExtrasExhausted:
            return False
        if len(completed) > budget.max_model_atoms:
            return False
    return True


class _ExtrasExhausted(Exception):
    pass


class _ExtrasMinter:
    """Hands out the budget's remaining fresh elements; running dry means
    the frame cannot host the canonical completion."""

    def __init__(self, extras: list[Term]):
        self._extras = list(extras)

    def fresh_s(self) -> Term:
        if not self._extras:
            raise _ExtrasExhausted()
        return self._extras.pop(0)
