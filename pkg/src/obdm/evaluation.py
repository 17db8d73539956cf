"""CQ and UCQ evaluation by backtracking homomorphism search.

Databases are instances; they may contain nulls, in which case nulls are
treated as ordinary (rigid) domain elements.  The builtin ``top`` atom
holds for every element of the active domain, plus any constant in the
query head, plus any caller-supplied extra domain; ``bottom`` holds for
nothing.
"""

from __future__ import annotations

from itertools import product
from typing import Iterable, Iterator

from .terms import (
    BOTTOM,
    CONST,
    TOP,
    VAR,
    Atom,
    Instance,
    Term,
    dom,
    term_key,
)
from .queries import BOTTOM_FORM, ConjunctiveQuery, UnionQuery


def _index(db: Iterable[Atom]) -> dict[str, list[tuple[Term, ...]]]:
    idx: dict[str, list[tuple[Term, ...]]] = {}
    for a in db:
        idx.setdefault(a.pred, []).append(a.args)
    for rows in idx.values():
        rows.sort(key=lambda args: tuple(term_key(t) for t in args))
    return idx


def _order_atoms(atoms: tuple[Atom, ...]) -> list[Atom]:
    # most-constrained-first: grow the bound set greedily, builtins last
    remaining = [a for a in atoms if not a.is_builtin]
    ordered: list[Atom] = []
    bound: set[Term] = set()
    while remaining:
        def score(a: Atom) -> tuple:
            unbound = sum(1 for t in a.args if t.kind == VAR and t not in bound)
            return (unbound, a.pred, tuple(term_key(t) for t in a.args))
        best = min(remaining, key=score)
        remaining.remove(best)
        ordered.append(best)
        bound |= {t for t in best.args if t.kind == VAR}
    ordered.extend(a for a in atoms if a.is_builtin)
    return ordered


def homomorphisms(
    body: tuple[Atom, ...],
    db: Iterable[Atom],
    top_domain: Iterable[Term] = (),
) -> Iterator[dict[Term, Term]]:
    """Yield every mapping of the body's variables into the database
    under which all atoms hold.  Non-variable terms are rigid."""
    idx = _index(db)
    tops = sorted(set(top_domain), key=term_key)
    ordered = _order_atoms(body)

    def extend(i: int, binding: dict[Term, Term]) -> Iterator[dict[Term, Term]]:
        if i == len(ordered):
            yield dict(binding)
            return
        a = ordered[i]
        if a.pred == BOTTOM:
            return
        if a.pred == TOP:
            slots = []
            slotted: set[Term] = set()
            for t in a.args:
                val = binding.get(t, t) if t.kind == VAR else t
                if t.kind == VAR and t not in binding:
                    if t not in slotted:
                        slotted.add(t)
                        slots.append((t, tops))
                elif val not in tops:
                    return
            for choice in product(*(opts for _, opts in slots)):
                for (v, _), c in zip(slots, choice):
                    binding[v] = c
                yield from extend(i + 1, binding)
            for v, _ in slots:
                binding.pop(v, None)
            return
        for row in idx.get(a.pred, ()):
            if len(row) != len(a.args):
                raise ValueError(f"arity mismatch on predicate {a.pred!r}")
            added: list[Term] = []
            ok = True
            for t, val in zip(a.args, row):
                if t.kind == VAR:
                    seen = binding.get(t)
                    if seen is None:
                        binding[t] = val
                        added.append(t)
                    elif seen != val:
                        ok = False
                        break
                elif t != val:
                    ok = False
                    break
            if ok:
                yield from extend(i + 1, binding)
            for t in added:
                binding.pop(t)

    yield from extend(0, {})


def evaluate_cq(
    q: ConjunctiveQuery,
    db: Instance,
    extra_top_domain: Iterable[Term] = (),
) -> set[tuple[Term, ...]]:
    """Set of head images of the query under all homomorphisms into db."""
    if q.form == BOTTOM_FORM:
        return set()
    top_domain = dom(db) | {t for t in q.head if t.kind == CONST} | set(extra_top_domain)
    out = set()
    for h in homomorphisms(q.body, db, top_domain):
        out.add(tuple(h.get(t, t) for t in q.head))
    return out


def evaluate_ucq(
    Q: UnionQuery,
    db: Instance,
    extra_top_domain: Iterable[Term] = (),
) -> set[tuple[Term, ...]]:
    """Union of the disjunct answers; a disjunct with an inequality only
    contributes homomorphisms mapping its two terms to distinct values."""
    out: set[tuple[Term, ...]] = set()
    for d in Q:
        q = d.query
        if d.inequality is None:
            out |= evaluate_cq(q, db, extra_top_domain)
            continue
        if q.form == BOTTOM_FORM:
            continue
        t1, t2 = d.inequality
        top_domain = dom(db) | {t for t in q.head if t.kind == CONST} | set(extra_top_domain)
        for h in homomorphisms(q.body, db, top_domain):
            if h.get(t1, t1) != h.get(t2, t2):
                out.add(tuple(h.get(t, t) for t in q.head))
    return out


def all_tup(q: ConjunctiveQuery, db: Instance) -> set[tuple[Term, ...]]:
    """All tuples of the query's arity over the constants of db."""
    consts = sorted({t for t in dom(db) if t.kind == CONST}, key=term_key)
    return set(product(consts, repeat=q.arity))
