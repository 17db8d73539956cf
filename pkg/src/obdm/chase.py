"""The chase: source-to-target tgd application, egd fixpoint with the
priority equate policy, and ABox construction by freezing.

Equating two distinct terms picks the survivor by priority: a constant
beats any null, a source null beats a chase null, and between two nulls
of the same pool the canonically smaller label survives (the policy is
silent there; determinism is the point).  Two distinct constants cannot
be equated: the chase fails, and failure is a value, not an exception.

The substitution ``psi`` records, for every source null of the input,
the representative it ended up equated to; its domain is source nulls
only and it is idempotent by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .terms import (
    CONST,
    NULL_D,
    NULL_S,
    VAR,
    Atom,
    Instance,
    NullMinter,
    Term,
    apply_map_atom,
    atom_key,
    dom,
    freeze_instance,
    term_key,
)
from .queries import ConjunctiveQuery, UnionQuery
from .evaluation import homomorphisms

TraceFn = Callable[[str], None]


@dataclass(frozen=True)
class StTgd:
    """Source-to-target tgd: body CQ over the source schema, head CQ over
    the ontology vocabulary; head variables absent from the body are
    existentially quantified."""

    name: str
    body: tuple[Atom, ...]
    head: tuple[Atom, ...]

    def __post_init__(self):
        if not self.body or not self.head:
            raise ValueError("tgd needs a nonempty body and head")

    def frontier(self) -> set[Term]:
        return self.body_vars() & self.head_vars()

    def body_vars(self) -> set[Term]:
        return {t for a in self.body for t in a.args if t.kind == VAR}

    def head_vars(self) -> set[Term]:
        return {t for a in self.head for t in a.args if t.kind == VAR}

    def existentials(self) -> list[Term]:
        ex = self.head_vars() - self.body_vars()
        return sorted(ex, key=term_key)


@dataclass(frozen=True)
class Egd:
    """Equality-generating dependency: body CQ plus the pair of body
    variables it forces equal."""

    name: str
    body: tuple[Atom, ...]
    equality: tuple[Term, Term]

    def __post_init__(self):
        body_terms = {t for a in self.body for t in a.args}
        for t in self.equality:
            if t not in body_terms:
                raise ValueError(f"equality variable {t!r} not in egd body")


@dataclass(frozen=True)
class ChaseOutcome:
    failed: bool
    result: Instance | None = None
    psi: dict[Term, Term] | None = None
    conflict: tuple[Term, Term] | None = None

    def __post_init__(self):
        if not self.failed:
            assert self.psi is not None and all(k.kind == NULL_D for k in self.psi)


FAILURE = ChaseOutcome(failed=True)


def _fmt_subst(h: dict[Term, Term]) -> str:
    items = sorted(h.items(), key=lambda kv: term_key(kv[0]))
    return ", ".join(f"{k.label} -> {v.label}" for k, v in items)


def chase_tgds(
    D: Instance,
    tgds: Sequence[StTgd],
    minter: NullMinter | None = None,
    trace: TraceFn | None = None,
    _step: list[int] | None = None,
) -> Instance:
    """Apply every tgd trigger once: for each homomorphism of a tgd body
    into D, add the head atoms with fresh chase nulls for existential
    variables.  Source-to-target tgds cannot cascade, so one pass is the
    fixpoint."""
    if minter is None:
        minter = NullMinter(reserved={t.label for t in dom(D)})
    step = _step if _step is not None else [0]
    out: set[Atom] = set()
    for tgd in tgds:
        homs = sorted(
            homomorphisms(tgd.body, D),
            key=lambda h: tuple(term_key(h[v]) for v in sorted(h, key=term_key)),
        )
        for h in homs:
            inst = dict(h)
            for z in tgd.existentials():
                inst[z] = minter.fresh_s()
            out.update(apply_map_atom(inst, a) for a in tgd.head)
            step[0] += 1
            if trace:
                trace(f"STEP {step[0]} TGD {tgd.name} {_fmt_subst(inst)}")
    return frozenset(out)


def _elect(a: Term, b: Term) -> tuple[Term, Term] | None:
    """Survivor election; None means two distinct constants (failure)."""
    rank = {CONST: 0, NULL_D: 1, NULL_S: 2}
    if rank[a.kind] != rank[b.kind]:
        a, b = sorted((a, b), key=lambda t: rank[t.kind])
        return a, b
    if a.kind == CONST:
        return None
    # same pool: canonically smaller label survives
    a, b = sorted((a, b), key=term_key)
    return a, b


def chase_egds(
    J: Instance,
    egds: Sequence[Egd],
    trace: TraceFn | None = None,
    pick: Callable[[list], int] | None = None,
    _step: list[int] | None = None,
) -> ChaseOutcome:
    """Run the egd fixpoint on J.  Each round collects the violations
    (egd, homomorphism) with distinct images for the forced equality and
    resolves one of them; by default the canonically first, or the one a
    supplied ``pick`` callback selects (used to exercise order
    independence).  Terminates because every step removes a term."""
    atoms = set(J)
    initial_d = {t for t in dom(J) if t.kind == NULL_D}
    merged: dict[Term, Term] = {}
    step = _step if _step is not None else [0]

    def resolve(t: Term) -> Term:
        while t in merged:
            t = merged[t]
        return t

    while True:
        violations: list[tuple[int, Egd, Term, Term]] = []
        for i, egd in enumerate(egds):
            x1, x2 = egd.equality
            for h in homomorphisms(egd.body, atoms):
                a, b = h.get(x1, x1), h.get(x2, x2)
                if a != b:
                    violations.append((i, egd, a, b))
        if not violations:
            break
        violations.sort(key=lambda v: (v[0], term_key(v[2]), term_key(v[3])))
        idx = 0 if pick is None else pick(violations)
        _, egd, a, b = violations[idx]
        elected = _elect(a, b)
        if elected is None:
            if trace:
                trace(f"STEP {step[0] + 1} EGD {egd.name} FAIL {a.label} = {b.label}")
            return ChaseOutcome(failed=True, conflict=(a, b))
        survivor, loser = elected
        atoms = {apply_map_atom({loser: survivor}, at) for at in atoms}
        merged[loser] = survivor
        step[0] += 1
        if trace:
            trace(f"STEP {step[0]} EGD {egd.name} {loser.label} -> {survivor.label}")

    psi = {t: resolve(t) for t in initial_d if resolve(t) != t}
    return ChaseOutcome(failed=False, result=frozenset(atoms), psi=psi)


def egds_of_negated_ucq(Q1: UnionQuery) -> list[Egd]:
    """Negate a UCQ with exactly one inequality per disjunct into egds:
    each disjunct body becomes an egd body and its inequality the forced
    equality."""
    out = []
    for i, d in enumerate(Q1, start=1):
        if d.inequality is None:
            raise ValueError("disjunct without inequality cannot become an egd")
        out.append(Egd(f"e{i}", d.query.body, d.inequality))
    return out


@dataclass(frozen=True)
class AboxResult:
    failed: bool
    abox: Instance | None = None
    psi: dict[Term, Term] | None = None


def abox_of(
    D: Instance,
    tgds: Sequence[StTgd],
    tbox,
    trace: TraceFn | None = None,
) -> AboxResult:
    """Chase D by the mapping, then by the egds negating the TBox's
    one-inequality satisfiability disjuncts; on success freeze the
    surviving nulls into constants that keep their labels."""
    from .dllite import build_qsat

    _, q1 = build_qsat(tbox)
    step = [0]
    minter = NullMinter(reserved={t.label for t in dom(D)})
    J = chase_tgds(D, tgds, minter, trace, _step=step)
    outcome = chase_egds(J, egds_of_negated_ucq(q1), trace, _step=step)
    if outcome.failed:
        return AboxResult(failed=True)
    return AboxResult(failed=False, abox=freeze_instance(outcome.result), psi=outcome.psi)
