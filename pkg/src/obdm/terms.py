"""Terms, atoms and instances.

Every structure in the library is built from four kinds of terms:
ordinary constants, source nulls (placeholders for the unknown values a
source query ranges over), chase nulls (minted by the chase for
existentially quantified head positions), and variables.  Atoms are
predicate applications over terms, and an instance is simply a frozenset
of atoms; a ground instance doubles as a source database and as an
ABox-as-database.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

CONST = "const"
NULL_D = "null_d"
NULL_S = "null_s"
VAR = "var"

_KIND_RANK = {CONST: 0, NULL_D: 1, NULL_S: 2, VAR: 3}

# Reserved builtin predicates; never part of a schema.
TOP = "top"
BOTTOM = "bottom"
BUILTINS = frozenset({TOP, BOTTOM})


@dataclass(frozen=True)
class Term:
    kind: str
    label: str

    def __repr__(self) -> str:
        return f"{self.kind[0]}:{self.label}" if self.kind != CONST else self.label


def const(label: str) -> Term:
    return Term(CONST, label)


def null_d(label: str) -> Term:
    return Term(NULL_D, label)


def null_s(label: str) -> Term:
    return Term(NULL_S, label)


def var(label: str) -> Term:
    return Term(VAR, label)


def _natural(label: str) -> tuple:
    # d10 sorts after d2; labels split into alternating text/number runs
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", label))


def term_key(t: Term) -> tuple:
    """Canonical ordering: Const < NullD < NullSigma < Var, then label."""
    return (_KIND_RANK[t.kind], _natural(t.label), t.label)


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...]

    def __repr__(self) -> str:
        return f"{self.pred}({', '.join(map(repr, self.args))})"

    @property
    def is_builtin(self) -> bool:
        return self.pred in BUILTINS


def atom(pred: str, *args: Term) -> Atom:
    return Atom(pred, tuple(args))


def atom_key(a: Atom) -> tuple:
    return (a.pred, len(a.args), tuple(term_key(t) for t in a.args))


Instance = frozenset  # frozenset[Atom]


def instance(atoms: Iterable[Atom] = ()) -> Instance:
    return frozenset(atoms)


def sorted_atoms(inst: Iterable[Atom]) -> list[Atom]:
    return sorted(inst, key=atom_key)


def dom(inst: Iterable[Atom]) -> set[Term]:
    """All terms occurring in the instance."""
    return {t for a in inst for t in a.args}


def nulls(inst: Iterable[Atom]) -> set[Term]:
    return {t for t in dom(inst) if t.kind in (NULL_D, NULL_S)}


def constants(inst: Iterable[Atom]) -> set[Term]:
    return {t for t in dom(inst) if t.kind == CONST}


def is_ground(inst: Iterable[Atom]) -> bool:
    return all(t.kind == CONST for t in dom(inst))


def freeze_term(t: Term) -> Term:
    """Reinterpret a null as a constant carrying the same label."""
    if t.kind in (NULL_D, NULL_S):
        return Term(CONST, t.label)
    return t


def freeze_tuple(ts: Iterable[Term]) -> tuple[Term, ...]:
    return tuple(freeze_term(t) for t in ts)


def freeze_instance(inst: Instance) -> Instance:
    return frozenset(Atom(a.pred, freeze_tuple(a.args)) for a in inst)


def apply_map(mapping: dict[Term, Term], t: Term) -> Term:
    return mapping.get(t, t)


def apply_map_atom(mapping: dict[Term, Term], a: Atom) -> Atom:
    return Atom(a.pred, tuple(mapping.get(t, t) for t in a.args))


def apply_map_instance(mapping: dict[Term, Term], inst: Iterable[Atom]) -> Instance:
    return frozenset(apply_map_atom(mapping, a) for a in inst)


class NullMinter:
    """Deterministic fresh-null source for one pipeline run.

    Labels follow the stable prefixes `d#` (source nulls) and `s#`
    (chase nulls); a reserved label set keeps minted labels clear of
    user constants so label spaces stay pairwise disjoint.
    """

    def __init__(self, reserved: Iterable[str] = ()):
        self._reserved = set(reserved)
        self._d = 0
        self._s = 0

    def _next(self, prefix: str, counter: int) -> tuple[str, int]:
        while True:
            counter += 1
            label = f"{prefix}{counter}"
            if label not in self._reserved:
                return label, counter

    def fresh_d(self) -> Term:
        label, self._d = self._next("d", self._d)
        return null_d(label)

    def fresh_s(self) -> Term:
        label, self._s = self._next("s", self._s)
        return null_s(label)


def fresh_vars(prefix: str, n: int, taken: set[str]) -> list[Term]:
    """Mint n variable terms `prefix1..` avoiding the taken label set."""
    out: list[Term] = []
    i = 0
    while len(out) < n:
        i += 1
        label = f"{prefix}{i}"
        if label in taken:
            continue
        taken.add(label)
        out.append(var(label))
    return out


def iter_terms(atoms: Iterable[Atom]) -> Iterator[Term]:
    for a in atoms:
        yield from a.args
