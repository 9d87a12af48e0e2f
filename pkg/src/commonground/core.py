"""Atoms, definite clauses, Horn expressions and background knowledge.

Atoms are plain strings.  Everything here is an immutable value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

ATOM_RE = re.compile(r"[A-Za-z0-9_]+\Z")


class AtomNotInAntecedent(ValueError):
    pass


def check_atom(name: str) -> str:
    if not isinstance(name, str) or not ATOM_RE.match(name):
        raise ValueError(f"invalid atom name: {name!r}")
    return name


@dataclass(frozen=True)
class DefiniteClause:
    """A rule ``a1 & ... & an -> c``.  Equality is structural."""

    antecedent: frozenset[str]
    consequent: str

    def __init__(self, antecedent: Iterable[str], consequent: str):
        ant = frozenset(check_atom(a) for a in antecedent)
        object.__setattr__(self, "antecedent", ant)
        object.__setattr__(self, "consequent", check_atom(consequent))

    @property
    def trivial(self) -> bool:
        return self.consequent in self.antecedent

    @property
    def atoms(self) -> frozenset[str]:
        return self.antecedent | {self.consequent}

    def sort_key(self) -> tuple[tuple[str, ...], str]:
        return tuple(sorted(self.antecedent)), self.consequent

    def __lt__(self, other: DefiniteClause) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return format_clause(self)

    def __repr__(self) -> str:
        return f"<{self}>"


def clause(text: str) -> DefiniteClause:
    """Build a clause from ``"p & q -> r"`` shorthand (no sugar expansion)."""
    lhs, sep, rhs = text.partition("->")
    if not sep:
        raise ValueError(f"missing '->' in {text!r}")
    ant = [a.strip() for a in lhs.split("&") if a.strip()]
    return DefiniteClause(ant, rhs.strip())


def format_atom(atom: str, complements: frozenset[str] = frozenset()) -> str:
    if atom.startswith("not_") and atom[4:] in complements:
        return "!" + atom[4:]
    return atom


def format_clause(c: DefiniteClause, complements: frozenset[str] = frozenset()) -> str:
    """Canonical rule text.  Atoms ``not_x`` with ``x`` in *complements* print as ``!x``."""
    ant = " & ".join(format_atom(a, complements) for a in sorted(c.antecedent))
    head = format_atom(c.consequent, complements)
    return f"{ant} -> {head}" if ant else f"-> {head}"


def weaken(c: DefiniteClause, p: str) -> DefiniteClause:
    return DefiniteClause(c.antecedent | {p}, c.consequent)


def drop(c: DefiniteClause, p: str) -> DefiniteClause:
    if p not in c.antecedent:
        raise AtomNotInAntecedent(f"{p} not in antecedent of {c}")
    return DefiniteClause(c.antecedent - {p}, c.consequent)


def substitute(c: DefiniteClause, p: str, q: str) -> DefiniteClause:
    """Replace antecedent atom *p* by *q*."""
    if p not in c.antecedent:
        raise AtomNotInAntecedent(f"{p} not in antecedent of {c}")
    return DefiniteClause((c.antecedent - {p}) | {q}, c.consequent)


@dataclass(frozen=True)
class HornExpression:
    """A finite set of definite clauses.

    ``provenance`` maps clauses to the stakeholder ids that contributed them.
    It is metadata: two expressions with the same clauses compare equal.
    Iteration follows the canonical clause order.
    """

    clauses: frozenset[DefiniteClause] = frozenset()
    provenance: Mapping[DefiniteClause, frozenset[int]] = field(
        default_factory=dict, compare=False, hash=False, repr=False
    )

    def __init__(
        self,
        clauses: Iterable[DefiniteClause] = (),
        provenance: Mapping[DefiniteClause, Iterable[int]] | None = None,
    ):
        cs = frozenset(clauses)
        prov = {c: frozenset(ids) for c, ids in (provenance or {}).items() if c in cs}
        object.__setattr__(self, "clauses", cs)
        object.__setattr__(self, "provenance", prov)

    @classmethod
    def of(cls, *texts: str, agent: int | None = None) -> HornExpression:
        cs = [clause(t) for t in texts]
        prov = {c: {agent} for c in cs} if agent is not None else None
        return cls(cs, prov)

    @cached_property
    def ordered(self) -> tuple[DefiniteClause, ...]:
        return tuple(sorted(self.clauses, key=DefiniteClause.sort_key))

    @cached_property
    def atoms(self) -> frozenset[str]:
        return frozenset().union(*(c.atoms for c in self.clauses))

    def __iter__(self) -> Iterator[DefiniteClause]:
        return iter(self.ordered)

    def __len__(self) -> int:
        return len(self.clauses)

    def __contains__(self, c: object) -> bool:
        return c in self.clauses

    def __str__(self) -> str:
        return "{" + ", ".join(map(str, self.ordered)) + "}"

    def sources(self, c: DefiniteClause) -> frozenset[int]:
        return self.provenance.get(c, frozenset())

    def without(self, c: DefiniteClause) -> HornExpression:
        if c not in self.clauses:
            return self
        return HornExpression(self.clauses - {c}, self.provenance)

    def with_clause(self, c: DefiniteClause, sources: Iterable[int] = ()) -> HornExpression:
        if c in self.clauses:
            return self
        prov = dict(self.provenance)
        prov[c] = frozenset(sources)
        return HornExpression(self.clauses | {c}, prov)

    def union(self, other: HornExpression) -> HornExpression:
        prov = {c: self.sources(c) | other.sources(c) for c in self.clauses | other.clauses}
        return HornExpression(self.clauses | other.clauses, prov)

    def replace(self, old: DefiniteClause, new: Iterable[DefiniteClause]) -> HornExpression:
        """Swap *old* for *new*; added clauses inherit the provenance of *old*."""
        inherited = self.sources(old)
        prov = {c: s for c, s in self.provenance.items() if c != old}
        rest = self.clauses - {old}
        added = set()
        for c in new:
            if c not in rest:
                added.add(c)
                prov[c] = prov.get(c, frozenset()) | inherited
        return HornExpression(rest | added, prov)


@dataclass(frozen=True)
class Background:
    """Pairwise disjointness constraints ``(p & q) -> ⊥``."""

    disjoint_pairs: frozenset[frozenset[str]] = frozenset()

    def __init__(self, pairs: Iterable[Iterable[str]] = ()):
        out = set()
        for pair in pairs:
            pair = frozenset(check_atom(a) for a in pair)
            if len(pair) != 2:
                raise ValueError(f"disjointness needs two distinct atoms, got {sorted(pair)}")
            out.add(pair)
        object.__setattr__(self, "disjoint_pairs", frozenset(out))

    @classmethod
    def complements(cls, *atoms: str) -> Background:
        """Background pairing each atom ``x`` with ``not_x``."""
        return cls((a, "not_" + a) for a in atoms)

    @cached_property
    def excludent_map(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {}
        for pair in self.disjoint_pairs:
            a, b = sorted(pair)
            out.setdefault(a, set()).add(b)
            out.setdefault(b, set()).add(a)
        return {k: frozenset(v) for k, v in out.items()}

    @cached_property
    def atoms(self) -> frozenset[str]:
        return frozenset(self.excludent_map)

    def excludents(self, p: str) -> frozenset[str]:
        return self.excludent_map.get(p, frozenset())

    def clash(self, p: str, q: str) -> bool:
        return q in self.excludents(p)

    def ordered_pairs(self) -> list[tuple[str, str]]:
        return sorted(tuple(sorted(p)) for p in self.disjoint_pairs)

    def union(self, other: Background) -> Background:
        return Background(self.disjoint_pairs | other.disjoint_pairs)


def excludents(b: Background, p: str) -> frozenset[str]:
    return b.excludents(p)


def missing_excludents(f: HornExpression, b: Background) -> list[str]:
    """Atoms of *f* with an empty excludent set."""
    return sorted(a for a in f.atoms if not b.excludents(a))
