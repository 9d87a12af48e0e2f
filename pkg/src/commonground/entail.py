"""Forward chaining, clause entailment and the derivation relation.

Closure is computed in layers: layer 1 holds the clauses whose antecedent is
inside the seed, layer k+1 the clauses enabled by consequents of layer k.
Each clause fires at most once, so there are at most ``len(f)`` layers.
Counters per clause make a run linear in the number of literals touched.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .core import DefiniteClause, HornExpression


@dataclass(frozen=True)
class Closure:
    derived: frozenset[str]
    used_clauses: frozenset[DefiniteClause]
    rounds: int


class _Index:
    __slots__ = ("clauses", "position", "watch", "sizes", "unconditional")

    def __init__(self, clauses: tuple[DefiniteClause, ...]):
        self.clauses = clauses
        self.position = {c: i for i, c in enumerate(clauses)}
        watch: dict[str, list[int]] = defaultdict(list)
        for i, c in enumerate(clauses):
            for a in c.antecedent:
                watch[a].append(i)
        self.watch = dict(watch)
        self.sizes = [len(c.antecedent) for c in clauses]
        self.unconditional = [i for i, c in enumerate(clauses) if not c.antecedent]

    def run(self, seed: Iterable[str], skip: int = -1) -> tuple[set[str], list[int], int]:
        clauses, watch = self.clauses, self.watch
        missing = self.sizes[:]
        derived = set(seed)
        ready = list(self.unconditional)
        for a in derived:
            for i in watch.get(a, ()):
                missing[i] -= 1
                if missing[i] == 0:
                    ready.append(i)
        fired: list[int] = []
        rounds = 0
        while ready:
            layer = [i for i in ready if i != skip]
            ready = []
            if not layer:
                break
            rounds += 1
            fired.extend(layer)
            for i in layer:
                head = clauses[i].consequent
                if head in derived:
                    continue
                derived.add(head)
                for j in watch.get(head, ()):
                    missing[j] -= 1
                    if missing[j] == 0:
                        ready.append(j)
        return derived, fired, rounds


@lru_cache(maxsize=512)
def _index(clauses: frozenset[DefiniteClause]) -> _Index:
    return _Index(tuple(sorted(clauses, key=DefiniteClause.sort_key)))


def _clauses(f: HornExpression | Iterable[DefiniteClause]) -> frozenset[DefiniteClause]:
    return f.clauses if isinstance(f, HornExpression) else frozenset(f)


def closure_atoms(
    f: HornExpression | Iterable[DefiniteClause],
    seed: Iterable[str],
    without: DefiniteClause | None = None,
) -> set[str]:
    """Atoms derivable from *seed*, optionally ignoring clause *without*."""
    idx = _index(_clauses(f))
    skip = idx.position.get(without, -1) if without is not None else -1
    return idx.run(seed, skip)[0]


def close(f: HornExpression | Iterable[DefiniteClause], seed: Iterable[str]) -> Closure:
    idx = _index(_clauses(f))
    derived, fired, rounds = idx.run(seed)
    return Closure(frozenset(derived), frozenset(idx.clauses[i] for i in fired), rounds)


def entails_clause(f: HornExpression | Iterable[DefiniteClause], c: DefiniteClause) -> bool:
    if c.trivial:
        return True
    return c.consequent in closure_atoms(f, c.antecedent)


def entails(f: HornExpression | Iterable[DefiniteClause], g: Iterable[DefiniteClause]) -> bool:
    return all(entails_clause(f, c) for c in g)


def equivalent(f: HornExpression, g: HornExpression) -> bool:
    return entails(f, g) and entails(g, f)


def derives(
    f: HornExpression | Iterable[DefiniteClause], psi: DefiniteClause, phi: DefiniteClause
) -> bool:
    """``psi => phi``: from ant(psi), with psi added to f, every atom of ant(phi) follows."""
    cs = _clauses(f)
    if psi not in cs:
        cs = cs | {psi}
    if phi.antecedent <= psi.antecedent:
        return True
    return phi.antecedent <= closure_atoms(cs, psi.antecedent)


def clause_graph_successors(clauses: Iterable[DefiniteClause]) -> dict[DefiniteClause, list[DefiniteClause]]:
    """Edges ``a -> b`` whenever the consequent of a occurs in the antecedent of b."""
    ordered = sorted(clauses, key=DefiniteClause.sort_key)
    by_atom: dict[str, list[DefiniteClause]] = defaultdict(list)
    for c in ordered:
        for a in c.antecedent:
            by_atom[a].append(c)
    return {c: by_atom.get(c.consequent, []) for c in ordered}
