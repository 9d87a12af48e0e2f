"""Bounded-exhaustive search for common grounds.

Every clause of a common ground is entailed by a single input clause (P4),
so it is a weakening of it: same consequent, larger antecedent.  The search
space is therefore: for each input clause, a non-empty set of at most
``max_weakenings_per_input_clause`` weakenings, each adding at most
``max_added_atoms_per_clause`` atoms.  Results are only as strong as those
bounds, which is why :class:`SearchResult` reports them back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

from .analysis import is_coherent
from .core import Background, DefiniteClause, HornExpression, substitute
from .entail import closure_atoms
from .parser import RuleFile
from .postulates import check_all, check_p3

DEFAULT_CAP = 10**7


class BoundsExplosion(RuntimeError):
    """The bounded space is larger than the configured cap."""

    def __init__(self, count: int, cap: int, what: str = "candidates"):
        self.count, self.cap = count, cap
        super().__init__(f"{what} exceed the cap: {count} > {cap}")


class _Enough(Exception):
    pass


@dataclass(frozen=True)
class SearchBounds:
    max_added_atoms_per_clause: int = 1
    max_weakenings_per_input_clause: int = 2
    atom_universe: frozenset[str] | None = None
    cap: int = DEFAULT_CAP
    allow_degenerate: bool = False
    max_found: int | None = None

    def __post_init__(self):
        if self.max_added_atoms_per_clause < 0:
            raise ValueError("max_added_atoms_per_clause must be >= 0")
        if self.max_weakenings_per_input_clause < 1:
            raise ValueError("max_weakenings_per_input_clause must be >= 1")
        if self.cap < 1:
            raise ValueError("cap must be positive")
        if self.max_found is not None and self.max_found < 1:
            raise ValueError("max_found must be positive")
        if self.atom_universe is not None:
            object.__setattr__(self, "atom_universe", frozenset(self.atom_universe))


@dataclass(frozen=True)
class SearchResult:
    found: tuple[HornExpression, ...]
    exhausted: bool
    visited: int
    bounds: SearchBounds


def _union(inputs: Sequence[HornExpression]) -> HornExpression:
    out = HornExpression()
    for g in inputs:
        out = out.union(g)
    return out


def _universe(inputs: Sequence[HornExpression], b: Background, bounds: SearchBounds) -> list[str]:
    if bounds.atom_universe is not None:
        return sorted(bounds.atom_universe)
    return sorted(_union(inputs).atoms | b.atoms)


def is_degenerate(c: DefiniteClause, b: Background) -> bool:
    """True when ant(c) with cons(c) holds two disjoint atoms.

    Such a clause either never fires in a world that respects *b*, or only
    fires where its consequent is already excluded.
    """
    atoms = c.antecedent | {c.consequent}
    return any(b.excludents(a) & c.antecedent for a in atoms)


def _free_atoms(c: DefiniteClause, universe, b: Background | None) -> list[str]:
    free = [a for a in universe if a not in c.antecedent and a != c.consequent]
    if b is not None:
        blocked = set().union(*(b.excludents(a) for a in c.antecedent | {c.consequent}))
        free = [a for a in free if a not in blocked]
    return free


def clause_weakenings(
    c: DefiniteClause, universe: Sequence[str], max_added: int, b: Background | None = None
) -> list[DefiniteClause]:
    """*c* and its weakenings by up to *max_added* atoms from *universe*.

    Trivial results are skipped.  Given a background *b*, atoms that would
    make the weakening degenerate are skipped too; *c* itself is kept.
    """
    free = _free_atoms(c, universe, b)
    return [
        DefiniteClause(c.antecedent.union(extra), c.consequent)
        for k in range(max_added + 1)
        for extra in combinations(free, k)
        if b is None or k < 2 or not any(b.excludents(x) & set(extra) for x in extra)
    ]


def _guard(bounds: SearchBounds, b: Background) -> Background | None:
    return None if bounds.allow_degenerate else b


def _choices(c: DefiniteClause, universe, b: Background, bounds: SearchBounds) -> list[tuple[DefiniteClause, ...]]:
    ws = clause_weakenings(c, universe, bounds.max_added_atoms_per_clause, _guard(bounds, b))
    return [
        combo
        for k in range(1, bounds.max_weakenings_per_input_clause + 1)
        for combo in combinations(ws, k)
    ]


def _choice_counts(c: DefiniteClause, universe, b: Background, bounds: SearchBounds) -> int:
    if bounds.max_added_atoms_per_clause > 1 and not bounds.allow_degenerate:
        ws = len(clause_weakenings(c, universe, bounds.max_added_atoms_per_clause, b))
        return sum(math.comb(ws, k) for k in range(1, bounds.max_weakenings_per_input_clause + 1))
    n = len(_free_atoms(c, universe, _guard(bounds, b)))
    ws = sum(math.comb(n, k) for k in range(bounds.max_added_atoms_per_clause + 1))
    return sum(math.comb(ws, k) for k in range(1, bounds.max_weakenings_per_input_clause + 1))


def _build(union: HornExpression, picks) -> HornExpression:
    clauses, prov = [], {}
    for c, combo in picks:
        for w in combo:
            clauses.append(w)
            prov.setdefault(w, set()).update(union.sources(c))
    return HornExpression(clauses, prov)


def enumerate_expressions(
    inputs: Sequence[HornExpression], b: Background, bounds: SearchBounds = SearchBounds()
) -> Iterator[HornExpression]:
    """Every candidate of the bounded space, unfiltered, in a fixed order.

    Raises BoundsExplosion up front when the space has more than
    ``bounds.cap`` members.
    """
    union = _union(inputs)
    universe = _universe(inputs, b, bounds)
    total = math.prod(_choice_counts(c, universe, b, bounds) for c in union)
    if total > bounds.cap:
        raise BoundsExplosion(total, bounds.cap)
    per_clause = [(c, _choices(c, universe, b, bounds)) for c in union]

    def walk(i, picks):
        if i == len(per_clause):
            yield _build(union, picks)
            return
        c, options = per_clause[i]
        for combo in options:
            yield from walk(i + 1, picks + [(c, combo)])

    yield from walk(0, [])


def enumerate_candidates(rf: RuleFile, bounds: SearchBounds = SearchBounds()) -> Iterator[HornExpression]:
    return enumerate_expressions(rf.inputs, rf.background, bounds)


def _disturbs(s: DefiniteClause, g: frozenset[DefiniteClause], b: Background) -> bool:
    """Whether ``g ∪ {s}`` has an incoherence that involves *s*.

    Monotone in *g*.  When *g* is coherent this is exactly "``g ∪ {s}`` is
    incoherent", so it bounds from above what any subset of *g* can do.
    """
    if s.trivial:
        return True
    h = g | {s}
    if s.consequent in closure_atoms(h, s.antecedent, without=s):
        return True
    ex = b.excludents(s.consequent)
    from_s = None
    for psi in h:
        if psi.consequent in ex:
            if from_s is None:
                from_s = closure_atoms(h, s.antecedent)
            if psi.antecedent <= from_s or s.antecedent <= closure_atoms(h, psi.antecedent):
                return True
    for x in g:
        if x == s:
            continue
        reach = closure_atoms(h, x.antecedent)
        if not s.antecedent <= reach:
            continue
        if x.consequent in closure_atoms(h, x.antecedent, without=x):
            return True
        xe = b.excludents(x.consequent)
        if any(y.consequent in xe and y.antecedent <= reach for y in g):
            return True
    return False


def _justifiable(w: DefiniteClause, base: DefiniteClause, g: frozenset, b: Background) -> bool:
    """Every atom added to *base* to get *w* can still pass P6 inside *g*.

    P6 keeps an added atom a only if some ``w[q/a]``, q excluding a, is
    incoherent with the final expression: the stakeholder that owns *base*
    entails both ``w[q/a]`` and ``w`` minus a.
    """
    for a in w.antecedent - base.antecedent:
        qs = b.excludents(a)
        if qs and not any(_disturbs(substitute(w, a, q), g, b) for q in qs):
            return False
    return True


def search_expressions(
    inputs: Sequence[HornExpression], b: Background, bounds: SearchBounds = SearchBounds()
) -> SearchResult:
    """All members of the bounded space that satisfy P1 to P6.

    Depth-first over input clauses with forward checking.  Three cuts, each
    safe because the property it tests can only get worse as clauses are
    added: the partial expression must stay coherent, must satisfy P3, and
    every atom added by a weakening must still have a way to pass P6 within
    the partial expression plus all options still open.  ``bounds.cap``
    limits the number of search nodes visited.
    """
    union = _union(inputs)
    universe = _universe(inputs, b, bounds)
    found: dict[frozenset, HornExpression] = {}
    visited = 0

    def ok(f: frozenset) -> bool:
        g = HornExpression(f)
        return is_coherent(g, b) and check_p3(inputs, g, b).passed

    def justified(f: frozenset, picks, domains) -> bool:
        g = f.union(w for _, opts in domains for combo in opts for w in combo)
        return all(_justifiable(w, c, g, b) for c, combo in picks for w in combo)

    def walk(f: frozenset, picks: list, domains: list):
        nonlocal visited
        if not domains:
            cand = HornExpression(f)
            if f not in found and check_all(inputs, cand, b).all_pass:
                found[f] = _build(union, picks)
                if bounds.max_found is not None and len(found) >= bounds.max_found:
                    raise _Enough
            return
        # Most constrained clause first; ties broken canonically.
        k = min(range(len(domains)), key=lambda j: (len(domains[j][1]), domains[j][0].sort_key()))
        c, options = domains[k]
        rest = domains[:k] + domains[k + 1:]
        for combo in options:
            visited += 1
            if visited > bounds.cap:
                raise BoundsExplosion(visited, bounds.cap, "visited search nodes")
            g = f.union(combo)
            if not ok(g):
                continue
            narrowed = [(d, [o for o in opts if ok(g.union(o))]) for d, opts in rest]
            if any(not opts for _, opts in narrowed):
                continue
            new_picks = picks + [(c, combo)]
            if justified(g, new_picks, narrowed):
                walk(g, new_picks, narrowed)

    domains = []
    for c in union:
        options = [o for o in _choices(c, universe, b, bounds) if ok(frozenset(o))]
        domains.append((c, options))
    exhausted = True
    if all(opts for _, opts in domains):
        try:
            walk(frozenset(), [], domains)
        except _Enough:
            exhausted = False
    ordered = sorted(found.values(), key=lambda g: [c.sort_key() for c in g])
    return SearchResult(tuple(ordered), exhausted, visited, bounds)


def in_space(
    inputs: Sequence[HornExpression], b: Background, g: HornExpression,
    bounds: SearchBounds = SearchBounds(),
) -> bool:
    """Whether *g* is one of the candidates :func:`enumerate_expressions` yields."""
    union = _union(inputs)
    universe = _universe(inputs, b, bounds)
    allowed = {c: set(clause_weakenings(c, universe, bounds.max_added_atoms_per_clause,
                                        _guard(bounds, b))) for c in union}
    per_clause = [(c, [w for w in g if w in allowed[c]]) for c in union]
    if any(not ws for _, ws in per_clause):
        return False
    if any(not any(w in allowed[c] for c in union) for w in g):
        return False
    k = bounds.max_weakenings_per_input_clause

    def cover(i: int, covered: frozenset) -> bool:
        if i == len(per_clause):
            return covered == g.clauses
        _, ws = per_clause[i]
        return any(
            cover(i + 1, covered.union(combo))
            for n in range(1, k + 1)
            for combo in combinations(ws, n)
        )

    return cover(0, frozenset())


def search(rf: RuleFile, bounds: SearchBounds = SearchBounds()) -> SearchResult:
    return search_expressions(rf.inputs, rf.background, bounds)
