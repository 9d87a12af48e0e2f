"""Common-ground construction by safe-pair weakening.

Starting from the union of all stakeholder rules, each round picks a safe
pair (psi, phi) and replaces phi by every single-atom weakening phi+q, q an
excludent of some l in ant(psi) \\ ant(phi), that is coherent with the rest.
Inputs that are cyclic, redundant or in conflict are refused up front.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .analysis import (
    CLASH,
    Node,
    clause_incoherence,
    find_safe_pair,
    graph_nodes,
    is_coherent,
    is_cyclic,
    is_in_conflict,
    is_redundant,
)
from .core import Background, DefiniteClause, HornExpression, format_clause, weaken
from .entail import entails, entails_clause
from .parser import RuleFile

CYCLIC = "cyclic"
REDUNDANT = "redundant"
IN_CONFLICT = "in_conflict"


class InternalInvariantViolation(RuntimeError):
    """A loop invariant of the merge failed.  Always a bug, never bad input."""


@dataclass(frozen=True)
class Iteration:
    round: int
    safe_pair: Node
    replaced: DefiniteClause
    added: tuple[DefiniteClause, ...]
    rejected: tuple[tuple[DefiniteClause, str], ...]

    def as_dict(self, complements: frozenset[str] = frozenset()) -> dict:
        fmt = lambda c: format_clause(c, complements)  # noqa: E731
        return {
            "round": self.round,
            "safe_pair": {"psi": fmt(self.safe_pair.psi), "phi": fmt(self.safe_pair.phi)},
            "replaced": fmt(self.replaced),
            "added": [fmt(c) for c in self.added],
            "rejected": [{"clause": fmt(c), "reason": r} for c, r in self.rejected],
        }


@dataclass(frozen=True)
class MergeTrace:
    iterations: tuple[Iteration, ...] = ()

    def __len__(self) -> int:
        return len(self.iterations)

    def as_dict(self, complements: frozenset[str] = frozenset()) -> dict:
        return {"iterations": [it.as_dict(complements) for it in self.iterations]}


@dataclass(frozen=True)
class Refused:
    reasons: frozenset[str]

    def __post_init__(self):
        if not self.reasons:
            raise ValueError("a refusal needs at least one reason")


@dataclass(frozen=True)
class Ground:
    expression: HornExpression
    trace: MergeTrace


MergeOutcome = Union[Refused, Ground]


def preconditions(f: HornExpression, b: Background) -> list[str]:
    """Violated merge preconditions, in a fixed order."""
    reasons = []
    if is_cyclic(f):
        reasons.append(CYCLIC)
    if is_redundant(f):
        reasons.append(REDUNDANT)
    if is_in_conflict(f, b):
        reasons.append(IN_CONFLICT)
    return reasons


def candidate_weakenings(psi: DefiniteClause, phi: DefiniteClause, b: Background) -> list[DefiniteClause]:
    out = {weaken(phi, q) for l in psi.antecedent - phi.antecedent for q in b.excludents(l)}
    return sorted(out, key=DefiniteClause.sort_key)


def _first_pair(f: HornExpression, b: Background) -> Node | None:
    nodes = graph_nodes(f, b)
    return nodes[0] if nodes else None


def merge_expressions(
    inputs: Sequence[HornExpression], b: Background, *, unsafe: bool = False
) -> MergeOutcome:
    """Merge stakeholder expressions under background *b*.

    ``unsafe=True`` picks the least clashing pair whether or not it is safe.
    It exists only so tests can show why safety matters.
    """
    f = HornExpression()
    for g in inputs:
        f = f.union(g)
    reasons = preconditions(f, b)
    if reasons:
        return Refused(frozenset(reasons))

    original = f.clauses
    pick = _first_pair if unsafe else find_safe_pair
    iterations: list[Iteration] = []
    while not is_coherent(f, b):
        if len(iterations) >= len(original):
            raise InternalInvariantViolation("more rounds than input clauses")
        pair = pick(f, b)
        if pair is None:
            raise InternalInvariantViolation(f"incoherent expression without a safe pair: {f}")
        psi, phi = pair
        if not unsafe and (psi not in original or phi not in original):
            raise InternalInvariantViolation(f"safe pair {psi} / {phi} is not made of input clauses")

        rest = f.without(phi)
        added, rejected = [], []
        for c in candidate_weakenings(psi, phi, b):
            why = clause_incoherence(rest, c, b)
            if why is None:
                added.append(c)
            elif why.reason == CLASH:
                rejected.append((c, f"clashes with {why.other}"))
            else:
                rejected.append((c, "entailed by the remaining rules"))
        if not added:
            raise InternalInvariantViolation(f"no coherent weakening of {phi} against {psi}")
        # Siblings are checked one at a time above; one may still follow
        # from another through the rest.  Such a clause adds nothing.
        for c in list(added):
            others = rest.clauses.union(x for x in added if x != c)
            if entails_clause(others, c):
                added.remove(c)
                rejected.append((c, "entailed by a sibling weakening"))

        new = f.replace(phi, added)
        if not entails(f, new):
            raise InternalInvariantViolation("weakening step lost entailment")
        for c in added:
            if clause_incoherence(new.without(c), c, b) is not None:
                raise InternalInvariantViolation(f"added weakening {c} is not coherent with the result")
        iterations.append(Iteration(len(iterations) + 1, pair, phi, tuple(added), tuple(rejected)))
        f = new
    return Ground(f, MergeTrace(tuple(iterations)))


def merge(rf: RuleFile, *, unsafe: bool = False) -> MergeOutcome:
    return merge_expressions(rf.inputs, rf.background, unsafe=unsafe)
