"""Checker for the six common-ground postulates.

Every failing verdict carries a witness that can be re-checked with the
predicates in :mod:`commonground.analysis` and :mod:`commonground.entail`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

from .analysis import incoherences, is_coherent
from .core import Background, DefiniteClause, HornExpression, drop, format_clause, substitute
from .entail import entails_clause

POSTULATES = ("P1", "P2", "P3", "P4", "P5", "P6")


@dataclass(frozen=True)
class Verdict:
    passed: bool
    witness: tuple[Any, ...] | None = None
    detail: str = ""

    def as_dict(self, complements: frozenset[str] = frozenset()) -> dict:
        out: dict[str, Any] = {"pass": self.passed}
        if self.detail:
            out["detail"] = self.detail
        if self.witness is not None:
            out["witness"] = [
                format_clause(w, complements) if isinstance(w, DefiniteClause) else w
                for w in self.witness
            ]
        return out


PASS = Verdict(True)


@dataclass(frozen=True)
class PostulateReport:
    verdicts: dict[str, Verdict] = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.verdicts.items() if not v.passed]

    def __getitem__(self, key: str) -> Verdict:
        return self.verdicts[key]

    def as_dict(self, complements: frozenset[str] = frozenset()) -> dict:
        return {k: v.as_dict(complements) for k, v in self.verdicts.items()}


def _union(inputs: Sequence[HornExpression]) -> HornExpression:
    out = HornExpression()
    for g in inputs:
        out = out.union(g)
    return out


def single_entails(psi: DefiniteClause, phi: DefiniteClause) -> bool:
    """``{psi} |= phi`` for definite clauses, by inspection."""
    return phi.trivial or (psi.consequent == phi.consequent and psi.antecedent <= phi.antecedent)


def check_p1(f: HornExpression, b: Background) -> Verdict:
    bad = next(incoherences(f, b), None)
    if bad is None:
        return PASS
    witness = (bad.clause, bad.reason) + ((bad.other,) if bad.other is not None else ())
    return Verdict(False, witness, "clause not coherent with the expression")


def check_p2(inputs: Sequence[HornExpression], f: HornExpression, b: Background) -> Verdict:
    u = _union(inputs)
    if not is_coherent(u, b):
        return Verdict(True, detail="vacuous: inputs are incoherent")
    for c in u:
        if not entails_clause(f, c):
            return Verdict(False, (c,), "input rule not entailed by the candidate")
    for c in f:
        if not entails_clause(u, c):
            return Verdict(False, (c,), "candidate rule not entailed by the inputs")
    return PASS


def check_p3(inputs: Sequence[HornExpression], f: HornExpression, b: Background) -> Verdict:
    for i, g in enumerate(inputs, 1):
        for phi in g:
            for p in sorted(b.excludents(phi.consequent)):
                opposed = DefiniteClause(phi.antecedent, p)
                if entails_clause(f, opposed):
                    return Verdict(False, (opposed, phi, i), "candidate entails the opposite of an input rule")
    return PASS


def check_p4(inputs: Sequence[HornExpression], f: HornExpression, b: Background) -> Verdict:
    u = _union(inputs)
    for phi in f:
        if not any(entails_clause([psi], phi) for psi in u):
            return Verdict(False, (phi,), "rule not traceable to any input rule")
    return PASS


def check_p5(inputs: Sequence[HornExpression], f: HornExpression, b: Background) -> Verdict:
    for i, g in enumerate(inputs, 1):
        for phi in g:
            if not any(not psi.trivial and entails_clause([phi], psi) for psi in f):
                return Verdict(False, (phi, i), "no non-trivial weakening of an input rule survives")
    return PASS


def p6_violations(
    inputs: Sequence[HornExpression],
    f: HornExpression,
    b: Background,
    premise: str = "all",
) -> Iterator[tuple[DefiniteClause, str, int]]:
    """Every ``(phi, p, i)`` that breaks the unrelated-atom postulate.

    For phi in f and p in ant(phi): if f plus phi[q/p] is coherent for every
    excludent q of p (``premise="any"``: for some q), then no stakeholder i
    with F_i |= phi[q/p] for such a q may have F_i |= phi minus p.
    """
    if premise not in ("all", "any"):
        raise ValueError("premise must be 'all' or 'any'")
    for phi in f:
        for p in sorted(phi.antecedent):
            qs = sorted(b.excludents(p))
            if not qs:
                continue
            subs = [substitute(phi, p, q) for q in qs]
            dropped = drop(phi, p)
            violators = [
                i for i, g in enumerate(inputs, 1)
                if any(entails_clause(g, s) for s in subs) and entails_clause(g, dropped)
            ]
            if not violators:
                continue
            coherent = [is_coherent(f.with_clause(s), b) for s in subs]
            if all(coherent) if premise == "all" else any(coherent):
                for i in violators:
                    yield phi, p, i


def check_p6(
    inputs: Sequence[HornExpression],
    f: HornExpression,
    b: Background,
    premise: str = "all",
) -> Verdict:
    """Unrelated-atom check; the witness is the first of :func:`p6_violations`."""
    bad = next(p6_violations(inputs, f, b, premise), None)
    if bad is None:
        return PASS
    return Verdict(False, bad, "weakening atom is unrelated to any incoherence")


def check_all(
    inputs: Sequence[HornExpression], f: HornExpression, b: Background, p6_premise: str = "all"
) -> PostulateReport:
    return PostulateReport({
        "P1": check_p1(f, b),
        "P2": check_p2(inputs, f, b),
        "P3": check_p3(inputs, f, b),
        "P4": check_p4(inputs, f, b),
        "P5": check_p5(inputs, f, b),
        "P6": check_p6(inputs, f, b, p6_premise),
    })
