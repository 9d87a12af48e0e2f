"""Coherence, conflict, redundancy and acyclicity checks, plus the
incoherence dependency graph used to pick safe pairs."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .core import Background, DefiniteClause, HornExpression, format_clause, weaken
from .entail import clause_graph_successors, closure_atoms

ENTAILED = "entailed"
CLASH = "clash"


class Incoherence(NamedTuple):
    """Why *clause* is not coherent.

    ``reason`` is ``"entailed"`` when the rest of the expression implies the
    clause, or ``"clash"`` when *other* derives (or is derived by) it while
    their consequents exclude each other.
    """

    clause: DefiniteClause
    reason: str
    other: DefiniteClause | None = None


class Node(NamedTuple):
    psi: DefiniteClause
    phi: DefiniteClause

    def sort_key(self):
        return self.psi.sort_key(), self.phi.sort_key()


def _clashing(f: frozenset[DefiniteClause], c: DefiniteClause, b: Background):
    ex = b.excludents(c.consequent)
    return [psi for psi in f if psi.consequent in ex]


def clause_incoherence(
    f: HornExpression, c: DefiniteClause, b: Background
) -> Incoherence | None:
    """First reason why *c* is not coherent with ``f ∪ {c}``, or None."""
    g = f.clauses | {c}
    if c.trivial or c.consequent in closure_atoms(g, c.antecedent, without=c):
        return Incoherence(c, ENTAILED)
    others = sorted(_clashing(g, c, b), key=DefiniteClause.sort_key)
    if not others:
        return None
    from_c = closure_atoms(g, c.antecedent)
    for psi in others:
        if psi.antecedent <= from_c:
            return Incoherence(c, CLASH, psi)
        if c.antecedent <= closure_atoms(g, psi.antecedent):
            return Incoherence(c, CLASH, psi)
    return None


def is_coherent_clause(f: HornExpression, c: DefiniteClause, b: Background) -> bool:
    return clause_incoherence(f, c, b) is None


def incoherences(f: HornExpression, b: Background) -> Iterator[Incoherence]:
    """Every member clause that is not coherent with *f*, in canonical order."""
    cs = f.clauses
    reach = {}
    for c in f:
        if c.trivial or c.consequent in closure_atoms(cs, c.antecedent, without=c):
            yield Incoherence(c, ENTAILED)
            continue
        for psi in sorted(_clashing(cs, c, b), key=DefiniteClause.sort_key):
            if psi not in reach:
                reach[psi] = closure_atoms(cs, psi.antecedent)
            if c not in reach:
                reach[c] = closure_atoms(cs, c.antecedent)
            if c.antecedent <= reach[psi] or psi.antecedent <= reach[c]:
                yield Incoherence(c, CLASH, psi)
                break


def is_coherent(f: HornExpression, b: Background) -> bool:
    return next(incoherences(f, b), None) is None


def redundant_clauses(f: HornExpression) -> list[DefiniteClause]:
    return [c for c in f if c.consequent in closure_atoms(f.clauses, c.antecedent, without=c)]


def is_redundant(f: HornExpression) -> bool:
    return any(
        c.consequent in closure_atoms(f.clauses, c.antecedent, without=c) for c in f
    )


def find_cycle(f: HornExpression) -> list[DefiniteClause] | None:
    """A clause cycle ``c1, ..., ck`` with cons(ci) in ant(ci+1) and cons(ck) in ant(c1)."""
    succ = clause_graph_successors(f.clauses)
    white, grey, black = 0, 1, 2
    color = dict.fromkeys(succ, white)
    for root in succ:
        if color[root] != white:
            continue
        path = [root]
        color[root] = grey
        stack = [iter(succ[root])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                color[path.pop()] = black
                continue
            if color[nxt] == grey:
                return path[path.index(nxt):]
            if color[nxt] == white:
                color[nxt] = grey
                path.append(nxt)
                stack.append(iter(succ[nxt]))
    return None


def is_cyclic(f: HornExpression) -> bool:
    return find_cycle(f) is not None


def conflicts(f: HornExpression, b: Background) -> Iterator[Node]:
    """Clashing pairs ``(phi, psi)``, phi deriving psi, that no single
    excludent weakening of psi can repair.

    A repair adds some q, excludent of an atom in ant(phi) \\ ant(psi), to psi
    and must leave the result coherent with f without psi.
    """
    cs = f.clauses
    for phi in f:
        ex = b.excludents(phi.consequent)
        if not ex:
            continue
        reach = closure_atoms(cs, phi.antecedent)
        for psi in f:
            if psi.consequent not in ex or not psi.antecedent <= reach:
                continue
            rest = f.without(psi)
            repairable = any(
                is_coherent_clause(rest, weaken(psi, q), b)
                for r in sorted(phi.antecedent - psi.antecedent)
                for q in sorted(b.excludents(r))
            )
            if not repairable:
                yield Node(phi, psi)


def is_in_conflict(f: HornExpression, b: Background) -> bool:
    return next(conflicts(f, b), None) is not None


def derivation_participants(
    f: HornExpression, psi: DefiniteClause, phi: DefiniteClause
) -> frozenset[DefiniteClause]:
    """Clauses that can sit strictly inside some derivation of phi w.r.t. psi.

    A clause qualifies when it fires from ant(psi) and its consequent feeds,
    through a chain of firing clauses, into ant(phi).  Taking those clauses
    in topological order between psi and phi gives a derivation, so on an
    acyclic expression this is exact.  The walk never goes through psi: a
    derivation lists psi once, at its start.
    """
    cs = f.clauses | {psi}
    reach = closure_atoms(cs, psi.antecedent)
    producers: dict[str, list[DefiniteClause]] = defaultdict(list)
    for c in cs:
        if c.antecedent <= reach:
            producers[c.consequent].append(c)
    seen: set[DefiniteClause] = set()
    todo = [phi]
    while todo:
        x = todo.pop()
        for a in x.antecedent:
            for c in producers.get(a, ()):
                if c != phi and c != psi and c not in seen:
                    seen.add(c)
                    todo.append(c)
    return frozenset(seen)


@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple[Node, ...]
    edges: tuple[tuple[Node, Node], ...]

    def parents(self, v: Node) -> list[Node]:
        return [u for u, w in self.edges if w == v]

    def parentless(self) -> list[Node]:
        children = {w for _, w in self.edges}
        return [v for v in self.nodes if v not in children]

    def to_dot(self, complements: frozenset[str] = frozenset()) -> str:
        ids = {v: f"n{i}" for i, v in enumerate(self.nodes)}
        lines = ["digraph dependency {"]
        for v in self.nodes:
            label = f"{format_clause(v.psi, complements)} ⇒ {format_clause(v.phi, complements)}"
            label = label.replace("\\", "\\\\").replace('"', '\\"')
            lines.append(f'  {ids[v]} [label="{label}"];')
        for u, v in self.edges:
            lines.append(f"  {ids[u]} -> {ids[v]};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def graph_nodes(f: HornExpression, b: Background) -> list[Node]:
    cs = f.clauses
    out = []
    for psi in f:
        ex = b.excludents(psi.consequent)
        if not ex:
            continue
        reach = None
        for phi in f:
            if phi.consequent not in ex:
                continue
            if reach is None:
                reach = closure_atoms(cs, psi.antecedent)
            if phi.antecedent <= reach:
                out.append(Node(psi, phi))
    return sorted(out, key=Node.sort_key)


def dependency_graph(f: HornExpression, b: Background) -> DependencyGraph:
    """Nodes are clashing pairs (psi, phi) with psi deriving phi; an edge
    (u, v) means u's phi participates in a derivation behind v."""
    nodes = graph_nodes(f, b)
    by_phi: dict[DefiniteClause, list[Node]] = defaultdict(list)
    for v in nodes:
        by_phi[v.phi].append(v)
    edges = []
    for v in nodes:
        for c in derivation_participants(f, v.psi, v.phi):
            edges.extend((u, v) for u in by_phi.get(c, ()))
    edges.sort(key=lambda e: (e[0].sort_key(), e[1].sort_key()))
    return DependencyGraph(tuple(nodes), tuple(edges))


def find_safe_pair(f: HornExpression, b: Background) -> Node | None:
    """Least parentless node of the dependency graph, if any."""
    nodes = graph_nodes(f, b)
    if not nodes:
        return None
    incoherent_phis = {v.phi for v in nodes}
    for v in nodes:
        if not derivation_participants(f, v.psi, v.phi) & incoherent_phis:
            return v
    return None
