"""Rule-file DSL.

::

    # comment
    disjoint policeCall parentsAlert
    disjoint adult !adult            # !x is atom not_x, disjoint from x
    agent 1 {
        illegalActivity -> policeCall
        illegalActivity & child -> parentsAlert
    }

Rules inside a block may be separated by newlines, ``;`` or nothing at all.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

from .core import Background, DefiniteClause, HornExpression, format_atom, format_clause

E_SYNTAX = "E_SYNTAX"
E_NO_EXCLUDENT = "E_NO_EXCLUDENT"
E_TRIVIAL_RULE = "E_TRIVIAL_RULE"
E_BAD_DISJOINT = "E_BAD_DISJOINT"
E_BAD_AGENT = "E_BAD_AGENT"
W_DUPLICATE_RULE = "W_DUPLICATE_RULE"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    line: int
    col: int
    msg: str
    severity: str = "error"

    def as_dict(self) -> dict:
        return {"code": self.code, "line": self.line, "col": self.col, "msg": self.msg,
                "severity": self.severity}

    def render(self, path: str = "<input>") -> str:
        return f"{path}:{self.line}:{self.col}: {self.severity} {self.code}: {self.msg}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        errors = [d for d in diagnostics if d.severity == "error"]
        super().__init__("; ".join(f"{d.line}:{d.col} {d.code} {d.msg}" for d in errors))


@dataclass(frozen=True)
class RuleFile:
    background: Background
    stakeholders: tuple[tuple[int, HornExpression], ...]
    diagnostics: tuple[Diagnostic, ...] = field(default=(), compare=False, repr=False)

    @property
    def inputs(self) -> list[HornExpression]:
        return [f for _, f in self.stakeholders]

    def union(self) -> HornExpression:
        out = HornExpression()
        for _, f in self.stakeholders:
            out = out.union(f)
        return out

    @property
    def atoms(self) -> frozenset[str]:
        return self.union().atoms | self.background.atoms

    @property
    def complements(self) -> frozenset[str]:
        """Atoms x whose ``not_x`` partner is declared disjoint from them."""
        out = set()
        for pair in self.background.disjoint_pairs:
            a, b = sorted(pair, key=len)
            if b == "not_" + a:
                out.add(a)
        return frozenset(out)


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<arrow>->)|(?P<punct>[{}&;!])|(?P<word>[A-Za-z0-9_]+)|(?P<bad>.)"
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> Iterator[_Tok]:
    line, start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        col = m.start() - start + 1
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind in ("ws", "comment"):
            continue
        else:
            yield _Tok(kind, m.group(), line, col)
    yield _Tok("eof", "", line, len(text) - start + 1)


class _Parser:
    def __init__(self, text: str, inherited: Background | None = None):
        self.toks = list(_tokenize(text))
        self.i = 0
        self.pairs: list[tuple[str, str]] = list(inherited.ordered_pairs()) if inherited else []
        self.first_seen: dict[str, tuple[int, int]] = {}
        self.diags: list[Diagnostic] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg: str, tok: _Tok | None = None, code: str = E_SYNTAX):
        tok = tok or self.tok
        raise ParseError(self.diags + [Diagnostic(code, tok.line, tok.col, msg)])

    def take(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = tok.text or "end of input"
            self.fail(f"expected {want!r}, got {got!r}")
        self.i += 1
        return tok

    def atom(self, in_rule: bool) -> str:
        bang = self.tok.kind == "punct" and self.tok.text == "!"
        start = self.tok
        if bang:
            self.i += 1
        name = self.take("word").text
        if bang:
            self.pairs.append((name, "not_" + name))
            name = "not_" + name
        if in_rule:
            self.first_seen.setdefault(name, (start.line, start.col))
        return name

    def rule(self) -> tuple[DefiniteClause, _Tok]:
        start = self.tok
        ant = []
        if not (self.tok.kind == "arrow"):
            ant.append(self.atom(True))
            while self.tok.kind == "punct" and self.tok.text == "&":
                self.i += 1
                ant.append(self.atom(True))
        self.take("arrow")
        head = self.atom(True)
        return DefiniteClause(ant, head), start

    def parse(self, strict: bool) -> RuleFile:
        agents: list[tuple[int, HornExpression, _Tok]] = []
        while self.tok.kind != "eof":
            tok = self.tok
            if tok.kind == "punct" and tok.text == ";":
                self.i += 1
            elif tok.kind == "word" and tok.text == "disjoint":
                self.i += 1
                a, b = self.atom(False), self.atom(False)
                if a == b:
                    self.fail(f"atom {a} cannot be disjoint from itself", tok, E_BAD_DISJOINT)
                self.pairs.append((a, b))
                nxt = self.tok
                if (nxt.kind != "eof" and nxt.line == tok.line and nxt.text != ";"
                        and nxt.text not in ("agent", "disjoint")):
                    self.fail("disjointness constraints relate exactly two atoms")
            elif tok.kind == "word" and tok.text == "agent":
                self.i += 1
                num = self.take("word")
                if not num.text.isdigit() or int(num.text) < 1:
                    self.fail(f"agent id must be a positive integer, got {num.text!r}", num, E_BAD_AGENT)
                agents.append((int(num.text), self.block(int(num.text), strict), num))
            else:
                self.fail(f"unexpected {tok.text!r}; expected 'disjoint' or 'agent'")

        seen = set()
        for aid, _, tok in agents:
            if aid in seen:
                self.fail(f"duplicate agent id {aid}", tok, E_BAD_AGENT)
            seen.add(aid)
        if sorted(seen) != list(range(1, len(seen) + 1)):
            tok = agents[-1][2]
            self.fail("agent ids must be contiguous from 1", tok, E_BAD_AGENT)

        background = Background(self.pairs)
        missing = [a for a in self.first_seen if not background.excludents(a)]
        if missing:
            errs = [Diagnostic(E_NO_EXCLUDENT, *self.first_seen[a], f"atom {a} has no excludent")
                    for a in missing]
            raise ParseError(self.diags + errs)
        stake = tuple(sorted(((aid, f) for aid, f, _ in agents), key=lambda t: t[0]))
        return RuleFile(background, stake, tuple(self.diags))

    def block(self, aid: int, strict: bool) -> HornExpression:
        self.take("punct", "{")
        rules: list[DefiniteClause] = []
        while not (self.tok.kind == "punct" and self.tok.text == "}"):
            if self.tok.kind == "punct" and self.tok.text == ";":
                self.i += 1
                continue
            if self.tok.kind == "eof":
                self.fail("unterminated agent block")
            c, start = self.rule()
            if c.trivial:
                d = Diagnostic(E_TRIVIAL_RULE, start.line, start.col,
                               f"rule {c} has its consequent in its antecedent",
                               "error" if strict else "warning")
                if strict:
                    raise ParseError(self.diags + [d])
                self.diags.append(d)
            if c in rules:
                self.diags.append(Diagnostic(W_DUPLICATE_RULE, start.line, start.col,
                                             f"duplicate rule {c} in agent {aid}", "warning"))
                continue
            rules.append(c)
        self.take("punct", "}")
        return HornExpression(rules, {c: {aid} for c in rules})


def parse(text: str, strict: bool = False, background: Background | None = None) -> RuleFile:
    """Parse and validate a rule file.  Raises ParseError with diagnostics.

    *background* supplies disjointness pairs declared elsewhere, e.g. when a
    candidate common ground is read against the input file it came from.
    """
    return _Parser(text, background).parse(strict)


def serialize(rf: RuleFile) -> str:
    comp = rf.complements
    lines = []
    for a, b in rf.background.ordered_pairs():
        if a == "not_" + b and b in comp:
            a, b = b, a
        lines.append(f"disjoint {format_atom(a, comp)} {format_atom(b, comp)}")
    for aid, f in rf.stakeholders:
        if lines:
            lines.append("")
        lines.append(f"agent {aid} {{")
        lines.extend(f"  {format_clause(c, comp)}" for c in f)
        lines.append("}")
    return "\n".join(lines) + "\n" if lines else ""


def expression_text(f: HornExpression, complements: frozenset[str] = frozenset()) -> list[str]:
    return [format_clause(c, complements) for c in f]


def report(rf: RuleFile | None, diagnostics=()) -> dict:
    """JSON-ready summary of a parse: status, diagnostics, atoms, disjoint pairs, agents."""
    diags = list(diagnostics) if rf is None else list(rf.diagnostics)
    out = {
        "status": "error" if rf is None else "ok",
        "diagnostics": [d.as_dict() for d in diags],
        "atoms": [],
        "disjoint": [],
        "agents": [],
    }
    if rf is not None:
        comp = rf.complements
        out["atoms"] = sorted(rf.atoms)
        out["disjoint"] = [list(p) for p in rf.background.ordered_pairs()]
        out["agents"] = [{"id": aid, "rules": expression_text(f, comp)} for aid, f in rf.stakeholders]
    return out
