"""Text and JSON formats for models, referents, and scenario files.

The text grammar is newline-insensitive: a hand-rolled tokenizer feeds a
recursive-descent parser, and `#` starts a comment anywhere. Antecedents are
restricted to disjunctions of conjunctions; a `|` inside parentheses is a
parse error, so arbitrary boolean nesting never reaches the model layer.

Model files:

    model <Name>
    principles:
      <Principle> [, <Principle> ...]
    variables:
      input|internal|output <Var> [<lo>, <hi>]:
        <term> = (<a>, <b>, <c>, <d>)
        ...
    rules:
      FERR|FERD <Name>: <antecedent> => <Var>(<term>) [& ...]
          cf=<x> principles=[<P> [, <P> ...]]

Referent files open with `referent <Name>` instead, declare variables without
universes or breakpoints (`input <Var>: <term>, <term>, ...`), and add
`priority:` (chains like `A > B > C`), `rho:`, `tau:`, `bands:` (interval
notation, e.g. `[0.0, 0.5) -> accept` or `-> {a, b}`), and `checks:`
(`<Name>: <Var>(<term>)=<degree> [& ...] -> <Var>(<term>) > <threshold>`).

Scenario files are newline-delimited records of `variable=value` pairs.
Both object formats also have a lossless JSON mirror; the parse entry points
sniff for a leading `{` and accept either representation.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import ParseError
from .model import (
    Atom,
    EdmModel,
    FuzzyRule,
    LinguisticVariable,
    TrapezoidMF,
    model_from_dict,
    model_to_dict,
    render_rule,
)
from .validator import (
    Band,
    ReasoningCheck,
    Referent,
    ReferentVariable,
)

SECTION_KEYWORDS = {
    "model",
    "referent",
    "principles",
    "variables",
    "rules",
    "priority",
    "rho",
    "tau",
    "bands",
    "checks",
}
VARIABLE_KEYWORDS = ("input", "internal", "output")
RULE_KEYWORDS = ("FERR", "FERD")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<op>=>|->|>=|<=|[()\[\]{},:=&|><])
  | (?P<number>-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "number" | "op" | "eof"
    value: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, value, line, m.start() - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + value.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        found = tok.value or "end of input"
        raise ParseError(f"{message}, found {found!r}", tok.line, tok.col)

    def expect(self, kind: str, value: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            self.fail(f"expected {value or kind}")
        return self.advance()

    def accept(self, kind: str, value: Optional[str] = None) -> Optional[Token]:
        tok = self.peek()
        if tok.kind == kind and (value is None or tok.value == value):
            return self.advance()
        return None

    def number(self) -> float:
        tok = self.expect("number")
        return float(tok.value)

    def ident(self) -> str:
        return self.expect("ident").value

    def at_section(self) -> bool:
        tok = self.peek()
        return (
            tok.kind == "ident"
            and tok.value in SECTION_KEYWORDS
            and self.peek(1).kind == "op"
            and self.peek(1).value == ":"
        )

    # --- shared pieces -------------------------------------------------------

    def atom(self) -> Atom:
        var = self.ident()
        self.expect("op", "(")
        term = self.ident()
        self.expect("op", ")")
        return Atom(var, term)

    def conjunct(self, inside_parens: bool) -> list[Atom]:
        atoms = self.primary(inside_parens)
        while self.accept("op", "&"):
            atoms.extend(self.primary(inside_parens))
        if inside_parens and self.peek().value == "|":
            self.fail("disjunction is not allowed inside a conjunct; antecedents must be in disjunctive normal form")
        return atoms

    def primary(self, inside_parens: bool) -> list[Atom]:
        if self.accept("op", "("):
            atoms = self.conjunct(inside_parens=True)
            self.expect("op", ")")
            return atoms
        if self.peek().kind == "ident":
            return [self.atom()]
        self.fail("expected an atom or a parenthesized conjunction")

    def antecedent(self) -> tuple[tuple[Atom, ...], ...]:
        disjuncts = [tuple(self.conjunct(inside_parens=False))]
        while self.accept("op", "|"):
            disjuncts.append(tuple(self.conjunct(inside_parens=False)))
        return tuple(disjuncts)

    def principle_list(self) -> tuple[str, ...]:
        self.expect("op", "[")
        names = [self.ident()]
        while self.accept("op", ","):
            names.append(self.ident())
        self.expect("op", "]")
        return tuple(names)

    def rule(self) -> FuzzyRule:
        kind = self.expect("ident").value  # FERR or FERD, guarded by caller
        name = self.ident()
        self.expect("op", ":")
        antecedent = self.antecedent()
        self.expect("op", "=>")
        consequents = [self.atom()]
        while self.accept("op", "&"):
            consequents.append(self.atom())
        self.expect("ident", "cf")
        self.expect("op", "=")
        cf = self.number()
        self.expect("ident", "principles")
        self.expect("op", "=")
        principles = self.principle_list()
        return FuzzyRule(
            name=name,
            kind=kind,
            antecedent=antecedent,
            consequents=tuple(consequents),
            cf=cf,
            principles=principles,
        )

    def rules_section(self) -> list[FuzzyRule]:
        rules = []
        while self.peek().kind == "ident" and self.peek().value in RULE_KEYWORDS:
            rules.append(self.rule())
        if not rules:
            self.fail("expected at least one FERR or FERD rule")
        return rules

    def principles_section(self) -> tuple[str, ...]:
        names = []
        while self.peek().kind == "ident" and not self.at_section():
            names.append(self.ident())
            self.accept("op", ",")
        if not names:
            self.fail("expected at least one principle name")
        return tuple(names)


# --- model parsing -----------------------------------------------------------

def _parse_model_text(text: str) -> EdmModel:
    p = _Parser(text)
    p.expect("ident", "model")
    name = p.ident()

    principles: tuple[str, ...] = ()
    variables: list[LinguisticVariable] = []
    rules: list[FuzzyRule] = []
    seen = set()
    while p.peek().kind != "eof":
        if not p.at_section():
            p.fail("expected a section header")
        section = p.ident()
        p.expect("op", ":")
        if section in seen:
            p.fail(f"duplicate section {section!r}")
        seen.add(section)
        if section == "principles":
            principles = p.principles_section()
        elif section == "variables":
            while p.peek().value in VARIABLE_KEYWORDS:
                variables.append(_variable(p))
            if not variables:
                p.fail("expected at least one variable")
        elif section == "rules":
            rules = p.rules_section()
        else:
            p.fail(f"section {section!r} does not belong in a model file")
    for required in ("principles", "variables", "rules"):
        if required not in seen:
            raise ParseError(f"model file is missing the {required} section")
    return EdmModel.build(name, variables, rules, principles)


def _variable(p: _Parser) -> LinguisticVariable:
    kind = p.ident()
    name = p.ident()
    p.expect("op", "[")
    lo = p.number()
    p.expect("op", ",")
    hi = p.number()
    p.expect("op", "]")
    p.expect("op", ":")
    terms = []
    while p.peek().kind == "ident" and p.peek(1).value == "=":
        term = p.ident()
        p.expect("op", "=")
        p.expect("op", "(")
        a = p.number()
        p.expect("op", ",")
        b = p.number()
        p.expect("op", ",")
        c = p.number()
        p.expect("op", ",")
        d = p.number()
        p.expect("op", ")")
        terms.append((term, TrapezoidMF(a, b, c, d)))
    if not terms:
        p.fail(f"variable {name!r} declares no terms")
    return LinguisticVariable(name=name, kind=kind, universe=(lo, hi), terms=tuple(terms))


def parse_model(source: str) -> EdmModel:
    """Parse a model from its text form or its JSON mirror."""
    if source.lstrip().startswith("{"):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", exc.lineno, exc.colno) from exc
        return model_from_dict(data)
    return _parse_model_text(source)


def model_to_json(model: EdmModel, indent: int = 2) -> str:
    return json.dumps(model_to_dict(model), indent=indent)


# --- referent parsing ----------------------------------------------------------

def _parse_referent_text(text: str) -> Referent:
    p = _Parser(text)
    p.expect("ident", "referent")
    name = p.ident()

    principles: tuple[str, ...] = ()
    variables: list[ReferentVariable] = []
    rules: list[FuzzyRule] = []
    priority: list[tuple[str, str]] = []
    bands: list[Band] = []
    checks: list[ReasoningCheck] = []
    rho = tau = None
    seen = set()
    while p.peek().kind != "eof":
        if not p.at_section():
            p.fail("expected a section header")
        section = p.ident()
        p.expect("op", ":")
        if section in seen:
            p.fail(f"duplicate section {section!r}")
        seen.add(section)
        if section == "principles":
            principles = p.principles_section()
        elif section == "variables":
            while p.peek().value in VARIABLE_KEYWORDS:
                kind = p.ident()
                var_name = p.ident()
                p.expect("op", ":")
                terms = [p.ident()]
                while p.accept("op", ","):
                    terms.append(p.ident())
                variables.append(ReferentVariable(var_name, kind, tuple(terms)))
            if not variables:
                p.fail("expected at least one variable")
        elif section == "priority":
            while p.peek().kind == "ident" and not p.at_section():
                chain = [p.ident()]
                while p.accept("op", ">"):
                    chain.append(p.ident())
                if len(chain) < 2:
                    p.fail("a priority chain needs at least two principles")
                priority.extend(zip(chain, chain[1:]))
        elif section == "rho":
            rho = p.number()
        elif section == "tau":
            tau = p.number()
        elif section == "bands":
            while p.peek().value in ("[", "("):
                bands.append(_band(p))
            if not bands:
                p.fail("expected at least one band")
        elif section == "rules":
            rules = p.rules_section()
        elif section == "checks":
            while p.peek().kind == "ident" and not p.at_section():
                checks.append(_check(p))
        else:
            p.fail(f"section {section!r} does not belong in a referent file")
    for required, value in (
        ("principles", principles),
        ("variables", variables),
        ("rho", rho),
        ("tau", tau),
        ("bands", bands),
        ("rules", rules),
    ):
        if value is None or (not isinstance(value, float) and not value):
            raise ParseError(f"referent file is missing the {required} section")
    return Referent.build(
        name=name,
        principles=principles,
        variables=variables,
        expected_rules=rules,
        priority=priority,
        rho=rho,
        tau=tau,
        bands=bands,
        checks=checks,
    )


def _band(p: _Parser) -> Band:
    opener = p.advance()
    lo_closed = opener.value == "["
    lo = p.number()
    p.expect("op", ",")
    hi = p.number()
    closer = p.advance()
    if closer.value not in ("]", ")"):
        p.fail("expected ] or ) to close the band interval", closer)
    hi_closed = closer.value == "]"
    p.expect("op", "->")
    if p.accept("op", "{"):
        actions = [p.ident()]
        while p.accept("op", ","):
            actions.append(p.ident())
        p.expect("op", "}")
    else:
        actions = [p.ident()]
    return Band(lo=lo, hi=hi, lo_closed=lo_closed, hi_closed=hi_closed, actions=tuple(actions))


def _check(p: _Parser) -> ReasoningCheck:
    name = p.ident()
    p.expect("op", ":")
    premises = []
    while True:
        atom = p.atom()
        p.expect("op", "=")
        premises.append((atom, p.number()))
        if not p.accept("op", "&"):
            break
    p.expect("op", "->")
    conclusion = p.atom()
    cmp_tok = p.advance()
    if cmp_tok.value not in (">", ">=", "<", "<="):
        p.fail("expected a comparator (>, >=, <, <=)", cmp_tok)
    threshold = p.number()
    return ReasoningCheck(
        name=name,
        premises=tuple(premises),
        conclusion=conclusion,
        comparator=cmp_tok.value,
        threshold=threshold,
    )


def referent_to_dict(referent: Referent) -> dict:
    return {
        "name": referent.name,
        "principles": list(referent.principles),
        "variables": [
            {"name": v.name, "kind": v.kind, "terms": list(v.terms)}
            for v in referent.variables
        ],
        "priority": sorted([a, b] for a, b in referent.priority),
        "rho": referent.rho,
        "tau": referent.tau,
        "bands": [
            {
                "lo": b.lo,
                "hi": b.hi,
                "lo_closed": b.lo_closed,
                "hi_closed": b.hi_closed,
                "actions": list(b.actions),
            }
            for b in referent.bands
        ],
        "rules": [
            {
                "name": r.name,
                "kind": r.kind,
                "antecedent": [[[a.variable, a.term] for a in conj] for conj in r.antecedent],
                "consequents": [[a.variable, a.term] for a in r.consequents],
                "cf": r.cf,
                "principles": list(r.principles),
            }
            for r in referent.expected_rules
        ],
        "checks": [
            {
                "name": c.name,
                "premises": [[[a.variable, a.term], degree] for a, degree in c.premises],
                "conclusion": [c.conclusion.variable, c.conclusion.term],
                "comparator": c.comparator,
                "threshold": c.threshold,
            }
            for c in referent.checks
        ],
    }


def referent_from_dict(data: Mapping) -> Referent:
    try:
        return Referent.build(
            name=str(data["name"]),
            principles=tuple(str(p) for p in data["principles"]),
            variables=tuple(
                ReferentVariable(
                    str(v["name"]), str(v["kind"]), tuple(str(t) for t in v["terms"])
                )
                for v in data["variables"]
            ),
            expected_rules=tuple(
                FuzzyRule(
                    name=str(r["name"]),
                    kind=str(r["kind"]),
                    antecedent=tuple(
                        tuple(Atom(str(a[0]), str(a[1])) for a in conj)
                        for conj in r["antecedent"]
                    ),
                    consequents=tuple(Atom(str(a[0]), str(a[1])) for a in r["consequents"]),
                    cf=float(r["cf"]),
                    principles=tuple(str(p) for p in r["principles"]),
                )
                for r in data["rules"]
            ),
            priority=tuple((str(a), str(b)) for a, b in data.get("priority", [])),
            rho=float(data["rho"]),
            tau=float(data["tau"]),
            bands=tuple(
                Band(
                    lo=float(b["lo"]),
                    hi=float(b["hi"]),
                    lo_closed=bool(b["lo_closed"]),
                    hi_closed=bool(b["hi_closed"]),
                    actions=tuple(str(a) for a in b["actions"]),
                )
                for b in data["bands"]
            ),
            checks=tuple(
                ReasoningCheck(
                    name=str(c["name"]),
                    premises=tuple(
                        (Atom(str(a[0]), str(a[1])), float(degree))
                        for a, degree in c["premises"]
                    ),
                    conclusion=Atom(str(c["conclusion"][0]), str(c["conclusion"][1])),
                    comparator=str(c["comparator"]),
                    threshold=float(c["threshold"]),
                )
                for c in data.get("checks", [])
            ),
        )
    except KeyError as exc:
        raise ParseError(f"referent encoding is missing key {exc}") from exc


def parse_referent(source: str) -> Referent:
    """Parse a referent from its text form or its JSON mirror."""
    if source.lstrip().startswith("{"):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", exc.lineno, exc.colno) from exc
        return referent_from_dict(data)
    return _parse_referent_text(source)


def referent_to_json(referent: Referent, indent: int = 2) -> str:
    return json.dumps(referent_to_dict(referent), indent=indent)


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def render_referent(referent: Referent) -> str:
    """Canonical text form; the priority section lists the closed pair set."""
    lines = [f"referent {referent.name}", ""]
    lines.append("principles:")
    for p in referent.principles:
        lines.append(f"  {p}")
    lines.append("")
    lines.append("variables:")
    for v in referent.variables:
        lines.append(f"  {v.kind} {v.name}: " + ", ".join(v.terms))
    lines.append("")
    if referent.priority:
        lines.append("priority:")
        for a, b in sorted(referent.priority):
            lines.append(f"  {a} > {b}")
        lines.append("")
    lines.append(f"rho: {_fmt(referent.rho)}")
    lines.append(f"tau: {_fmt(referent.tau)}")
    lines.append("")
    lines.append("bands:")
    for b in referent.bands:
        lo_b = "[" if b.lo_closed else "("
        hi_b = "]" if b.hi_closed else ")"
        acts = b.actions[0] if len(b.actions) == 1 else "{" + ", ".join(b.actions) + "}"
        lines.append(f"  {lo_b}{_fmt(b.lo)}, {_fmt(b.hi)}{hi_b} -> {acts}")
    lines.append("")
    lines.append("rules:")
    for r in referent.expected_rules:
        lines.append(f"  {render_rule(r)}")
    if referent.checks:
        lines.append("")
        lines.append("checks:")
        for c in referent.checks:
            prem = " & ".join(f"{a}={_fmt(d)}" for a, d in c.premises)
            lines.append(
                f"  {c.name}: {prem} -> {c.conclusion} {c.comparator} {_fmt(c.threshold)}"
            )
    lines.append("")
    return "\n".join(lines)


# --- scenario files -----------------------------------------------------------

def parse_scenarios(text: str) -> list[dict[str, float]]:
    """Newline-delimited records of variable=value pairs.

    Pairs within a record are separated by whitespace or commas; blank lines
    and comment lines are skipped. Errors carry the 1-based line number.
    """
    records = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        record: dict[str, float] = {}
        for part in re.split(r"[,\s]+", line):
            if not part:
                continue
            if "=" not in part:
                raise ParseError(f"expected variable=value, got {part!r}", lineno)
            key, _, value = part.partition("=")
            if not key:
                raise ParseError(f"missing variable name in {part!r}", lineno)
            if key in record:
                raise ParseError(f"duplicate variable {key!r} in record", lineno)
            try:
                record[key] = float(value)
            except ValueError:
                raise ParseError(f"bad numeric value {value!r} for {key!r}", lineno) from None
        records.append(record)
    return records
