"""Core model types: variables, trapezoidal terms, rules, and normalization.

A decision model bundles linguistic variables (inputs, one internal risk
variable, one action variable), a principle universe, and a rule base split
into risk rules (FERR) and decision rules (FERD). Rule antecedents are kept
in disjunctive normal form: a tuple of disjuncts, each disjunct a tuple of
atoms that are conjoined. Arbitrary boolean nesting is rejected upstream at
parse time, so code here never sees anything but DNF.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .errors import ModelError, OutOfUniverseError

INPUT = "input"
INTERNAL = "internal"
OUTPUT = "output"
VARIABLE_KINDS = (INPUT, INTERNAL, OUTPUT)

FERR = "FERR"  # risk rules: conclude the internal variable
FERD = "FERD"  # decision rules: conclude the action variable
RULE_KINDS = (FERR, FERD)


@dataclass(frozen=True)
class TrapezoidMF:
    """Trapezoidal membership function with breakpoints a <= b <= c <= d.

    Degenerate edges (a == b or c == d) give vertical flanks; the plateau
    [b, c] always has membership 1.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a <= self.b <= self.c <= self.d):
            raise ModelError(
                f"trapezoid breakpoints must satisfy a <= b <= c <= d, got "
                f"({self.a}, {self.b}, {self.c}, {self.d})"
            )

    def __call__(self, x: float) -> float:
        if x < self.a or x > self.d:
            return 0.0
        if self.b <= x <= self.c:
            return 1.0
        if x < self.b:
            # a < b is guaranteed here: x >= a and x < b
            return (x - self.a) / (self.b - self.a)
        return (self.d - x) / (self.d - self.c)

    def sample(self, xs):
        """Vectorized evaluation over a numpy array; matches __call__ pointwise."""
        import numpy as np

        mu = np.zeros(len(xs), dtype=float)
        mu[(xs >= self.b) & (xs <= self.c)] = 1.0
        if self.b > self.a:
            rise = (xs > self.a) & (xs < self.b)
            mu[rise] = (xs[rise] - self.a) / (self.b - self.a)
        if self.d > self.c:
            fall = (xs > self.c) & (xs < self.d)
            mu[fall] = (self.d - xs[fall]) / (self.d - self.c)
        return mu

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class Atom:
    """A variable/term pair, e.g. Severity(high)."""

    variable: str
    term: str

    def __str__(self) -> str:
        return f"{self.variable}({self.term})"


@dataclass(frozen=True)
class LinguisticVariable:
    name: str
    kind: str
    universe: tuple[float, float]
    terms: tuple[tuple[str, TrapezoidMF], ...]

    def __post_init__(self):
        if self.kind not in VARIABLE_KINDS:
            raise ModelError(f"unknown variable kind {self.kind!r} for {self.name!r}")
        lo, hi = self.universe
        if not lo < hi:
            raise ModelError(f"variable {self.name!r}: universe [{lo}, {hi}] is empty")
        if not self.terms:
            raise ModelError(f"variable {self.name!r} declares no terms")
        seen = set()
        for term, mf in self.terms:
            if term in seen:
                raise ModelError(f"variable {self.name!r}: duplicate term {term!r}")
            seen.add(term)
            if mf.a < lo or mf.d > hi:
                raise ModelError(
                    f"variable {self.name!r}: term {term!r} support [{mf.a}, {mf.d}] "
                    f"exceeds universe [{lo}, {hi}]"
                )
        self._check_coverage()

    def _check_coverage(self):
        # Memberships are piecewise linear with breakpoints drawn from the
        # trapezoid parameters, so any gap in coverage either contains one of
        # those breakpoints or the midpoint between two adjacent ones.
        lo, hi = self.universe
        points = {lo, hi}
        for _, mf in self.terms:
            points.update(p for p in mf.as_tuple() if lo <= p <= hi)
        ordered = sorted(points)
        probes = list(ordered)
        probes.extend((x + y) / 2.0 for x, y in zip(ordered, ordered[1:]))
        for x in probes:
            if all(mf(x) == 0.0 for _, mf in self.terms):
                raise ModelError(
                    f"variable {self.name!r}: no term covers x={x} "
                    f"(every point of the universe needs nonzero membership somewhere)"
                )

    @property
    def term_names(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.terms)

    def mf(self, term: str) -> TrapezoidMF:
        for t, m in self.terms:
            if t == term:
                return m
        raise ModelError(f"variable {self.name!r} has no term {term!r}")

    def fuzzify(self, x: float) -> dict[str, float]:
        """Membership of x in every term. Raises if x is outside the universe."""
        lo, hi = self.universe
        if not (lo <= x <= hi):
            raise OutOfUniverseError(self.name, x, lo, hi)
        return {t: m(x) for t, m in self.terms}


@dataclass(frozen=True)
class FuzzyRule:
    """One rule: DNF antecedent, consequent atoms, certainty factor, principle tags.

    ``antecedent`` is a tuple of disjuncts; each disjunct is a tuple of atoms
    understood conjunctively. ``principles`` keeps declaration order; treat it
    as a set for comparisons.
    """

    name: str
    kind: str
    antecedent: tuple[tuple[Atom, ...], ...]
    consequents: tuple[Atom, ...]
    cf: float
    principles: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ModelError(f"rule {self.name!r}: unknown kind {self.kind!r}")
        if not self.antecedent or any(not conj for conj in self.antecedent):
            raise ModelError(f"rule {self.name!r}: empty antecedent")
        if not self.consequents:
            raise ModelError(f"rule {self.name!r}: no consequent")
        if not 0.0 <= self.cf <= 1.0:
            raise ModelError(f"rule {self.name!r}: cf {self.cf} outside [0, 1]")
        if not self.principles:
            raise ModelError(f"rule {self.name!r}: empty principle set")
        if len(set(self.principles)) != len(self.principles):
            raise ModelError(f"rule {self.name!r}: duplicate principle tag")
        for conj in self.antecedent:
            vars_in_conj = [a.variable for a in conj]
            if len(set(vars_in_conj)) != len(vars_in_conj):
                raise ModelError(
                    f"rule {self.name!r}: a conjunct references the same variable twice"
                )

    @property
    def principle_set(self) -> frozenset[str]:
        return frozenset(self.principles)

    def with_cf(self, cf: float) -> "FuzzyRule":
        return replace(self, cf=cf)


@dataclass(frozen=True)
class NormalizedRule:
    """Single-conjunct, single-consequent rule produced by normalization."""

    name: str
    parent: str
    kind: str
    conjunct: tuple[Atom, ...]
    consequent: Atom
    cf: float
    principles: tuple[str, ...]

    @property
    def principle_set(self) -> frozenset[str]:
        return frozenset(self.principles)

    def __str__(self) -> str:
        ante = " & ".join(str(a) for a in self.conjunct)
        return f"{ante} -> {self.consequent}"


@dataclass(frozen=True)
class EdmModel:
    """An executable ethical decision model.

    Use :meth:`build` rather than the bare constructor: it checks every
    well-formedness rule (atom resolution, rule kinds against variable kinds,
    exactly one internal and one output variable, tag validity) and derives
    nothing lazily, so a constructed model is always safe to run.
    """

    name: str
    variables: tuple[LinguisticVariable, ...]
    rules: tuple[FuzzyRule, ...]
    principles: tuple[str, ...]

    @classmethod
    def build(
        cls,
        name: str,
        variables: Iterable[LinguisticVariable],
        rules: Iterable[FuzzyRule],
        principles: Iterable[str],
    ) -> "EdmModel":
        variables = tuple(variables)
        rules = tuple(rules)
        principles = tuple(principles)

        if not name:
            raise ModelError("model needs a name")
        if len(set(principles)) != len(principles):
            raise ModelError("duplicate principle in the principle universe")
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ModelError("duplicate variable name")

        by_name = {v.name: v for v in variables}
        inputs = [v for v in variables if v.kind == INPUT]
        internals = [v for v in variables if v.kind == INTERNAL]
        outputs = [v for v in variables if v.kind == OUTPUT]
        if not inputs:
            raise ModelError("model needs at least one input variable")
        if len(internals) != 1:
            raise ModelError("model needs exactly one internal (risk) variable")
        if len(outputs) != 1:
            raise ModelError("model needs exactly one output (action) variable")

        principle_set = set(principles)
        rule_names = set()
        saw_ferr = saw_ferd = False
        for rule in rules:
            if rule.name in rule_names:
                raise ModelError(f"duplicate rule name {rule.name!r}")
            rule_names.add(rule.name)
            for p in rule.principles:
                if p not in principle_set:
                    raise ModelError(f"rule {rule.name!r}: unknown principle {p!r}")
            for conj in rule.antecedent:
                for atom in conj:
                    var = by_name.get(atom.variable)
                    if var is None:
                        raise ModelError(f"rule {rule.name!r}: unknown variable {atom.variable!r}")
                    if atom.term not in var.term_names:
                        raise ModelError(f"rule {rule.name!r}: unknown term {atom}")
                    if var.kind == OUTPUT:
                        raise ModelError(
                            f"rule {rule.name!r}: antecedent may not reference the "
                            f"output variable {var.name!r}"
                        )
            wanted = INTERNAL if rule.kind == FERR else OUTPUT
            for atom in rule.consequents:
                var = by_name.get(atom.variable)
                if var is None:
                    raise ModelError(f"rule {rule.name!r}: unknown variable {atom.variable!r}")
                if atom.term not in var.term_names:
                    raise ModelError(f"rule {rule.name!r}: unknown term {atom}")
                if var.kind != wanted:
                    raise ModelError(
                        f"rule {rule.name!r}: {rule.kind} consequents must reference "
                        f"{wanted} variables, got {atom}"
                    )
            saw_ferr = saw_ferr or rule.kind == FERR
            saw_ferd = saw_ferd or rule.kind == FERD
        if not saw_ferr:
            raise ModelError("model needs at least one risk (FERR) rule")
        if not saw_ferd:
            raise ModelError("model needs at least one decision (FERD) rule")

        return cls(name=name, variables=variables, rules=rules, principles=principles)

    def variable(self, name: str) -> LinguisticVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise ModelError(f"model has no variable {name!r}")

    @property
    def input_variables(self) -> tuple[LinguisticVariable, ...]:
        return tuple(v for v in self.variables if v.kind == INPUT)

    @property
    def internal_variable(self) -> LinguisticVariable:
        return next(v for v in self.variables if v.kind == INTERNAL)

    @property
    def output_variable(self) -> LinguisticVariable:
        return next(v for v in self.variables if v.kind == OUTPUT)

    @property
    def ferr_rules(self) -> tuple[FuzzyRule, ...]:
        return tuple(r for r in self.rules if r.kind == FERR)

    @property
    def ferd_rules(self) -> tuple[FuzzyRule, ...]:
        return tuple(r for r in self.rules if r.kind == FERD)

    @property
    def traceability(self) -> dict[str, frozenset[str]]:
        """Rule name to principle tags. Derived, never stored separately."""
        return {r.name: r.principle_set for r in self.rules}

    def rule(self, name: str) -> FuzzyRule:
        for r in self.rules:
            if r.name == name:
                return r
        raise ModelError(f"model has no rule {name!r}")

    def replace_rule(self, name: str, new_rule: FuzzyRule) -> "EdmModel":
        """Rebuild the model with one rule swapped out (used by repair search)."""
        self.rule(name)  # existence check
        rules = tuple(new_rule if r.name == name else r for r in self.rules)
        return EdmModel.build(self.name, self.variables, rules, self.principles)


def normalize_rules(model: EdmModel) -> tuple[NormalizedRule, ...]:
    """Expand every rule into conjunctive single-consequent form.

    Each disjunct is paired with each consequent atom (cartesian product),
    preserving rule declaration order, then disjunct order, then consequent
    order. Children are named ``<parent>#<k>`` with k starting at 1. The
    certainty factor and principle tags are inherited unchanged, so firing
    semantics are preserved: max over children equals the parent's DNF value.
    """
    out = []
    for rule in model.rules:
        k = 0
        for disjunct in rule.antecedent:
            for consequent in rule.consequents:
                k += 1
                out.append(
                    NormalizedRule(
                        name=f"{rule.name}#{k}",
                        parent=rule.name,
                        kind=rule.kind,
                        conjunct=disjunct,
                        consequent=consequent,
                        cf=rule.cf,
                        principles=rule.principles,
                    )
                )
    return tuple(out)


def normalized_model(model: EdmModel) -> EdmModel:
    """The same model with its rule base replaced by the normalized rules.

    Inference over the result is equivalent to inference over the original;
    the equivalence is pinned by tests rather than assumed.
    """
    rules = tuple(
        FuzzyRule(
            name=n.name,
            kind=n.kind,
            antecedent=(n.conjunct,),
            consequents=(n.consequent,),
            cf=n.cf,
            principles=n.principles,
        )
        for n in normalize_rules(model)
    )
    return EdmModel.build(model.name, model.variables, rules, model.principles)


# --- JSON mirror -----------------------------------------------------------

def _atom_to_list(atom: Atom) -> list[str]:
    return [atom.variable, atom.term]


def _atom_from_list(pair) -> Atom:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ModelError(f"bad atom encoding {pair!r}, expected [variable, term]")
    return Atom(str(pair[0]), str(pair[1]))


def model_to_dict(model: EdmModel) -> dict:
    """Lossless JSON-ready encoding of a model."""
    return {
        "name": model.name,
        "principles": list(model.principles),
        "variables": [
            {
                "name": v.name,
                "kind": v.kind,
                "universe": list(v.universe),
                "terms": [{"name": t, "mf": list(m.as_tuple())} for t, m in v.terms],
            }
            for v in model.variables
        ],
        "rules": [
            {
                "name": r.name,
                "kind": r.kind,
                "antecedent": [[_atom_to_list(a) for a in conj] for conj in r.antecedent],
                "consequents": [_atom_to_list(a) for a in r.consequents],
                "cf": r.cf,
                "principles": list(r.principles),
            }
            for r in model.rules
        ],
        "traceability": {r.name: sorted(r.principle_set) for r in model.rules},
    }


def model_from_dict(data: Mapping) -> EdmModel:
    try:
        variables = tuple(
            LinguisticVariable(
                name=str(v["name"]),
                kind=str(v["kind"]),
                universe=(float(v["universe"][0]), float(v["universe"][1])),
                terms=tuple(
                    (str(t["name"]), TrapezoidMF(*(float(x) for x in t["mf"])))
                    for t in v["terms"]
                ),
            )
            for v in data["variables"]
        )
        rules = tuple(
            FuzzyRule(
                name=str(r["name"]),
                kind=str(r["kind"]),
                antecedent=tuple(
                    tuple(_atom_from_list(a) for a in conj) for conj in r["antecedent"]
                ),
                consequents=tuple(_atom_from_list(a) for a in r["consequents"]),
                cf=float(r["cf"]),
                principles=tuple(str(p) for p in r["principles"]),
            )
            for r in data["rules"]
        )
        model = EdmModel.build(
            name=str(data["name"]),
            variables=variables,
            rules=rules,
            principles=tuple(str(p) for p in data["principles"]),
        )
    except KeyError as exc:
        raise ModelError(f"model encoding is missing key {exc}") from exc
    trace = data.get("traceability")
    if trace is not None:
        derived = {k: sorted(v) for k, v in model.traceability.items()}
        given = {str(k): sorted(str(p) for p in v) for k, v in trace.items()}
        if given != derived:
            raise ModelError("traceability map disagrees with the rules' principle tags")
    return model


# --- canonical text rendering ----------------------------------------------

def _fmt(x: float) -> str:
    # shortest repr that round-trips; integers lose the trailing .0
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def render_antecedent(antecedent: tuple[tuple[Atom, ...], ...]) -> str:
    parts = []
    for conj in antecedent:
        inner = " & ".join(str(a) for a in conj)
        parts.append(f"({inner})" if len(antecedent) > 1 or len(conj) > 1 else inner)
    return " | ".join(parts)


def render_rule(rule: FuzzyRule) -> str:
    cons = " & ".join(str(a) for a in rule.consequents)
    tags = ", ".join(rule.principles)
    return (
        f"{rule.kind} {rule.name}: {render_antecedent(rule.antecedent)} "
        f"=> {cons} cf={_fmt(rule.cf)} principles=[{tags}]"
    )


def render_model(model: EdmModel) -> str:
    """Canonical text form. Parsing the result yields an equal model."""
    lines = [f"model {model.name}", ""]
    lines.append("principles:")
    for p in model.principles:
        lines.append(f"  {p}")
    lines.append("")
    lines.append("variables:")
    for v in model.variables:
        lo, hi = v.universe
        lines.append(f"  {v.kind} {v.name} [{_fmt(lo)}, {_fmt(hi)}]:")
        for t, m in v.terms:
            a, b, c, d = m.as_tuple()
            lines.append(f"    {t} = ({_fmt(a)}, {_fmt(b)}, {_fmt(c)}, {_fmt(d)})")
    lines.append("")
    lines.append("rules:")
    for r in model.rules:
        lines.append(f"  {render_rule(r)}")
    lines.append("")
    return "\n".join(lines)
