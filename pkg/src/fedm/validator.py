"""Pluralistic validation against stakeholder referents.

A referent packages what one stakeholder group expects of a model: the rules
they would write, a priority order over principles, action bands over
normalized risk, thresholds, and hand-written reasoning checks. Validation
has three layers:

- static: diff the model's variables and normalized rules against each
  referent's expectations;
- semantic: score the model's action distribution and principle profile on a
  concrete scenario (S_A and S_P, gated by the referent's tolerance);
- dynamic: propagate certainty-weighted truth degrees through the net and
  test each referent's reasoning checks, with a single-rule repair search for
  the ones that fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .errors import FedmError, ModelError, UndefinedSimilarityError
from .etm import build_trace
from .fpn import FuzzyPetriNet, build_fpn
from .inference import InferenceResult, infer
from .model import (
    FERD,
    FERR,
    INPUT,
    INTERNAL,
    OUTPUT,
    Atom,
    EdmModel,
    FuzzyRule,
    normalize_rules,
)

DEFAULT_EPSILON = 0.02

COMPARATORS = {
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
}


@dataclass(frozen=True)
class ReferentVariable:
    """A variable as a referent sees it: name, kind, and term names only."""

    name: str
    kind: str
    terms: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in (INPUT, INTERNAL, OUTPUT):
            raise ModelError(f"referent variable {self.name!r}: unknown kind {self.kind!r}")
        if not self.terms:
            raise ModelError(f"referent variable {self.name!r} declares no terms")
        if len(set(self.terms)) != len(self.terms):
            raise ModelError(f"referent variable {self.name!r}: duplicate term")


@dataclass(frozen=True)
class Band:
    """One action band: a sub-interval of normalized risk and the actions
    the referent accepts there."""

    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool
    actions: tuple[str, ...]

    def contains(self, r: float) -> bool:
        above = r > self.lo or (self.lo_closed and r == self.lo)
        below = r < self.hi or (self.hi_closed and r == self.hi)
        return above and below

    def __str__(self) -> str:
        lo_b = "[" if self.lo_closed else "("
        hi_b = "]" if self.hi_closed else ")"
        acts = ", ".join(self.actions)
        acts = acts if len(self.actions) == 1 else "{" + acts + "}"
        return f"{lo_b}{self.lo}, {self.hi}{hi_b} -> {acts}"


@dataclass(frozen=True)
class ReasoningCheck:
    """An expected derivation: premises with truth degrees, a conclusion atom,
    and a threshold its propagated degree must clear."""

    name: str
    premises: tuple[tuple[Atom, float], ...]
    conclusion: Atom
    comparator: str
    threshold: float

    def __post_init__(self):
        if self.comparator not in COMPARATORS:
            raise ModelError(f"check {self.name!r}: unknown comparator {self.comparator!r}")
        if not self.premises:
            raise ModelError(f"check {self.name!r}: no premises")
        for atom, alpha in self.premises:
            if not 0.0 <= alpha <= 1.0:
                raise ModelError(f"check {self.name!r}: premise degree {alpha} outside [0, 1]")
        if not 0.0 <= self.threshold <= 1.0:
            raise ModelError(f"check {self.name!r}: threshold {self.threshold} outside [0, 1]")


def _close_priority(pairs: Iterable[tuple[str, str]], principles: Sequence[str]):
    """Transitive closure of the priority relation; rejects cycles."""
    known = set(principles)
    closed = set()
    for a, b in pairs:
        if a not in known or b not in known:
            missing = a if a not in known else b
            raise ModelError(f"priority references unknown principle {missing!r}")
        closed.add((a, b))
    changed = True
    while changed:
        changed = False
        for a, b in list(closed):
            for c, d in list(closed):
                if b == c and (a, d) not in closed:
                    closed.add((a, d))
                    changed = True
    for a, b in closed:
        if a == b or (b, a) in closed:
            raise ModelError(f"priority order is cyclic around {a!r}")
    return frozenset(closed)


@dataclass(frozen=True)
class Referent:
    """One stakeholder referent. Build with :meth:`build`, which validates and
    transitively closes the priority order."""

    name: str
    principles: tuple[str, ...]
    variables: tuple[ReferentVariable, ...]
    expected_rules: tuple[FuzzyRule, ...]
    priority: frozenset[tuple[str, str]]
    rho: float
    tau: float
    bands: tuple[Band, ...]
    checks: tuple[ReasoningCheck, ...]

    @classmethod
    def build(
        cls,
        name: str,
        principles: Iterable[str],
        variables: Iterable[ReferentVariable],
        expected_rules: Iterable[FuzzyRule],
        priority: Iterable[tuple[str, str]],
        rho: float,
        tau: float,
        bands: Iterable[Band],
        checks: Iterable[ReasoningCheck] = (),
    ) -> "Referent":
        principles = tuple(principles)
        variables = tuple(variables)
        expected_rules = tuple(expected_rules)
        bands = tuple(bands)
        checks = tuple(checks)

        if not name:
            raise ModelError("referent needs a name")
        if len(set(principles)) != len(principles):
            raise ModelError(f"referent {name!r}: duplicate principle")
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ModelError(f"referent {name!r}: duplicate variable name")
        by_name = {v.name: v for v in variables}
        outputs = [v for v in variables if v.kind == OUTPUT]
        if len(outputs) != 1:
            raise ModelError(f"referent {name!r}: needs exactly one output variable")
        internals = [v for v in variables if v.kind == INTERNAL]
        if len(internals) != 1:
            raise ModelError(f"referent {name!r}: needs exactly one internal variable")

        if not 0.0 <= rho <= 1.0:
            raise ModelError(f"referent {name!r}: rho {rho} outside [0, 1]")
        if not 0.0 <= tau <= 1.0:
            raise ModelError(f"referent {name!r}: tau {tau} outside [0, 1]")

        principle_set = set(principles)
        rule_names = set()
        for rule in expected_rules:
            if rule.name in rule_names:
                raise ModelError(f"referent {name!r}: duplicate rule name {rule.name!r}")
            rule_names.add(rule.name)
            for p in rule.principles:
                if p not in principle_set:
                    raise ModelError(f"referent {name!r}: rule {rule.name!r} tags unknown principle {p!r}")
            wanted = INTERNAL if rule.kind == FERR else OUTPUT
            for atom in rule.consequents:
                var = by_name.get(atom.variable)
                if var is None or atom.term not in var.terms:
                    raise ModelError(f"referent {name!r}: rule {rule.name!r} uses unknown atom {atom}")
                if var.kind != wanted:
                    raise ModelError(
                        f"referent {name!r}: rule {rule.name!r} concludes {atom}, "
                        f"but {rule.kind} rules must conclude {wanted} variables"
                    )
            for conj in rule.antecedent:
                for atom in conj:
                    var = by_name.get(atom.variable)
                    if var is None or atom.term not in var.terms:
                        raise ModelError(f"referent {name!r}: rule {rule.name!r} uses unknown atom {atom}")
                    if var.kind == OUTPUT:
                        raise ModelError(
                            f"referent {name!r}: rule {rule.name!r} antecedent references "
                            f"the output variable"
                        )

        action_terms = set(outputs[0].terms)
        _check_band_cover(name, bands, action_terms)

        check_names = set()
        for check in checks:
            if check.name in check_names:
                raise ModelError(f"referent {name!r}: duplicate check name {check.name!r}")
            check_names.add(check.name)
            for atom, _ in check.premises + ((check.conclusion, 0.0),):
                var = by_name.get(atom.variable)
                if var is None or atom.term not in var.terms:
                    raise ModelError(f"referent {name!r}: check {check.name!r} uses unknown atom {atom}")

        closed = _close_priority(priority, principles)
        return cls(
            name=name,
            principles=principles,
            variables=variables,
            expected_rules=expected_rules,
            priority=closed,
            rho=rho,
            tau=tau,
            bands=bands,
            checks=checks,
        )

    @property
    def output_variable(self) -> ReferentVariable:
        return next(v for v in self.variables if v.kind == OUTPUT)

    def expected_actions(self, normalized_risk: float) -> frozenset[str]:
        """The action set Θ assigns to a normalized risk value."""
        if not 0.0 <= normalized_risk <= 1.0:
            raise ModelError(f"normalized risk {normalized_risk} outside [0, 1]")
        for band in self.bands:
            if band.contains(normalized_risk):
                return frozenset(band.actions)
        raise ModelError(f"referent {self.name!r}: no band contains {normalized_risk}")


def _check_band_cover(name: str, bands: Sequence[Band], action_terms: set):
    if not bands:
        raise ModelError(f"referent {name!r}: no action bands")
    for band in bands:
        if band.lo > band.hi or (band.lo == band.hi and not (band.lo_closed and band.hi_closed)):
            raise ModelError(f"referent {name!r}: empty band {band}")
        if not band.actions:
            raise ModelError(f"referent {name!r}: band {band} maps to no action")
        for a in band.actions:
            if a not in action_terms:
                raise ModelError(f"referent {name!r}: band action {a!r} is not an output term")
    ordered = sorted(bands, key=lambda b: (b.lo, not b.lo_closed))
    first, last = ordered[0], ordered[-1]
    if first.lo != 0.0 or not first.lo_closed:
        raise ModelError(f"referent {name!r}: bands do not cover 0.0")
    if last.hi != 1.0 or not last.hi_closed:
        raise ModelError(f"referent {name!r}: bands do not cover 1.0")
    for prev, nxt in zip(ordered, ordered[1:]):
        if prev.hi != nxt.lo or prev.hi_closed == nxt.lo_closed:
            raise ModelError(
                f"referent {name!r}: bands {prev} and {nxt} leave a gap or overlap"
            )


# --- semantic layer ----------------------------------------------------------

def action_similarity(system: Mapping[str, float], expected: Mapping[str, float]) -> float:
    """Weighted overlap of two action distributions, normalized and clamped to [0, 1].

    Raises when both distributions are all zero: similarity of nothing to
    nothing is undefined, not 1.
    """
    actions = set(system) | set(expected)
    max_s = max((system.get(a, 0.0) for a in actions), default=0.0)
    max_e = max((expected.get(a, 0.0) for a in actions), default=0.0)
    denom = max(max_s, max_e)
    if denom <= 0.0:
        raise UndefinedSimilarityError("both action distributions are all-zero")
    total = sum(system.get(a, 0.0) * expected.get(a, 0.0) for a in actions)
    return min(1.0, total / denom)


def principle_order_consistency(
    scores: Mapping[str, float],
    priority: Iterable[tuple[str, str]],
    epsilon: float = DEFAULT_EPSILON,
) -> float:
    """Fraction of priority pairs the score vector satisfies.

    A pair (higher, lower) is satisfied when score(higher) >= score(lower) - epsilon.
    """
    pairs = list(priority)
    if not pairs:
        raise ModelError("principle order is empty; the consistency metric is undefined")
    sat = 0
    for hi, lo in pairs:
        if hi not in scores or lo not in scores:
            missing = hi if hi not in scores else lo
            raise ModelError(f"priority references principle {missing!r} with no score")
        if scores[hi] >= scores[lo] - epsilon:
            sat += 1
    return sat / len(pairs)


@dataclass(frozen=True)
class ReferentEvaluation:
    """Semantic scores for one referent on one scenario."""

    referent: str
    s_action: float
    s_principle: Optional[float]
    tau: float
    expected_actions: frozenset[str]
    recommended_action: str
    action_pass: bool
    principle_pass: bool
    principle_skipped: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "referent": self.referent,
            "s_action": self.s_action,
            "s_principle": self.s_principle,
            "tau": self.tau,
            "expected_actions": sorted(self.expected_actions),
            "recommended_action": self.recommended_action,
            "action_pass": self.action_pass,
            "principle_pass": self.principle_pass,
            "principle_skipped": self.principle_skipped,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ScenarioEvaluation:
    """Semantic validity of one scenario across every referent."""

    values: dict
    crisp_risk: float
    recommended_action: str
    rows: tuple[ReferentEvaluation, ...]
    valid: bool

    def to_dict(self) -> dict:
        return {
            "input": dict(self.values),
            "crisp_risk": self.crisp_risk,
            "recommended_action": self.recommended_action,
            "referents": [r.to_dict() for r in self.rows],
            "valid": self.valid,
        }


def evaluate_referent(
    model: EdmModel,
    result: InferenceResult,
    referent: Referent,
    epsilon: float = DEFAULT_EPSILON,
) -> ReferentEvaluation:
    """Score one referent against an inference result."""
    expected = referent.expected_actions(result.crisp_risk)
    mu_expected = {a: (1.0 if a in expected else 0.0) for a in model.output_variable.term_names}
    s_a = action_similarity(result.action_distribution, mu_expected)

    trace = build_trace(model, result)
    skipped = not referent.priority
    if skipped:
        s_p = None
        principle_pass = True  # vacuous: no order to violate
    else:
        s_p = principle_order_consistency(trace.contributions, referent.priority, epsilon)
        principle_pass = s_p >= 1.0 - referent.tau
    action_pass = s_a >= 1.0 - referent.tau
    return ReferentEvaluation(
        referent=referent.name,
        s_action=s_a,
        s_principle=s_p,
        tau=referent.tau,
        expected_actions=expected,
        recommended_action=result.recommended_action,
        action_pass=action_pass,
        principle_pass=principle_pass,
        principle_skipped=skipped,
        passed=action_pass and principle_pass,
    )


def semantic_validity(
    model: EdmModel,
    values: Mapping[str, float],
    referents: Sequence[Referent],
    epsilon: float = DEFAULT_EPSILON,
    resolution: int = 1001,
) -> ScenarioEvaluation:
    """Run the model on one scenario and score it against every referent.

    The scenario is semantically valid when at least one referent accepts it
    on both gates.
    """
    if not referents:
        raise ModelError("semantic validity needs at least one referent")
    result = infer(model, values, resolution=resolution)
    rows = tuple(evaluate_referent(model, result, ref, epsilon) for ref in referents)
    return ScenarioEvaluation(
        values=dict(values),
        crisp_risk=result.crisp_risk,
        recommended_action=result.recommended_action,
        rows=rows,
        valid=any(r.passed for r in rows),
    )


# --- static layer ------------------------------------------------------------

@dataclass(frozen=True)
class StaticFinding:
    """One expectation the model does not meet structurally."""

    referent: str
    kind: str  # "missing_variable" | "missing_rule"
    subject: str

    def __str__(self) -> str:
        what = "variable" if self.kind == "missing_variable" else "rule"
        return f"[{self.referent}] missing {what}: {self.subject}"

    def to_dict(self) -> dict:
        return {"referent": self.referent, "kind": self.kind, "subject": self.subject}


def static_validation(
    net: FuzzyPetriNet, referents: Sequence[Referent]
) -> tuple[StaticFinding, ...]:
    """Diff the net's variables and transitions against referent expectations.

    A referent rule counts as present when the model knows every variable it
    mentions and at least one of its normalized conjunct/consequent components
    has a transition with the same antecedent atom set and consequent atom.
    """
    model_vars = {p.label.variable for p in net.places}
    components = {
        (frozenset(t.input_atoms), t.output_atoms[0])
        for t in net.transitions
        if len(t.output_atoms) == 1
    }

    findings = []
    for ref in referents:
        for var in ref.variables:
            if var.name not in model_vars:
                findings.append(StaticFinding(ref.name, "missing_variable", var.name))
        for rule in ref.expected_rules:
            atoms = [a for conj in rule.antecedent for a in conj] + list(rule.consequents)
            unknown_var = any(a.variable not in model_vars for a in atoms)
            matched = False
            if not unknown_var:
                for conj in rule.antecedent:
                    for consequent in rule.consequents:
                        if (frozenset(conj), consequent) in components:
                            matched = True
            if unknown_var or not matched:
                findings.append(StaticFinding(ref.name, "missing_rule", rule.name))
    return tuple(findings)


# --- dynamic layer -----------------------------------------------------------

APPLY_CF_MODES = ("risk", "all", "none")


def propagate_uncertainty(
    net: FuzzyPetriNet,
    premises: Mapping[Atom, float],
    apply_cf: str = "risk",
) -> dict[Atom, float]:
    """Forward-propagate truth degrees through the net to a fixpoint.

    A transition is enabled once every input place carries a known degree;
    it contributes min(inputs) times its weight to each output place, and
    places written by several transitions keep the max. With the default
    ``apply_cf="risk"`` the certainty factor weighs risk-stage transitions
    only, which matches the hand arithmetic the referent checks were written
    against; "all" discounts every hop, "none" turns weighting off.
    """
    if apply_cf not in APPLY_CF_MODES:
        raise ModelError(f"apply_cf must be one of {APPLY_CF_MODES}, got {apply_cf!r}")
    places = {p.label for p in net.places}
    alpha: dict[Atom, float] = {}
    for atom, degree in premises.items():
        if atom not in places:
            raise ModelError(f"premise {atom} is not a place of the net")
        if not 0.0 <= degree <= 1.0:
            raise ModelError(f"premise degree {degree} for {atom} outside [0, 1]")
        alpha[atom] = max(alpha.get(atom, 0.0), float(degree))

    # Degrees only ever increase and every derivation follows a simple path,
    # so |places| rounds suffice; one extra confirms the fixpoint.
    for _ in range(len(net.places) + 1):
        changed = False
        for t in net.transitions:
            ins = [alpha.get(a) for a in t.input_atoms]
            if any(v is None for v in ins):
                continue
            strength = min(ins)
            if apply_cf == "all" or (apply_cf == "risk" and t.kind == FERR):
                strength *= t.beta
            for out in t.output_atoms:
                if strength > alpha.get(out, -1.0):
                    alpha[out] = strength
                    changed = True
        if not changed:
            break
    return alpha


@dataclass(frozen=True)
class RepairSuggestion:
    rule: str
    old_cf: float
    new_cf: float

    def __str__(self) -> str:
        return f"set cf of {self.rule} from {self.old_cf} to {self.new_cf}"

    def to_dict(self) -> dict:
        return {"rule": self.rule, "old_cf": self.old_cf, "new_cf": self.new_cf}


@dataclass(frozen=True)
class CheckResult:
    referent: str
    check: str
    derivable: bool
    degree: Optional[float]
    comparator: str
    threshold: float
    passed: bool
    suggestions: tuple[RepairSuggestion, ...] = ()

    def __str__(self) -> str:
        if not self.derivable:
            return (
                f"[{self.referent}] {self.check}: "
                "conclusion not derivable from premises, fail"
            )
        verdict = "pass" if self.passed else "fail"
        s = (
            f"[{self.referent}] {self.check}: degree {self.degree:.6f} "
            f"{self.comparator} {self.threshold} {verdict}"
        )
        if self.suggestions:
            s += "; repairs: " + "; ".join(str(r) for r in self.suggestions)
        return s

    def to_dict(self) -> dict:
        return {
            "referent": self.referent,
            "check": self.check,
            "derivable": self.derivable,
            "degree": self.degree,
            "comparator": self.comparator,
            "threshold": self.threshold,
            "passed": self.passed,
            "suggestions": [r.to_dict() for r in self.suggestions],
        }


def _run_check(model: EdmModel, check: ReasoningCheck, apply_cf: str):
    net = build_fpn(normalize_rules(model), model)
    places = {p.label for p in net.places}
    usable = {atom: a for atom, a in check.premises if atom in places}
    if check.conclusion not in places or len(usable) != len(check.premises):
        return None
    alpha = propagate_uncertainty(net, usable, apply_cf=apply_cf)
    return alpha.get(check.conclusion)


CF_GRID = tuple(round(0.05 * k, 2) for k in range(1, 21))


def _repair_search(
    model: EdmModel, check: ReasoningCheck, apply_cf: str
) -> tuple[RepairSuggestion, ...]:
    """Smallest single-rule cf change on the 0.05 grid that flips the check,
    reported per rule."""
    found = []
    for rule in model.rules:
        candidates = sorted(
            (c for c in CF_GRID if c != rule.cf),
            key=lambda c: (abs(c - rule.cf), -c),
        )
        for cand in candidates:
            mutated = model.replace_rule(rule.name, rule.with_cf(cand))
            degree = _run_check(mutated, check, apply_cf)
            if degree is None:
                continue
            if COMPARATORS[check.comparator](degree, check.threshold):
                found.append(RepairSuggestion(rule.name, rule.cf, cand))
                break
    return tuple(found)


def dynamic_validation(
    model: EdmModel,
    referents: Sequence[Referent],
    apply_cf: str = "risk",
    suggest: bool = True,
) -> tuple[CheckResult, ...]:
    """Run every referent's reasoning checks against the model's net."""
    results = []
    for ref in referents:
        for check in ref.checks:
            degree = _run_check(model, check, apply_cf)
            if degree is None:
                results.append(
                    CheckResult(
                        referent=ref.name,
                        check=check.name,
                        derivable=False,
                        degree=None,
                        comparator=check.comparator,
                        threshold=check.threshold,
                        passed=False,
                    )
                )
                continue
            passed = COMPARATORS[check.comparator](degree, check.threshold)
            suggestions = ()
            if not passed and suggest:
                suggestions = _repair_search(model, check, apply_cf)
            results.append(
                CheckResult(
                    referent=ref.name,
                    check=check.name,
                    derivable=True,
                    degree=degree,
                    comparator=check.comparator,
                    threshold=check.threshold,
                    passed=passed,
                    suggestions=suggestions,
                )
            )
    return tuple(results)


# --- assembled report --------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    static: tuple[StaticFinding, ...]
    dynamic: tuple[CheckResult, ...]
    scenarios: tuple[ScenarioEvaluation, ...]

    @property
    def semantically_valid(self) -> bool:
        return all(s.valid for s in self.scenarios)

    @property
    def checks_pass(self) -> bool:
        return all(c.passed for c in self.dynamic)

    @property
    def ok(self) -> bool:
        return self.semantically_valid and self.checks_pass

    def to_dict(self) -> dict:
        return {
            "static": [f.to_dict() for f in self.static],
            "dynamic": [c.to_dict() for c in self.dynamic],
            "scenarios": [s.to_dict() for s in self.scenarios],
            "semantically_valid": self.semantically_valid,
            "checks_pass": self.checks_pass,
            "ok": self.ok,
        }


def validate(
    model: EdmModel,
    referents: Sequence[Referent],
    scenarios: Sequence[Mapping[str, float]] = (),
    epsilon: float = DEFAULT_EPSILON,
    apply_cf: str = "risk",
    suggest: bool = True,
    resolution: int = 1001,
) -> ValidationReport:
    """Static diff, dynamic checks, and semantic scoring over the scenarios."""
    if not referents:
        raise ModelError("validation needs at least one referent")
    net = build_fpn(normalize_rules(model), model)
    static = static_validation(net, referents)
    dynamic = dynamic_validation(model, referents, apply_cf=apply_cf, suggest=suggest)
    evals = tuple(
        semantic_validity(model, s, referents, epsilon, resolution=resolution)
        for s in scenarios
    )
    return ValidationReport(static=static, dynamic=dynamic, scenarios=evals)
