"""Mamdani-style execution of a decision model.

The pipeline: fuzzify crisp inputs, fire the risk rules (min over a conjunct,
max over disjuncts, product with the rule's certainty factor), clip each
concluded risk term at the rule strength, aggregate by max, take the centroid
of the aggregated surface on a uniform grid, re-fuzzify the crisp risk, fire
the decision rules the same way, and recommend the best-supported action.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import EmptySurfaceError, InputNotCoveredError, ModelError
from .model import EdmModel, FuzzyRule, NormalizedRule

DEFAULT_RESOLUTION = 1001
MIN_RESOLUTION = 11

State = Mapping[str, Mapping[str, float]]


def fuzzify(model: EdmModel, values: Mapping[str, float]) -> dict[str, dict[str, float]]:
    """Memberships of every input variable's terms at the given crisp values.

    The value map must cover each input variable exactly once; extra or
    missing names are errors, as are values outside a universe.
    """
    input_names = [v.name for v in model.input_variables]
    missing = [n for n in input_names if n not in values]
    if missing:
        raise ModelError(f"no value for input variable(s): {', '.join(missing)}")
    extra = [n for n in values if n not in input_names]
    if extra:
        raise ModelError(f"value(s) for unknown input variable(s): {', '.join(extra)}")
    return {v.name: v.fuzzify(float(values[v.name])) for v in model.input_variables}


def rule_activation(rule: Union[FuzzyRule, NormalizedRule], state: State) -> float:
    """Truth degree of a rule's antecedent: max over disjuncts, min over atoms.

    Atoms absent from the state contribute 0, so a partially fuzzified state
    simply cannot activate rules that reach outside it.
    """
    if isinstance(rule, NormalizedRule):
        disjuncts = (rule.conjunct,)
    else:
        disjuncts = rule.antecedent
    best = 0.0
    for conj in disjuncts:
        degree = 1.0
        for atom in conj:
            degree = min(degree, state.get(atom.variable, {}).get(atom.term, 0.0))
            if degree == 0.0:
                break
        best = max(best, degree)
    return best


def defuzzify_centroid(xs: np.ndarray, mu: np.ndarray) -> float:
    """Discrete centroid of a sampled membership surface."""
    total = float(np.sum(mu))
    if total <= 0.0:
        raise EmptySurfaceError("cannot take the centroid of an all-zero surface")
    return float(np.sum(xs * mu) / total)


@dataclass(frozen=True)
class InferenceResult:
    """Outcome of one model run.

    ``crisp_risk`` is normalized to [0, 1]; ``risk_centroid`` keeps the raw
    value in the risk variable's own universe. ``fired_rules`` lists raw
    activations (before certainty weighting) for every rule with nonzero
    antecedent degree, in declaration order.
    """

    crisp_risk: float
    risk_centroid: float
    risk_memberships: dict[str, float]
    action_distribution: dict[str, float]
    recommended_action: str
    fired_rules: tuple[tuple[str, float], ...]

    def to_dict(self) -> dict:
        return {
            "crisp_risk": self.crisp_risk,
            "risk_memberships": dict(self.risk_memberships),
            "action_distribution": dict(self.action_distribution),
            "recommended_action": self.recommended_action,
            "fired_rules": [[name, mu] for name, mu in self.fired_rules],
        }


def infer(
    model: EdmModel,
    values: Mapping[str, float],
    resolution: int = DEFAULT_RESOLUTION,
    cf_weighting: bool = True,
) -> InferenceResult:
    """Run the full pipeline on one crisp input record.

    ``cf_weighting=False`` drops the certainty-factor product everywhere,
    which turns the model into plain Mamdani inference; the default keeps it.
    """
    if resolution < MIN_RESOLUTION:
        raise ModelError(f"resolution must be at least {MIN_RESOLUTION}, got {resolution}")

    input_state = fuzzify(model, values)
    risk_var = model.internal_variable

    fired: dict[str, float] = {}
    risk_strengths = {term: 0.0 for term in risk_var.term_names}
    for rule in model.ferr_rules:
        mu = rule_activation(rule, input_state)
        if mu <= 0.0:
            continue
        fired[rule.name] = mu
        strength = mu * rule.cf if cf_weighting else mu
        for atom in rule.consequents:
            if strength > risk_strengths[atom.term]:
                risk_strengths[atom.term] = strength
    if not fired:
        raise InputNotCoveredError("risk", dict(values))

    lo, hi = risk_var.universe
    xs = np.linspace(lo, hi, resolution)
    surface = np.zeros_like(xs)
    for term, strength in risk_strengths.items():
        if strength <= 0.0:
            continue
        clipped = np.minimum(strength, risk_var.mf(term).sample(xs))
        np.maximum(surface, clipped, out=surface)
    centroid = defuzzify_centroid(xs, surface)
    crisp_risk = (centroid - lo) / (hi - lo)

    state = dict(input_state)
    state[risk_var.name] = risk_var.fuzzify(centroid)

    action_var = model.output_variable
    action_strengths = {term: 0.0 for term in action_var.term_names}
    any_ferd = False
    for rule in model.ferd_rules:
        mu = rule_activation(rule, state)
        if mu <= 0.0:
            continue
        any_ferd = True
        fired[rule.name] = mu
        strength = mu * rule.cf if cf_weighting else mu
        for atom in rule.consequents:
            if strength > action_strengths[atom.term]:
                action_strengths[atom.term] = strength
    if not any_ferd:
        raise InputNotCoveredError("decision", dict(values))

    recommended = action_var.term_names[0]
    best = action_strengths[recommended]
    for term in action_var.term_names[1:]:
        if action_strengths[term] > best:
            recommended, best = term, action_strengths[term]

    fired_ordered = tuple((r.name, fired[r.name]) for r in model.rules if r.name in fired)
    return InferenceResult(
        crisp_risk=crisp_risk,
        risk_centroid=centroid,
        risk_memberships=risk_strengths,
        action_distribution=action_strengths,
        recommended_action=recommended,
        fired_rules=fired_ordered,
    )
