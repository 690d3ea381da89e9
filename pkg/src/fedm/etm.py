"""Explanation traces: which principles carried the recommendation, and why.

The principle score of the recommendation is the certainty-weighted activation
mass of the decision rules that fired for it, attributed to each rule's
principle tags. Risk rules appear in the fired listing for context but do not
score: they justify the risk estimate, not the action choice.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnexplainableDecisionError
from .inference import InferenceResult
from .model import FERD, EdmModel


@dataclass(frozen=True)
class FiredRuleRecord:
    name: str
    kind: str
    activation: float
    cf: float
    principles: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "activation": self.activation,
            "cf": self.cf,
            "principles": list(self.principles),
        }


@dataclass(frozen=True)
class ExplanationTrace:
    """Everything needed to render or audit one decision.

    ``contributions`` holds the raw principle scores over the full principle
    universe (zeros included); ``normalized`` is the share-of-total copy used
    for display. ``dominant`` orders the universe by descending raw score,
    ties broken by declaration order.
    """

    model: str
    action: str
    crisp_risk: float
    risk_memberships: dict[str, float]
    contributions: dict[str, float]
    normalized: dict[str, float]
    dominant: tuple[str, ...]
    fired: tuple[FiredRuleRecord, ...]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "action": self.action,
            "crisp_risk": self.crisp_risk,
            "risk_memberships": dict(self.risk_memberships),
            "contributions": dict(self.contributions),
            "normalized": dict(self.normalized),
            "dominant": list(self.dominant),
            "fired": [f.to_dict() for f in self.fired],
        }


def build_trace(model: EdmModel, result: InferenceResult) -> ExplanationTrace:
    """Attribute the recommendation to principles.

    Raises when no fired decision rule concludes the recommended action;
    a recommendation nothing argued for cannot be explained.
    """
    activations = dict(result.fired_rules)
    action_var = model.output_variable.name

    scores = {p: 0.0 for p in model.principles}
    scoring_rules = []
    for rule in model.ferd_rules:
        mu = activations.get(rule.name, 0.0)
        if mu <= 0.0:
            continue
        concludes = any(
            a.variable == action_var and a.term == result.recommended_action
            for a in rule.consequents
        )
        if not concludes:
            continue
        scoring_rules.append(rule)
        for p in rule.principles:
            scores[p] += mu * rule.cf
    if not scoring_rules:
        raise UnexplainableDecisionError(
            f"no fired decision rule concludes {result.recommended_action!r}"
        )

    total = sum(scores.values())
    normalized = {p: (scores[p] / total if total > 0.0 else 0.0) for p in model.principles}
    dominant = tuple(
        sorted(model.principles, key=lambda p: (-scores[p], model.principles.index(p)))
    )
    fired = tuple(
        FiredRuleRecord(
            name=r.name,
            kind=r.kind,
            activation=activations[r.name],
            cf=r.cf,
            principles=r.principles,
        )
        for r in model.rules
        if r.name in activations
    )
    return ExplanationTrace(
        model=model.name,
        action=result.recommended_action,
        crisp_risk=result.crisp_risk,
        risk_memberships=dict(result.risk_memberships),
        contributions=scores,
        normalized=normalized,
        dominant=dominant,
        fired=fired,
    )


def render_explanation(trace: ExplanationTrace) -> str:
    """Deterministic plain-text rendering: same trace, same bytes."""
    lines = []
    lines.append(f"decision explanation ({trace.model})")
    lines.append(f"recommended action: {trace.action}")
    lines.append(f"crisp risk: {trace.crisp_risk * 100:.1f}% ({trace.crisp_risk:.3f} normalized)")
    lines.append("risk memberships:")
    for term, degree in trace.risk_memberships.items():
        lines.append(f"  {term}: {degree:.3f}")
    lines.append("principle scores (raw / normalized):")
    for p, raw in trace.contributions.items():
        lines.append(f"  {p}: {raw:.3f} / {trace.normalized[p]:.3f}")
    lines.append("principle ranking: " + ", ".join(trace.dominant))
    lines.append("fired rules:")
    for f in trace.fired:
        tags = ", ".join(f.principles)
        lines.append(
            f"  {f.name} ({f.kind}) activation={f.activation:.3f} cf={f.cf:.3f} [{tags}]"
        )
    return "\n".join(lines) + "\n"
