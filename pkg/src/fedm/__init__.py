"""Fuzzy ethical decision models.

Execute rule-based risk and action inference, explain recommendations at the
principle level, verify rule bases by translating them to a fuzzy Petri net,
and validate models against pluralistic stakeholder referents.
"""

from .errors import (
    EmptySurfaceError,
    FedmError,
    InputNotCoveredError,
    ModelError,
    OutOfUniverseError,
    ParseError,
    StateCapExceededError,
    UndefinedSimilarityError,
    UnexplainableDecisionError,
)
from .model import (
    Atom,
    EdmModel,
    FuzzyRule,
    LinguisticVariable,
    NormalizedRule,
    TrapezoidMF,
    model_from_dict,
    model_to_dict,
    normalize_rules,
    normalized_model,
    render_model,
    render_rule,
)
from .inference import (
    InferenceResult,
    defuzzify_centroid,
    fuzzify,
    infer,
    rule_activation,
)
from .etm import ExplanationTrace, build_trace, render_explanation
from .fpn import (
    Finding,
    FuzzyPetriNet,
    ReachabilityGraph,
    VerificationReport,
    build_fpn,
    cross_principle_conflicts,
    detect_circularity,
    detect_incompleteness,
    detect_inconsistency,
    detect_redundancy,
    fpn_to_dot,
    generate_reachability,
    initial_markings,
    principle_coverage,
    principle_redundancy,
    reachability_to_dot,
    verify_model,
)
from .validator import (
    Band,
    CheckResult,
    ReasoningCheck,
    Referent,
    ReferentVariable,
    ValidationReport,
    action_similarity,
    dynamic_validation,
    principle_order_consistency,
    propagate_uncertainty,
    semantic_validity,
    static_validation,
    validate,
)
from .dsl import (
    parse_model,
    parse_referent,
    parse_scenarios,
    referent_from_dict,
    referent_to_dict,
    render_referent,
)

__version__ = "0.1.0"
