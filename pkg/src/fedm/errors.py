"""Exception types shared across the package.

Every error that can surface through the CLI maps onto one of the exit-code
families: parse/usage problems, inference gaps, and similarity corner cases.
"""

from __future__ import annotations


class FedmError(Exception):
    """Base class for all package errors."""


class ParseError(FedmError):
    """Raised for malformed model, referent, or scenario text.

    Carries the 1-based line and column so CLI output can point at the
    offending token.
    """

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(message)

    def __str__(self) -> str:
        msg = super().__str__()
        if self.line and self.column:
            return f"line {self.line}, col {self.column}: {msg}"
        if self.line:
            return f"line {self.line}: {msg}"
        return msg


class ModelError(FedmError):
    """A structurally invalid model, rule base, or referent."""


class OutOfUniverseError(FedmError):
    """A crisp value fell outside the variable's declared universe."""

    def __init__(self, variable: str, value: float, lo: float, hi: float):
        self.variable = variable
        self.value = value
        super().__init__(
            f"value {value!r} for variable {variable!r} is outside its universe [{lo}, {hi}]"
        )


class InputNotCoveredError(FedmError):
    """No rule fired for the given input: the rule base has a gap.

    ``stage`` names the layer that failed ("risk" when no risk rule fired,
    "decision" when no decision rule fired).
    """

    def __init__(self, stage: str, values: dict):
        self.stage = stage
        self.values = dict(values)
        shown = ", ".join(f"{k}={v}" for k, v in self.values.items())
        super().__init__(f"input not covered by {stage} rules: {shown}")


class EmptySurfaceError(FedmError):
    """Defuzzification was asked to take the centroid of an all-zero surface."""


class UnexplainableDecisionError(FedmError):
    """No fired decision rule concludes the recommended action."""


class UndefinedSimilarityError(FedmError):
    """Action similarity of two all-zero distributions is undefined."""


class StateCapExceededError(FedmError):
    """Reachability exploration hit the configured marking cap."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"reachability exploration exceeded the state cap of {cap} markings")
