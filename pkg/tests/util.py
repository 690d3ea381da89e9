"""Shared builders and independent oracles for the test suite.

The oracle functions re-derive expected values from first principles so the
tests never assert the implementation against itself.
"""
from __future__ import annotations

import itertools

from fedm.model import (
    Atom,
    EdmModel,
    FuzzyRule,
    LinguisticVariable,
    TrapezoidMF,
)


def var(name, kind, lo, hi, terms):
    """terms: list of (term_name, (a, b, c, d))."""
    return LinguisticVariable(
        name=name,
        kind=kind,
        universe=(lo, hi),
        terms=tuple((t, TrapezoidMF(*p)) for t, p in terms),
    )


# The shipped three-term layout on [0, 10]; reused for ad-hoc inputs.
THREE_TERMS_10 = [
    ("low", (0, 0, 2, 4.5)),
    ("medium", (3, 4.5, 5.5, 7)),
    ("high", (5.5, 7, 10, 10)),
]

TWO_TERMS_1 = [
    ("x", (0, 0, 0.4, 0.6)),
    ("y", (0.4, 0.6, 1, 1)),
]


def rule(name, kind, antecedent, consequents, cf, principles):
    """antecedent: list of disjuncts, each a list of (var, term) pairs."""
    return FuzzyRule(
        name=name,
        kind=kind,
        antecedent=tuple(tuple(Atom(v, t) for v, t in conj) for conj in antecedent),
        consequents=tuple(Atom(v, t) for v, t in consequents),
        cf=cf,
        principles=tuple(principles),
    )


def tiny_model():
    """One input, two terms everywhere, full coverage. Small enough that the
    reachability graph can be enumerated by hand."""
    variables = [
        var("A", "input", 0, 1, TWO_TERMS_1),
        var("R", "internal", 0, 1, [("lo", (0, 0, 0.4, 0.6)), ("hi", (0.4, 0.6, 1, 1))]),
        var("Act", "output", 0, 1, [("go", (0, 0, 0.4, 0.6)), ("stop", (0.4, 0.6, 1, 1))]),
    ]
    rules = [
        rule("F1", "FERR", [[("A", "x")]], [("R", "lo")], 0.9, ["P1"]),
        rule("F2", "FERR", [[("A", "y")]], [("R", "hi")], 0.8, ["P2"]),
        rule("D1", "FERD", [[("R", "lo")]], [("Act", "go")], 0.9, ["P1"]),
        rule("D2", "FERD", [[("R", "hi")]], [("Act", "stop")], 0.8, ["P2"]),
    ]
    return EdmModel.build("Tiny", variables, rules, ["P1", "P2"])


def two_input_model():
    """2 inputs x 2 terms; rules cover all four combinations."""
    variables = [
        var("A", "input", 0, 1, TWO_TERMS_1),
        var("B", "input", 0, 1, TWO_TERMS_1),
        var("R", "internal", 0, 1, [("lo", (0, 0, 0.4, 0.6)), ("hi", (0.4, 0.6, 1, 1))]),
        var("Act", "output", 0, 1, [("go", (0, 0, 0.4, 0.6)), ("stop", (0.4, 0.6, 1, 1))]),
    ]
    rules = [
        rule("F1", "FERR", [[("A", "x"), ("B", "x")], [("A", "x"), ("B", "y")]], [("R", "lo")], 0.9, ["P1"]),
        rule("F2", "FERR", [[("A", "y"), ("B", "x")], [("A", "y"), ("B", "y")]], [("R", "hi")], 0.8, ["P2"]),
        rule("D1", "FERD", [[("R", "lo")]], [("Act", "go")], 0.9, ["P1"]),
        rule("D2", "FERD", [[("R", "hi")]], [("Act", "stop")], 0.8, ["P2"]),
    ]
    return EdmModel.build("TwoInput", variables, rules, ["P1", "P2"])


# --- independent oracles -------------------------------------------------------

def brute_reachability(net, initial):
    """Exhaustive fixpoint over markings, written independently of the
    breadth-first implementation under test. Markings are frozensets of place
    indices; consuming semantics."""
    nodes = set(initial)
    edges = set()
    frontier = list(initial)
    while frontier:
        marking = frontier.pop()
        for t in net.transitions:
            if set(t.inputs) <= marking:
                nxt = frozenset((marking - set(t.inputs)) | set(t.outputs))
                edges.add((marking, t.name, nxt))
                if nxt not in nodes:
                    nodes.add(nxt)
                    frontier.append(nxt)
    return nodes, edges


def centroid_oracle(xs, mu):
    """Plain discrete centroid, no numpy."""
    num = sum(x * m for x, m in zip(xs, mu))
    den = sum(mu)
    return num / den


def action_similarity_oracle(mu_s, mu_r):
    actions = set(mu_s) | set(mu_r)
    num = sum(mu_s.get(a, 0.0) * mu_r.get(a, 0.0) for a in actions)
    den = max(max(mu_s.values(), default=0.0), max(mu_r.values(), default=0.0))
    return min(1.0, num / den)


def order_consistency_oracle(scores, pairs, epsilon):
    sats = [1.0 if scores.get(hi, 0.0) >= scores.get(lo, 0.0) - epsilon else 0.0
            for hi, lo in pairs]
    return sum(sats) / len(sats)


def transitive_pairs(chain):
    """All ordered pairs implied by a total order given as a chain."""
    out = []
    for i, hi in enumerate(chain):
        for lo in chain[i + 1:]:
            out.append((hi, lo))
    return out


def pure_inputs(model):
    """One representative crisp value per term (plateau midpoint), for every
    combination of input terms."""
    per_var = []
    for v in model.input_variables:
        reps = []
        for term, mf in v.terms:
            reps.append((term, (mf.b + mf.c) / 2.0))
        per_var.append((v.name, reps))
    names = [n for n, _ in per_var]
    for combo in itertools.product(*(reps for _, reps in per_var)):
        terms = tuple(t for t, _ in combo)
        values = {n: x for n, (_, x) in zip(names, combo)}
        yield terms, values
