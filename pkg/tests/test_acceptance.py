"""Acceptance gate.

Each test exercises one shipping criterion end to end against the bundled
case-study data and prints a single pass line; a failure anywhere in the body
keeps that line from printing. Tolerances are stated inline.
"""
import dataclasses
import time

import numpy as np
import pytest

import util
from fedm import (
    Band,
    Referent,
    ReferentVariable,
    action_similarity,
    build_fpn,
    build_trace,
    dynamic_validation,
    generate_reachability,
    infer,
    normalize_rules,
    principle_order_consistency,
    rule_activation,
    semantic_validity,
    static_validation,
    verify_model,
)
from fedm.model import Atom, EdmModel, normalized_model


def _line(n: int, label: str):
    print(f"criterion {n:02d} ({label}): pass")


NORMALIZED_GOLDEN = [
    ("R1#1", "Severity(low) & Mental(good) -> Risk(low)"),
    ("R1#2", "Severity(medium) & Mental(good) -> Risk(low)"),
    ("R1#3", "Severity(low) & Mental(average) -> Risk(low)"),
    ("R1#4", "Severity(low) & Mental(bad) -> Risk(low)"),
    ("R2#1", "Severity(high) & Mental(good) -> Risk(medium)"),
    ("R2#2", "Severity(medium) & Mental(average) -> Risk(medium)"),
    ("R3#1", "Severity(high) & Mental(average) -> Risk(high)"),
    ("R3#2", "Severity(medium) & Mental(bad) -> Risk(high)"),
    ("R3#3", "Severity(high) & Mental(bad) -> Risk(high)"),
    ("R4#1", "Risk(low) -> Action(accept)"),
    ("R5#1", "Risk(high) -> Action(tryAgainNow)"),
    ("R6#1", "Risk(medium) -> Action(tryAgainLater)"),
]


def test_criterion_01_rule_normalization(case_model):
    # exact: the case-study rule base expands to these 12 conjunctive rules,
    # in this order, under disjunct-major naming
    normalized = normalize_rules(case_model)
    assert [(n.name, str(n)) for n in normalized] == NORMALIZED_GOLDEN
    counts = {}
    for n in normalized:
        counts[n.parent] = counts.get(n.parent, 0) + 1
    assert counts == {"R1": 4, "R2": 2, "R3": 3, "R4": 1, "R5": 1, "R6": 1}
    _line(1, "rule normalization")


def test_criterion_02_petri_net_shape(case_model, revised_model):
    # exact place/transition counts for both bundled models
    net = build_fpn(normalize_rules(case_model), case_model)
    assert (len(net.places), len(net.transitions)) == (12, 12)
    net_rev = build_fpn(normalize_rules(revised_model), revised_model)
    assert (len(net_rev.places), len(net_rev.transitions)) == (15, 17)
    _line(2, "petri net shape")


def test_criterion_03_reachability(case_model):
    # exact marking count, edge count, and two named transitions between
    # specific markings of the case-study net
    net = build_fpn(normalize_rules(case_model), case_model)
    graph = generate_reachability(net, case_model)
    assert len(graph.nodes) == 15
    assert len(graph.edges) == 12
    brackets = {graph.bracket(i): i for i in range(len(graph.nodes))}
    m1 = brackets["[1,0,0,1,0,0,0,0,0,0,0,0]"]
    m10 = brackets["[0,0,0,0,0,0,1,0,0,0,0,0]"]
    m13 = brackets["[0,0,0,0,0,0,0,0,0,1,0,0]"]
    hops = {(src, net.transitions[t].name): dst for src, t, dst in graph.edges}
    assert hops[(m1, "R1#1")] == m10
    assert hops[(m10, "R4#1")] == m13
    # and the whole graph agrees with an independent brute-force fixpoint
    expect_nodes, expect_edges = util.brute_reachability(
        net, [graph.nodes[i] for i in graph.initial]
    )
    assert set(graph.nodes) == expect_nodes
    got_edges = {
        (graph.nodes[s], net.transitions[t].name, graph.nodes[d])
        for s, t, d in graph.edges
    }
    assert got_edges == expect_edges
    _line(3, "reachability analysis")


def test_criterion_04_verification_clean(case_model):
    # the case-study model passes all seven structural checks
    report = verify_model(
        case_model, incompatible=[("Autonomy", "Nonmaleficence")]
    )
    assert report.ok
    assert report.findings == ()
    assert report.incompleteness == ()
    assert report.inconsistency == ()
    assert report.circularity == ()
    assert report.redundancy == ()
    assert report.cross_principle == ()
    assert report.principle_redundancy == ()
    assert report.principle_coverage == (1, 1, 1)
    assert (report.places, report.transitions, report.markings) == (12, 12, 15)
    _line(4, "verification clean")


def test_criterion_05_mutation_sensitivity(case_model):
    # every seeded defect class is caught: a removed decision rule shows up
    # as incompleteness, any verbatim clone as redundancy, and a contrarian
    # rule as inconsistency plus a cross-principle conflict
    m = case_model

    without_r4 = EdmModel.build(
        m.name, m.variables, [r for r in m.rules if r.name != "R4"], m.principles
    )
    rep = verify_model(without_r4)
    assert not rep.ok
    assert any(f.kind == "dead_intermediate_place" for f in rep.incompleteness)

    for rule in m.rules:
        clone = dataclasses.replace(rule, name=rule.name + "copy")
        doubled = EdmModel.build(m.name, m.variables, m.rules + (clone,), m.principles)
        rep = verify_model(doubled)
        assert rep.redundancy, f"clone of {rule.name} not flagged"

    contrarian = util.rule(
        "RX", "FERR",
        [[("Severity", "high"), ("Mental", "bad")]],
        [("Risk", "low")],
        0.9, ["Autonomy"],
    )
    mutated = EdmModel.build(m.name, m.variables, m.rules + (contrarian,), m.principles)
    rep = verify_model(mutated, incompatible=[("Autonomy", "Nonmaleficence")])
    assert not rep.ok
    assert rep.inconsistency
    assert rep.cross_principle
    _line(5, "mutation sensitivity")


def test_criterion_06_static_validation(case_model, revised_model, referents):
    # exact diff against the stakeholder referents: the original model lacks
    # the long-term-consequence variable (once per referent) and nine
    # referent-expected rules; the revised model lacks nothing
    net = build_fpn(normalize_rules(case_model), case_model)
    findings = static_validation(net, referents)
    assert len(findings) == 12
    missing_vars = {
        (f.referent, f.subject) for f in findings if f.kind == "missing_variable"
    }
    missing_rules = {f.subject for f in findings if f.kind == "missing_rule"}
    assert missing_vars == {
        ("PatientAdvocate", "LTconsequences"),
        ("Clinician", "LTconsequences"),
        ("HospitalBoard", "LTconsequences"),
    }
    assert missing_rules == {
        "C_R4", "P_D1", "P_D2", "P_D3", "C_D1",
        "H_D1", "H_D2", "H_D3", "H_D4",
    }
    net_rev = build_fpn(normalize_rules(revised_model), revised_model)
    assert static_validation(net_rev, referents) == ()
    _line(6, "static validation diff")


def test_criterion_07_uncertainty_propagation(revised_model, referents):
    # the six stakeholder reasoning checks evaluate to these degrees
    # (tolerance 1e-9); only RR2_V1 fails, and raising the admission rule's
    # certainty to 0.9 clears it at 0.72
    expected = {
        ("PatientAdvocate", "RR1_V1"): (0.81, True),
        ("PatientAdvocate", "RR2_V1"): (0.64, False),
        ("Clinician", "RR1_V2"): (0.72, True),
        ("Clinician", "RR2_V2"): (0.80, True),
        ("HospitalBoard", "RR1_V3"): (0.85, True),
        ("HospitalBoard", "RR2_V3"): (0.80, True),
    }
    results = dynamic_validation(revised_model, referents)
    assert len(results) == 6
    for res in results:
        degree, passed = expected[(res.referent, res.check)]
        assert res.degree == pytest.approx(degree, abs=1e-9)
        assert res.passed is passed
    failing = [r for r in results if not r.passed]
    assert [
        (s.rule, s.old_cf, s.new_cf) for r in failing for s in r.suggestions
    ] == [("R1", 0.8, 0.9)]

    repaired = revised_model.replace_rule(
        "R1", revised_model.rule("R1").with_cf(0.9)
    )
    results2 = dynamic_validation(repaired, referents)
    by_check = {(r.referent, r.check): r for r in results2}
    fixed = by_check[("PatientAdvocate", "RR2_V1")]
    assert fixed.degree == pytest.approx(0.72, abs=1e-9)
    assert all(r.passed for r in results2)
    _line(7, "uncertainty propagation")


def test_criterion_08_similarity_measures():
    # hand-computed similarity values at 1e-9, and the priority tolerance
    # boundary at its default 0.02
    assert action_similarity(
        {"accept": 1.0, "tryAgainLater": 0.0}, {"accept": 1.0}
    ) == pytest.approx(1.0, abs=1e-9)
    assert action_similarity(
        {"tryAgainNow": 0.9, "tryAgainLater": 0.2}, {"tryAgainNow": 1.0}
    ) == pytest.approx(0.9, abs=1e-9)
    assert action_similarity({"a": 0.8}, {"b": 1.0}) == pytest.approx(0.0, abs=1e-9)

    pairs = [("A", "B"), ("B", "N"), ("A", "N")]
    assert principle_order_consistency({"A": 0.9, "B": 0.5, "N": 0.3}, pairs) == 1.0
    assert principle_order_consistency({"A": 0.3, "B": 0.5}, [("A", "B")]) == 0.0
    assert principle_order_consistency(
        {"A": 0.49, "B": 0.5}, [("A", "B")], epsilon=0.02
    ) == 1.0
    assert principle_order_consistency(
        {"A": 0.49, "B": 0.5}, [("A", "B")], epsilon=0.005
    ) == 0.0
    _line(8, "similarity measures")


def test_criterion_09_semantic_validity(case_model, case_scenario, referents):
    # before repair no referent passes; raising the two decision-rule
    # certainties flips the clinician (and only the clinician) to a pass;
    # every reported score equals an independent recomputation at 1e-9
    def check_scores(model, ev):
        result = infer(model, ev.values)
        trace = build_trace(model, result)
        for row in ev.rows:
            ref = {r.name: r for r in referents}[row.referent]
            mu_r = {
                a: 1.0 if a in ref.expected_actions(result.crisp_risk) else 0.0
                for a in model.output_variable.term_names
            }
            s_a = util.action_similarity_oracle(result.action_distribution, mu_r)
            assert row.s_action == pytest.approx(s_a, abs=1e-9)
            if not row.principle_skipped:
                s_p = util.order_consistency_oracle(
                    trace.contributions, sorted(ref.priority), 0.02
                )
                assert row.s_principle == pytest.approx(s_p, abs=1e-9)

    before = semantic_validity(case_model, case_scenario, referents)
    assert not before.valid
    assert all(not row.passed for row in before.rows)
    check_scores(case_model, before)

    repaired = case_model.replace_rule(
        "R5", case_model.rule("R5").with_cf(0.95)
    ).replace_rule("R6", case_model.rule("R6").with_cf(0.9))
    after = semantic_validity(repaired, case_scenario, referents)
    assert after.valid
    verdicts = {row.referent: row.passed for row in after.rows}
    assert verdicts == {
        "PatientAdvocate": False, "Clinician": True, "HospitalBoard": False,
    }
    check_scores(repaired, after)
    _line(9, "semantic validity")


def test_criterion_10_fuzzed_invariants(case_model, revised_model):
    # 10,000 fuzzed (model, input) pairs inside a 30 second budget, holding
    # four invariants: memberships stay in [0,1], uniformly scaling decision
    # certainties never changes the recommendation, rule activation is
    # monotone in the state, and normalization preserves inference exactly
    rng = np.random.default_rng(20260819)
    models = [case_model, revised_model, util.tiny_model(), util.two_input_model()]
    prepared = [(m, normalized_model(m)) for m in models]

    start = time.perf_counter()
    for i in range(10_000):
        model, normalized = prepared[i % len(prepared)]
        values = {
            v.name: float(rng.uniform(*v.universe)) for v in model.input_variables
        }
        result = infer(model, values)

        for mu in result.risk_memberships.values():
            assert 0.0 <= mu <= 1.0 + 1e-12
        for mu in result.action_distribution.values():
            assert 0.0 <= mu <= 1.0 + 1e-12

        lam = float(rng.uniform(0.1, 1.0))
        scaled = EdmModel.build(
            model.name,
            model.variables,
            [
                r.with_cf(r.cf * lam) if r.kind == "FERD" else r
                for r in model.rules
            ],
            model.principles,
        )
        assert (
            infer(scaled, values).recommended_action == result.recommended_action
        )

        rule = model.rules[int(rng.integers(len(model.rules)))]
        state = {
            v.name: {t: float(rng.uniform(0, 1)) for t in v.term_names}
            for v in model.variables
        }
        bumped = {
            var: {t: min(1.0, mu + float(rng.uniform(0, 0.5))) for t, mu in terms.items()}
            for var, terms in state.items()
        }
        assert rule_activation(rule, bumped) >= rule_activation(rule, state) - 1e-12

        other = infer(normalized, values)
        assert other.crisp_risk == pytest.approx(result.crisp_risk, abs=1e-12)
        assert other.recommended_action == result.recommended_action

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"fuzz loop took {elapsed:.1f}s"
    _line(10, "fuzzed invariants")
