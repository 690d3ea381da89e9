"""
Validating a model against stakeholder referents
================================================

Three stakeholders (a patient advocate, a clinician, a hospital board)
each describe the model they expect: vocabulary, rules, principle
priorities, and reasoning checks with uncertainty thresholds. Validation
diffs the model against those expectations, propagates uncertainty through
the net to test each reasoning check, and scores the model's behavior on a
concrete scenario. When a check fails, the tool searches for the smallest
certainty-factor change that would fix it.
"""
from fedm import dynamic_validation, semantic_validity, static_validation, validate
from fedm import build_fpn, normalize_rules
from fedm.data import (
    load_case_model,
    load_case_scenarios,
    load_referents,
    load_revised_model,
    load_revised_scenarios,
)

original = load_case_model()
revised = load_revised_model()
referents = load_referents()
scenario = load_case_scenarios()[0]

# --- static: does the model even speak the stakeholders' language? -----------
net = build_fpn(normalize_rules(original), original)
findings = static_validation(net, referents)
print(f"static diff, original model: {len(findings)} findings")
for f in findings[:4]:
    print(f"  {f}")
print("  ...")

# the revision adds the long-term-consequence variable and the expected rules
net_rev = build_fpn(normalize_rules(revised), revised)
print(f"static diff, revised model: {len(static_validation(net_rev, referents))} findings")

# --- dynamic: do the stakeholders' reasoning checks hold? --------------------
print("\nreasoning checks on the revised model:")
for res in dynamic_validation(revised, referents):
    print(f"  {res}")
    for s in res.suggestions:
        print(f"    repair: {s}")

# apply the suggested repair and re-run
repaired = revised.replace_rule("R1", revised.rule("R1").with_cf(0.9))
print("\nafter raising R1 to cf=0.9:")
for res in dynamic_validation(repaired, referents):
    print(f"  {res}")

def show(row):
    verdict = "pass" if row.passed else "fail"
    print(
        f"  {row.referent}: S_A={row.s_action:.3f} S_P={row.s_principle:.3f} "
        f"tau={row.tau} expected={set(row.expected_actions)} -> {verdict}"
    )


# --- semantic: is the behavior close enough to some stakeholder? -------------
before = semantic_validity(original, scenario, referents)
print(f"\nscenario {scenario} on the original model -> valid={before.valid}")
for row in before.rows:
    show(row)

# The clinician agrees on the action but the fuzzy overlap is too thin;
# strengthening the two decision rules closes the gap.
stronger = original.replace_rule(
    "R5", original.rule("R5").with_cf(0.95)
).replace_rule("R6", original.rule("R6").with_cf(0.9))
after = semantic_validity(stronger, scenario, referents)
print(f"\nsame scenario, decision rules strengthened -> valid={after.valid}")
for row in after.rows:
    show(row)

# --- everything at once ------------------------------------------------------
fully_repaired = repaired.replace_rule(
    "R5", repaired.rule("R5").with_cf(0.95)
).replace_rule("R6", repaired.rule("R6").with_cf(0.9))
report = validate(fully_repaired, referents, load_revised_scenarios())
print(
    f"\nfull validation of the repaired revised model: ok={report.ok} "
    f"(static={len(report.static)}, checks_pass={report.checks_pass}, "
    f"semantically_valid={report.semantically_valid})"
)
