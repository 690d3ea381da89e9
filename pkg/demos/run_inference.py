"""
Running a scenario through an ethical decision model
====================================================

Loads the bundled patient triage model, feeds it one scenario, and walks
through what comes back: the fuzzified risk, the recommended action, and
the principle-level explanation of why that action won.
"""
from fedm import build_trace, infer, render_explanation
from fedm.data import load_case_model, load_case_scenarios

model = load_case_model()
scenario = load_case_scenarios()[0]
print(f"model: {model.name}")
print(f"scenario: {scenario}")

# One call runs the whole pipeline: fuzzify the inputs, fire the risk rules,
# defuzzify to a crisp risk, re-fuzzify, then fire the decision rules.
result = infer(model, scenario)

print(f"\ncrisp risk: {result.crisp_risk:.3f} (of 1.0)")
print("risk memberships:")
for term, mu in result.risk_memberships.items():
    print(f"  {term}: {mu:.3f}")

print("\naction distribution:")
for action, mu in result.action_distribution.items():
    marker = "  <- recommended" if action == result.recommended_action else ""
    print(f"  {action}: {mu:.3f}{marker}")

# every fired rule is kept, so the recommendation is fully auditable
print("\nfired rules:")
for name, activation in result.fired_rules:
    print(f"  {name} activation={activation:.3f}")

# The trace scores each ethical principle by how much the rules tagged with
# it contributed to the winning action.
trace = build_trace(model, result)
print()
print(render_explanation(trace))
