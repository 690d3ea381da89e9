"""
Structural verification of a rule base
======================================

Translates a model's rules into a fuzzy Petri net, enumerates the reachable
markings, and runs the structural checks: completeness, consistency,
circularity, redundancy, and the principle-level checks. Then seeds a
defect on purpose to show what a finding looks like.
"""
import dataclasses

from fedm import build_fpn, generate_reachability, normalize_rules, verify_model
from fedm.data import load_case_model, load_revised_model
from fedm.model import Atom, EdmModel, FuzzyRule

model = load_case_model()

# the net: one place per (variable, term) atom in use, one transition per
# normalized single-conjunct rule
net = build_fpn(normalize_rules(model), model)
print(f"net for {model.name}: {len(net.places)} places, {len(net.transitions)} transitions")

graph = generate_reachability(net, model)
print(f"reachable markings: {len(graph.nodes)}, firings: {len(graph.edges)}")

report = verify_model(model, incompatible=[("Autonomy", "Nonmaleficence")])
print(f"\nclean model -> ok={report.ok}, findings={len(report.findings)}")
coverage = dict(zip(report.principles, report.principle_coverage))
print(f"principle coverage: {coverage}")

# Now break it. A rule that concludes low risk exactly where an existing
# rule concludes high risk is a classic contradiction.
contrarian = FuzzyRule(
    name="RX",
    kind="FERR",
    antecedent=((Atom("Severity", "high"), Atom("Mental", "bad")),),
    consequents=(Atom("Risk", "low"),),
    cf=0.9,
    principles=("Autonomy",),
)
mutated = EdmModel.build(
    model.name, model.variables, model.rules + (contrarian,), model.principles
)
bad = verify_model(mutated, incompatible=[("Autonomy", "Nonmaleficence")])
print(f"\nwith a contrarian rule -> ok={bad.ok}")
for f in bad.findings:
    print(f"  [{f.check}] {f.kind}: {f.detail}")

# A verbatim clone is flagged as redundancy even under a different name.
clone = dataclasses.replace(model.rule("R4"), name="R4copy")
doubled = EdmModel.build(
    model.name, model.variables, model.rules + (clone,), model.principles
)
print(f"\nwith a cloned rule -> redundancy findings: {len(verify_model(doubled).redundancy)}")

# The revised model (long-term consequences added) is intentionally tense:
# its consequence shortcut can push toward urgency while the pure risk path
# still supports acceptance, and the checker surfaces exactly that overlap.
revised = load_revised_model()
rev_report = verify_model(revised)
print(f"\nrevised model -> ok={rev_report.ok}, inconsistency findings: {len(rev_report.inconsistency)}")
for f in rev_report.inconsistency[:2]:
    print(f"  [{f.check}] {f.kind}: {f.detail}")
