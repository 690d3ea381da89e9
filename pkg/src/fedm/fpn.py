"""Rule-base verification through a fuzzy Petri net.

Every atom that occurs in some normalized rule becomes a place; every
normalized rule becomes a transition weighted by its certainty factor and
labeled with its principle tags. Markings are sets of marked places; firing
consumes the input tokens and produces the output tokens. The reachability
graph over all consistent input combinations is the ground truth the
structural checks run against, so each finding carries a witness that can be
re-checked on the graph.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import ModelError, StateCapExceededError
from .model import (
    FERR,
    INPUT,
    INTERNAL,
    OUTPUT,
    Atom,
    EdmModel,
    NormalizedRule,
    normalize_rules,
)

DEFAULT_STATE_CAP = 10**6


@dataclass(frozen=True)
class Place:
    index: int
    label: Atom
    kind: str  # kind of the variable the atom belongs to

    def __str__(self) -> str:
        return f"P{self.index + 1} {self.label}"


@dataclass(frozen=True)
class Transition:
    index: int
    name: str  # normalized rule name, e.g. R1#2
    parent: str
    kind: str  # FERR or FERD
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    input_atoms: tuple[Atom, ...]
    output_atoms: tuple[Atom, ...]
    beta: float
    principles: tuple[str, ...]

    @property
    def principle_set(self) -> frozenset[str]:
        return frozenset(self.principles)

    def __str__(self) -> str:
        return f"T{self.index + 1} {self.name}"


@dataclass(frozen=True)
class FuzzyPetriNet:
    model_name: str
    places: tuple[Place, ...]
    transitions: tuple[Transition, ...]

    def place_of(self, atom: Atom) -> Place:
        for p in self.places:
            if p.label == atom:
                return p
        raise ModelError(f"net has no place for {atom}")

    def vector(self, marking: frozenset[int]) -> list[int]:
        return [1 if i in marking else 0 for i in range(len(self.places))]

    def bracket(self, marking: frozenset[int]) -> str:
        return "[" + ",".join(str(b) for b in self.vector(marking)) + "]"

    def atoms(self, marking: frozenset[int]) -> tuple[Atom, ...]:
        return tuple(self.places[i].label for i in sorted(marking))


def build_fpn(normalized: Sequence[NormalizedRule], model: EdmModel) -> FuzzyPetriNet:
    """Net construction with a stable place order.

    Variables are ordered by first appearance while scanning the normalized
    rules (antecedent atoms before the consequent); within a variable, terms
    follow the variable's declaration order, restricted to atoms that occur
    in some rule. Transitions follow normalized rule order.
    """
    if not normalized:
        raise ModelError("cannot build a net from an empty rule base")
    used: dict[str, set] = defaultdict(set)
    var_order: list[str] = []
    for rule in normalized:
        for atom in (*rule.conjunct, rule.consequent):
            if atom.variable not in used:
                var_order.append(atom.variable)
            used[atom.variable].add(atom.term)

    places = []
    index = {}
    for var_name in var_order:
        var = model.variable(var_name)
        for term in var.term_names:
            if term in used[var_name]:
                atom = Atom(var_name, term)
                index[atom] = len(places)
                places.append(Place(index=len(places), label=atom, kind=var.kind))

    transitions = []
    for k, rule in enumerate(normalized):
        in_atoms = tuple(sorted(rule.conjunct, key=lambda a: index[a]))
        transitions.append(
            Transition(
                index=k,
                name=rule.name,
                parent=rule.parent,
                kind=rule.kind,
                inputs=tuple(index[a] for a in in_atoms),
                outputs=(index[rule.consequent],),
                input_atoms=in_atoms,
                output_atoms=(rule.consequent,),
                beta=rule.cf,
                principles=rule.principles,
            )
        )
    return FuzzyPetriNet(
        model_name=model.name, places=tuple(places), transitions=tuple(transitions)
    )


@dataclass(frozen=True)
class ReachabilityGraph:
    """BFS exploration result. Nodes are markings in discovery order; edges
    are (source node, transition index, target node) in firing order."""

    net: FuzzyPetriNet
    nodes: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int, int], ...]
    initial: tuple[int, ...]

    def successors(self, node: int):
        return [(t, dst) for src, t, dst in self.edges if src == node]

    def bracket(self, node: int) -> str:
        return self.net.bracket(self.nodes[node])


def initial_markings(net: FuzzyPetriNet, model: EdmModel) -> list[frozenset[int]]:
    """One marking per consistent input combination: exactly one token among
    the placed terms of each input variable, everything else empty."""
    index = {p.label: p.index for p in net.places}
    groups = []
    for var in model.input_variables:
        placed = [index[Atom(var.name, t)] for t in var.term_names if Atom(var.name, t) in index]
        if placed:
            groups.append(placed)
    combos = [frozenset()]
    for group in groups:
        combos = [prev | {i} for prev in combos for i in group]
    return [c for c in combos if c]


def generate_reachability(
    net: FuzzyPetriNet, model: EdmModel, state_cap: int = DEFAULT_STATE_CAP
) -> ReachabilityGraph:
    """Breadth-first exploration from every initial marking."""
    nodes: list[frozenset[int]] = []
    seen: dict[frozenset[int], int] = {}
    edges: list[tuple[int, int, int]] = []

    def intern(marking: frozenset[int]) -> int:
        if marking not in seen:
            if len(nodes) >= state_cap:
                raise StateCapExceededError(state_cap)
            seen[marking] = len(nodes)
            nodes.append(marking)
        return seen[marking]

    initial = tuple(intern(m) for m in initial_markings(net, model))
    cursor = 0
    while cursor < len(nodes):
        marking = nodes[cursor]
        for t in net.transitions:
            if all(i in marking for i in t.inputs):
                target = (marking - set(t.inputs)) | set(t.outputs)
                edges.append((cursor, t.index, intern(frozenset(target))))
        cursor += 1
    return ReachabilityGraph(net=net, nodes=tuple(nodes), edges=tuple(edges), initial=initial)


# --- findings ----------------------------------------------------------------

@dataclass(frozen=True)
class Finding:
    """One verification finding with a re-checkable witness."""

    check: str
    kind: str
    detail: str
    witness: dict = field(default_factory=dict, compare=False)

    def __str__(self) -> str:
        return f"{self.check}/{self.kind}: {self.detail}"

    def to_dict(self) -> dict:
        return {"check": self.check, "kind": self.kind, "detail": self.detail, "witness": self.witness}


def _reachable_from(graph: ReachabilityGraph, start: int, adj: dict[int, set]) -> set:
    seen = {start}
    frontier = [start]
    while frontier:
        n = frontier.pop()
        for m in adj.get(n, ()):
            if m not in seen:
                seen.add(m)
                frontier.append(m)
    return seen


def detect_incompleteness(
    graph: ReachabilityGraph, net: FuzzyPetriNet, model: EdmModel
) -> tuple[Finding, ...]:
    """Three gap patterns: an input combination that never reaches a decision,
    an intermediate place no rule consumes, and a declared output term no run
    can produce."""
    findings = []
    output_places = {p.index for p in net.places if p.kind == OUTPUT}

    adj: dict[int, set] = defaultdict(set)
    for src, _, dst in graph.edges:
        adj[src].add(dst)
    for n in graph.initial:
        reachable = _reachable_from(graph, n, adj)
        if not any(graph.nodes[m] & output_places for m in reachable):
            atoms = net.atoms(graph.nodes[n])
            findings.append(
                Finding(
                    check="incompleteness",
                    kind="uncovered_input",
                    detail="no decision reachable from " + " & ".join(str(a) for a in atoms),
                    witness={"marking": graph.bracket(n), "inputs": [str(a) for a in atoms]},
                )
            )

    consumed = {i for t in net.transitions for i in t.inputs}
    for p in net.places:
        if p.kind == INTERNAL and p.index not in consumed:
            findings.append(
                Finding(
                    check="incompleteness",
                    kind="dead_intermediate_place",
                    detail=f"no rule consumes {p.label}",
                    witness={"place": str(p.label)},
                )
            )

    marked_ever = set()
    for node in graph.nodes:
        marked_ever |= node
    out_var = model.output_variable
    place_index = {p.label: p.index for p in net.places}
    for term in out_var.term_names:
        atom = Atom(out_var.name, term)
        idx = place_index.get(atom)
        if idx is None or idx not in marked_ever:
            findings.append(
                Finding(
                    check="incompleteness",
                    kind="unreachable_output_term",
                    detail=f"output term {atom} is never produced",
                    witness={"place": str(atom)},
                )
            )
    return tuple(findings)


def _enabled(net: FuzzyPetriNet, marking: frozenset[int]):
    return [t for t in net.transitions if all(i in marking for i in t.inputs)]


def detect_inconsistency(graph: ReachabilityGraph, net: FuzzyPetriNet) -> tuple[Finding, ...]:
    """Contradictory conclusions: a reachable marking asserting two terms of
    one variable at once, or two enabled transitions about to do so."""
    findings = []
    for n, marking in enumerate(graph.nodes):
        by_var = defaultdict(list)
        for i in sorted(marking):
            atom = net.places[i].label
            by_var[atom.variable].append(atom)
        for var, atoms in by_var.items():
            if len(atoms) > 1:
                findings.append(
                    Finding(
                        check="inconsistency",
                        kind="conflicting_places",
                        detail=f"marking asserts {' and '.join(str(a) for a in atoms)}",
                        witness={"marking": graph.bracket(n), "places": [str(a) for a in atoms]},
                    )
                )
        enabled = _enabled(net, marking)
        for i, ti in enumerate(enabled):
            for tj in enabled[i + 1 :]:
                clash = [
                    (a, b)
                    for a in ti.output_atoms
                    for b in tj.output_atoms
                    if a.variable == b.variable and a.term != b.term
                ]
                if clash:
                    a, b = clash[0]
                    findings.append(
                        Finding(
                            check="inconsistency",
                            kind="conflicting_transitions",
                            detail=(
                                f"{ti.name} and {tj.name} are both enabled and conclude "
                                f"{a} versus {b}"
                            ),
                            witness={
                                "marking": graph.bracket(n),
                                "transitions": [ti.name, tj.name],
                                "conclusions": [str(a), str(b)],
                            },
                        )
                    )
    return tuple(findings)


def _elementary_cycles(n: int, adj: dict[int, set]) -> list[list[int]]:
    """Johnson-style enumeration; fine for the graph sizes verification sees."""
    cycles: list[list[int]] = []
    blocked: set[int] = set()
    blocked_by: dict[int, set] = defaultdict(set)
    stack: list[int] = []

    def unblock(v: int):
        blocked.discard(v)
        for w in list(blocked_by[v]):
            blocked_by[v].discard(w)
            if w in blocked:
                unblock(w)

    def circuit(v: int, s: int, allowed: set) -> bool:
        found = False
        stack.append(v)
        blocked.add(v)
        for w in sorted(adj.get(v, frozenset()) & allowed):
            if w == s:
                cycles.append(list(stack))
                found = True
            elif w not in blocked:
                if circuit(w, s, allowed):
                    found = True
        if found:
            unblock(v)
        else:
            for w in adj.get(v, frozenset()) & allowed:
                blocked_by[w].add(v)
        stack.pop()
        return found

    for s in range(n):
        allowed = set(range(s, n))
        if adj.get(s) and adj[s] & allowed:
            blocked.clear()
            blocked_by.clear()
            circuit(s, s, allowed)
    return cycles


def detect_circularity(graph: ReachabilityGraph) -> tuple[Finding, ...]:
    """Elementary cycles of the reachability graph."""
    adj: dict[int, set] = defaultdict(set)
    for src, _, dst in graph.edges:
        adj[src].add(dst)
    findings = []
    for cycle in _elementary_cycles(len(graph.nodes), adj):
        brackets = [graph.bracket(i) for i in cycle]
        findings.append(
            Finding(
                check="circularity",
                kind="cycle",
                detail="cycle through " + " -> ".join(brackets + [brackets[0]]),
                witness={"markings": brackets},
            )
        )
    return tuple(findings)


def detect_redundancy(
    net: FuzzyPetriNet, graph: Optional[ReachabilityGraph] = None
) -> tuple[Finding, ...]:
    """Transition pairs that are indistinguishable: same inputs, same outputs,
    same weight, same principle tags. Firing either from any marking leads to
    the same marking, which is what the reachability view would show."""
    findings = []
    for i, ti in enumerate(net.transitions):
        sig_i = (set(ti.inputs), set(ti.outputs), ti.beta, ti.principle_set)
        for tj in net.transitions[i + 1 :]:
            sig_j = (set(tj.inputs), set(tj.outputs), tj.beta, tj.principle_set)
            if sig_i == sig_j:
                findings.append(
                    Finding(
                        check="redundancy",
                        kind="redundant_pair",
                        detail=f"{ti.name} duplicates {tj.name}",
                        witness={"transitions": [ti.name, tj.name]},
                    )
                )
    return tuple(findings)


def principle_coverage(model: EdmModel) -> tuple[int, ...]:
    """1/0 per declared principle: does any rule carry the tag?"""
    tagged = set()
    for rule in model.rules:
        tagged.update(rule.principles)
    return tuple(1 if p in tagged else 0 for p in model.principles)


def cross_principle_conflicts(
    graph: ReachabilityGraph,
    net: FuzzyPetriNet,
    incompatible: Iterable[tuple[str, str]],
    model: Optional[EdmModel] = None,
    strict: bool = False,
) -> tuple[Finding, ...]:
    """Markings where rules tagged with incompatible principles compete.

    By default the pair must also conclude conflicting terms of one variable;
    ``strict`` flags bare co-enablement.
    """
    pairs = {frozenset(p) for p in incompatible}
    for pair in pairs:
        if len(pair) != 2:
            raise ModelError(f"incompatible pair must name two distinct principles, got {sorted(pair)}")
    universe = set(model.principles) if model is not None else {
        p for t in net.transitions for p in t.principles
    }
    for pair in pairs:
        for p in pair:
            if p not in universe:
                raise ModelError(f"incompatible pair references unknown principle {p!r}")

    findings = []
    for n, marking in enumerate(graph.nodes):
        enabled = _enabled(net, marking)
        for i, ti in enumerate(enabled):
            for tj in enabled[i + 1 :]:
                hit = None
                for pa in ti.principles:
                    for pb in tj.principles:
                        if frozenset((pa, pb)) in pairs:
                            hit = (pa, pb)
                if hit is None:
                    continue
                if not strict:
                    clash = any(
                        a.variable == b.variable and a.term != b.term
                        for a in ti.output_atoms
                        for b in tj.output_atoms
                    )
                    if not clash:
                        continue
                findings.append(
                    Finding(
                        check="cross_principle",
                        kind="conflict",
                        detail=(
                            f"{ti.name} ({hit[0]}) and {tj.name} ({hit[1]}) compete at "
                            f"{graph.bracket(n)}"
                        ),
                        witness={
                            "marking": graph.bracket(n),
                            "transitions": [ti.name, tj.name],
                            "principles": list(hit),
                        },
                    )
                )
    return tuple(findings)


def principle_redundancy(model: EdmModel) -> tuple[Finding, ...]:
    """Rule pairs with the same logical content and the same tags.

    The certainty factor is deliberately ignored: two rules that say the same
    thing for the same principles are redundant even at different confidence.
    """
    canon = []
    for rule in model.rules:
        key = (
            frozenset(frozenset(conj) for conj in rule.antecedent),
            frozenset(rule.consequents),
            rule.principle_set,
        )
        canon.append((rule.name, key))
    findings = []
    for i, (name_i, key_i) in enumerate(canon):
        for name_j, key_j in canon[i + 1 :]:
            if key_i == key_j:
                findings.append(
                    Finding(
                        check="principle_redundancy",
                        kind="redundant_tagging",
                        detail=f"{name_i} and {name_j} restate the same rule for the same principles",
                        witness={"rules": [name_i, name_j]},
                    )
                )
    return tuple(findings)


# --- assembled report --------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    model: str
    places: int
    transitions: int
    markings: int
    incompleteness: tuple[Finding, ...]
    inconsistency: tuple[Finding, ...]
    circularity: tuple[Finding, ...]
    redundancy: tuple[Finding, ...]
    principle_coverage: tuple[int, ...]
    principles: tuple[str, ...]
    cross_principle: tuple[Finding, ...]
    principle_redundancy: tuple[Finding, ...]

    @property
    def findings(self) -> tuple[Finding, ...]:
        return (
            self.incompleteness
            + self.inconsistency
            + self.circularity
            + self.redundancy
            + self.cross_principle
            + self.principle_redundancy
        )

    @property
    def ok(self) -> bool:
        return not self.findings and all(c == 1 for c in self.principle_coverage)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "places": self.places,
            "transitions": self.transitions,
            "markings": self.markings,
            "incompleteness": [f.to_dict() for f in self.incompleteness],
            "inconsistency": [f.to_dict() for f in self.inconsistency],
            "circularity": [f.to_dict() for f in self.circularity],
            "redundancy": [f.to_dict() for f in self.redundancy],
            "principle_coverage": dict(zip(self.principles, self.principle_coverage)),
            "cross_principle": [f.to_dict() for f in self.cross_principle],
            "principle_redundancy": [f.to_dict() for f in self.principle_redundancy],
            "ok": self.ok,
        }


def verify_model(
    model: EdmModel,
    incompatible: Iterable[tuple[str, str]] = (),
    strict: bool = False,
    state_cap: int = DEFAULT_STATE_CAP,
) -> VerificationReport:
    """Normalize, build the net, explore, and run every check."""
    normalized = normalize_rules(model)
    net = build_fpn(normalized, model)
    graph = generate_reachability(net, model, state_cap=state_cap)

    incompleteness = list(detect_incompleteness(graph, net, model))
    coverage = principle_coverage(model)
    for p, covered in zip(model.principles, coverage):
        if not covered:
            incompleteness.append(
                Finding(
                    check="incompleteness",
                    kind="uncovered_principle",
                    detail=f"no rule is tagged with {p}",
                    witness={"principle": p},
                )
            )
    return VerificationReport(
        model=model.name,
        places=len(net.places),
        transitions=len(net.transitions),
        markings=len(graph.nodes),
        incompleteness=tuple(incompleteness),
        inconsistency=detect_inconsistency(graph, net),
        circularity=detect_circularity(graph),
        redundancy=detect_redundancy(net, graph),
        principle_coverage=coverage,
        principles=model.principles,
        cross_principle=cross_principle_conflicts(graph, net, incompatible, model, strict),
        principle_redundancy=principle_redundancy(model),
    )


# --- DOT export ---------------------------------------------------------------

def fpn_to_dot(net: FuzzyPetriNet) -> str:
    """Deterministic DOT rendering of the net itself."""
    lines = [f'digraph "{net.model_name}_net" {{', "  rankdir=LR;"]
    for p in net.places:
        lines.append(f'  p{p.index} [shape=ellipse, label="P{p.index + 1}\\n{p.label}"];')
    for t in net.transitions:
        tags = ",".join(t.principles)
        lines.append(
            f'  t{t.index} [shape=box, label="T{t.index + 1} {t.name}\\n'
            f'b={t.beta} {{{tags}}}"];'
        )
    for t in net.transitions:
        for i in t.inputs:
            lines.append(f"  p{i} -> t{t.index};")
        for o in t.outputs:
            lines.append(f"  t{t.index} -> p{o};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def reachability_to_dot(graph: ReachabilityGraph) -> str:
    """Deterministic DOT rendering of the reachability graph, markings shown
    as bit vectors over the place order."""
    lines = [f'digraph "{graph.net.model_name}_reachability" {{']
    initial = set(graph.initial)
    for n in range(len(graph.nodes)):
        extra = ", peripheries=2" if n in initial else ""
        lines.append(
            f'  m{n} [shape=ellipse, label="M{n + 1}\\n{graph.bracket(n)}"{extra}];'
        )
    for src, t, dst in graph.edges:
        name = graph.net.transitions[t].name
        lines.append(f'  m{src} -> m{dst} [label="T{t + 1} {name}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
