"""Command line front end.

Four subcommands cover the pipeline: ``infer`` runs scenario records through
a model and prints the risk and recommended action, ``explain`` renders the
principle-level trace for each record, ``verify`` translates the rule base
into a Petri net and runs the structural checks, and ``validate`` scores the
model against stakeholder referents.

Exit codes: 0 success, 1 usage or parse error, 2 inference gap (an input no
rule covers, or a decision no fired rule explains), 3 verification findings,
4 validation failure. Output format defaults to the FEDM_FORMAT environment
variable when set, otherwise text.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .dsl import parse_model, parse_referent, parse_scenarios
from .errors import (
    EmptySurfaceError,
    FedmError,
    InputNotCoveredError,
    ModelError,
    OutOfUniverseError,
    ParseError,
    StateCapExceededError,
    UnexplainableDecisionError,
)
from .etm import build_trace, render_explanation
from .fpn import (
    DEFAULT_STATE_CAP,
    build_fpn,
    fpn_to_dot,
    generate_reachability,
    reachability_to_dot,
    verify_model,
)
from .inference import infer
from .model import EdmModel, normalize_rules, _fmt
from .validator import DEFAULT_EPSILON, validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GAP = 2
EXIT_FINDINGS = 3
EXIT_INVALID = 4

_GAP_ERRORS = (
    InputNotCoveredError,
    OutOfUniverseError,
    UnexplainableDecisionError,
    EmptySurfaceError,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here reserves 2 for
    inference gaps, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_model(path: str) -> EdmModel:
    return parse_model(_read(path))


def _resolve_format(value: Optional[str], allowed: tuple, parser) -> str:
    fmt = value or os.environ.get("FEDM_FORMAT") or "text"
    if fmt not in allowed:
        parser.error(f"unsupported format {fmt!r} (choose from {', '.join(allowed)})")
    return fmt


def _pairs(values, parser) -> list:
    pairs = []
    for raw in values or ():
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 2 or not all(parts):
            parser.error(f"--incompatible expects two comma-separated names, got {raw!r}")
        pairs.append((parts[0], parts[1]))
    return pairs


def _render_record(values: dict) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in values.items())


# --- subcommands ---------------------------------------------------------------

def cmd_infer(args, parser) -> int:
    fmt = _resolve_format(args.format, ("text", "json"), parser)
    model = _load_model(args.model)
    records = parse_scenarios(_read(args.scenarios))
    for i, record in enumerate(records, 1):
        result = infer(model, record, resolution=args.resolution)
        if fmt == "json":
            print(json.dumps(result.to_dict()))
        else:
            dist = ", ".join(
                f"{a}={result.action_distribution[a]:.3f}"
                for a in model.output_variable.term_names
            )
            print(
                f"scenario {i}: {_render_record(record)} -> "
                f"risk {100.0 * result.crisp_risk:.1f}%, "
                f"action {result.recommended_action} ({dist})"
            )
    return EXIT_OK


def cmd_explain(args, parser) -> int:
    fmt = _resolve_format(args.format, ("text", "json"), parser)
    model = _load_model(args.model)
    records = parse_scenarios(_read(args.scenarios))
    chunks = []
    for record in records:
        result = infer(model, record, resolution=args.resolution)
        trace = build_trace(model, result)
        if fmt == "json":
            print(json.dumps(trace.to_dict()))
        else:
            chunks.append(render_explanation(trace))
    if fmt == "text" and chunks:
        sys.stdout.write("\n".join(chunks))
    return EXIT_OK


def cmd_verify(args, parser) -> int:
    fmt = _resolve_format(args.format, ("text", "json", "dot"), parser)
    model = _load_model(args.model)
    incompatible = _pairs(args.incompatible, parser)
    report = verify_model(
        model, incompatible=incompatible, strict=args.strict, state_cap=args.state_cap
    )
    net = build_fpn(normalize_rules(model), model)
    graph = generate_reachability(net, model, state_cap=args.state_cap)
    if args.export_dot:
        with open(args.export_dot, "w", encoding="utf-8") as fh:
            fh.write(reachability_to_dot(graph))
    if fmt == "json":
        print(json.dumps(report.to_dict(), indent=2))
    elif fmt == "dot":
        print(fpn_to_dot(net))
        print(reachability_to_dot(graph))
    else:
        print(f"verification report: {report.model}")
        print(
            f"places={report.places} transitions={report.transitions} "
            f"markings={report.markings}"
        )
        coverage = ", ".join(
            f"{p}={c}" for p, c in zip(report.principles, report.principle_coverage)
        )
        print(f"principle coverage: {coverage}")
        findings = report.findings
        if findings:
            print(f"findings ({len(findings)}):")
            for f in findings:
                print(f"  [{f.check}] {f.kind}: {f.detail}")
        else:
            print("findings: none")
    return EXIT_OK if report.ok else EXIT_FINDINGS


def cmd_validate(args, parser) -> int:
    fmt = _resolve_format(args.format, ("text", "json"), parser)
    if not args.referent:
        parser.error("validation requires at least one referent (--referent)")
    model = _load_model(args.model)
    referents = [parse_referent(_read(path)) for path in args.referent]
    scenarios = parse_scenarios(_read(args.scenarios)) if args.scenarios else []
    report = validate(
        model,
        referents,
        scenarios,
        epsilon=args.epsilon,
        resolution=args.resolution,
    )
    if fmt == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        names = ", ".join(r.name for r in referents)
        print(f"validation report: {model.name} against {names}")
        if report.static:
            print(f"static findings ({len(report.static)}):")
            for f in report.static:
                print(f"  {f}")
        else:
            print("static findings: none")
        print("dynamic checks:")
        for check in report.dynamic:
            print(f"  {check}")
        for i, ev in enumerate(report.scenarios, 1):
            verdict = "valid" if ev.valid else "NOT valid"
            print(
                f"scenario {i}: {_render_record(ev.values)} -> "
                f"risk {100.0 * ev.crisp_risk:.1f}%, action {ev.recommended_action} "
                f"[{verdict}]"
            )
            for row in ev.rows:
                s_p = "skipped" if row.principle_skipped else f"{row.s_principle:.3f}"
                expected = "|".join(sorted(row.expected_actions))
                print(
                    f"  {row.referent}: S_A={row.s_action:.3f} S_P={s_p} "
                    f"expected={expected} "
                    f"action={'pass' if row.action_pass else 'fail'} "
                    f"principles={'pass' if row.principle_pass else 'fail'} -> "
                    f"{'pass' if row.passed else 'fail'}"
                )
        semantic = "pass" if report.semantically_valid else "fail"
        checks = "pass" if report.checks_pass else "fail"
        overall = "valid" if report.ok else "NOT valid"
        print(f"result: {overall} (scenarios {semantic}, reasoning checks {checks})")
    return EXIT_OK if report.ok else EXIT_INVALID


# --- argument wiring -----------------------------------------------------------

def _add_common(sub, scenarios_required: bool):
    sub.add_argument("--model", required=True, help="model file (text or JSON)")
    sub.add_argument(
        "--scenarios",
        required=scenarios_required,
        help="scenario file, one variable=value record per line",
    )
    sub.add_argument(
        "--resolution",
        type=int,
        default=1001,
        help="centroid sample count (default 1001, minimum 11)",
    )
    sub.add_argument("--format", help="output format: text or json (env FEDM_FORMAT)")


def build_parser() -> _Parser:
    parser = _Parser(prog="fedm", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    p_infer = commands.add_parser("infer", help="run scenarios through a model")
    _add_common(p_infer, scenarios_required=True)
    p_infer.set_defaults(func=cmd_infer)

    p_explain = commands.add_parser("explain", help="render decision explanations")
    _add_common(p_explain, scenarios_required=True)
    p_explain.set_defaults(func=cmd_explain)

    p_verify = commands.add_parser("verify", help="run the structural checks")
    p_verify.add_argument("--model", required=True, help="model file (text or JSON)")
    p_verify.add_argument(
        "--incompatible",
        action="append",
        metavar="A,B",
        help="principle pair that must not fire together (repeatable)",
    )
    p_verify.add_argument(
        "--strict",
        action="store_true",
        help="flag incompatible pairs on co-enablement even without conflicting conclusions",
    )
    p_verify.add_argument(
        "--state-cap",
        type=int,
        default=DEFAULT_STATE_CAP,
        help=f"abort reachability beyond this many markings (default {DEFAULT_STATE_CAP})",
    )
    p_verify.add_argument("--export-dot", metavar="PATH", help="write the reachability graph as DOT")
    p_verify.add_argument("--format", help="output format: text, json, or dot (env FEDM_FORMAT)")
    p_verify.set_defaults(func=cmd_verify)

    p_validate = commands.add_parser("validate", help="score the model against referents")
    _add_common(p_validate, scenarios_required=False)
    p_validate.add_argument(
        "--referent",
        action="append",
        metavar="PATH",
        help="referent file (repeatable)",
    )
    p_validate.add_argument(
        "--epsilon",
        type=float,
        default=DEFAULT_EPSILON,
        help=f"tolerance for priority comparisons (default {DEFAULT_EPSILON})",
    )
    p_validate.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "resolution", 1001) < 11:
        parser.error("--resolution must be at least 11")
    if getattr(args, "epsilon", 0.0) < 0.0:
        parser.error("--epsilon must be non-negative")
    if getattr(args, "state_cap", 1) < 1:
        parser.error("--state-cap must be positive")
    try:
        return args.func(args, parser)
    except _GAP_ERRORS as err:
        print(f"fedm {args.command}: {err}", file=sys.stderr)
        return EXIT_GAP
    except (ParseError, ModelError, StateCapExceededError) as err:
        print(f"fedm {args.command}: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"fedm {args.command}: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
