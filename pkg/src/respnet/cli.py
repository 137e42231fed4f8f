"""Command-line front end: check, analyze, ness, render, and explain.

Exit codes: 0 clean, 1 when any E* finding is present (or warnings under
--strict-warnings), 2 for usage or I/O failures.  Output for the same file
and flags is byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analysis, dsl, render
from .causal import DEFAULT_MAX_VARS, CausalError, Literal, but_for, ness_cause
from .diagnostics import Diagnostic, Severity
from .model import Scenario, Status, build_scenario

ENV_MAX_VARS = "RESPNET_MAX_VARS"


def _print_diagnostics(diagnostics: list[Diagnostic], file_name: str) -> None:
    for diagnostic in sorted(diagnostics, key=Diagnostic.sort_key):
        print(diagnostic.render(file_name), file=sys.stderr)


def _exit_code(diagnostics: list[Diagnostic], strict_warnings: bool) -> int:
    if any(d.severity is Severity.ERROR for d in diagnostics):
        return 1
    if strict_warnings and any(d.severity is Severity.WARNING for d in diagnostics):
        return 1
    return 0


def _load(path: str) -> tuple[Scenario | None, list[Diagnostic], str]:
    """Parse and build; returns (scenario-or-None, diagnostics, display name)."""
    try:
        source = Path(path).read_text(encoding="utf-8")
    except OSError as error:
        print(f"respnet: cannot read {path}: {error.strerror or error}", file=sys.stderr)
        raise SystemExit(2)
    declarations, diagnostics = dsl.parse(source, file=path)
    if any(d.severity is Severity.ERROR for d in diagnostics):
        return None, diagnostics, path
    scenario, build_errors = build_scenario(declarations)
    diagnostics.extend(build_errors)
    return scenario, diagnostics, path


def _max_vars(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(ENV_MAX_VARS)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            print(f"respnet: ignoring bad {ENV_MAX_VARS}={env!r}", file=sys.stderr)
    return DEFAULT_MAX_VARS


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_check(args: argparse.Namespace) -> int:
    scenario, diagnostics, name = _load(args.file)
    if scenario is not None:
        from .rules import Evaluator

        diagnostics.extend(Evaluator(scenario, _max_vars(None)).check_entailments())
    _print_diagnostics(diagnostics, name)
    return _exit_code(diagnostics, args.strict_warnings)


def _status_text(status: Status) -> str:
    return str(status)


def _span_json(diagnostic: Diagnostic):
    if diagnostic.span is None:
        return None
    return {
        "file": diagnostic.span.file,
        "line": diagnostic.span.line,
        "column": diagnostic.span.column,
        "length": diagnostic.span.length,
    }


def _claim_json(result: analysis.ClaimResult) -> dict:
    return {
        "subject": result.attribution.subject,
        "occurrence": result.attribution.occurrence,
        "sense": result.attribution.sense.text,
        "status": _status_text(result.status),
        "ledger": [
            {"condition": e.condition, "value": str(e.value), "source": e.source}
            for e in result.ledger.entries
        ],
    }


def _diag_json(diagnostic: Diagnostic) -> dict:
    return {
        "severity": str(diagnostic.severity),
        "code": diagnostic.code,
        "subjects": list(diagnostic.subjects),
        "message": diagnostic.message,
        "span": _span_json(diagnostic),
    }


def report_to_json(
    report: analysis.AnalysisReport, senses: set[str] | None = None
) -> dict:
    senses = senses or set(analysis.LAYER_NAMES)
    layers: dict[str, dict] = {}
    for layer in report.layer_order:
        if layer not in senses:
            continue
        content: dict = {}
        if layer == "causal":
            content["edges"] = [
                {"source": e.source, "target": e.target, "origin": e.origin}
                for e in report.edges
            ]
        content["claims"] = [_claim_json(r) for r in report.layer_claims(layer)]
        layers[layer] = content
    return {
        "scenario": report.scenario_name,
        "layers": layers,
        "claims": [
            _claim_json(r) for r in report.claims if r.attribution.sense.kind in senses
        ],
        "diagnostics": [_diag_json(d) for d in report.diagnostics],
    }


def _report_text(report: analysis.AnalysisReport, senses: set[str]) -> str:
    lines = [f"scenario: {report.scenario_name}"]
    for layer in report.layer_order:
        if layer not in senses:
            continue
        lines.append(f"layer {layer}:")
        if layer == "causal":
            for edge in report.edges:
                lines.append(f"  edge {edge.source} -> {edge.target} [{edge.origin}]")
        for result in report.layer_claims(layer):
            attribution = result.attribution
            lines.append(
                f"  {attribution.subject} {attribution.sense.text} "
                f"{attribution.occurrence} [{attribution.mode}]: {result.status}"
            )
            for entry in result.ledger.entries:
                lines.append(f"    {entry.condition} = {entry.value} ({entry.source})")
    lines.append("diagnostics:")
    for diagnostic in report.diagnostics:
        subjects = ", ".join(diagnostic.subjects)
        lines.append(f"  {diagnostic.severity}[{diagnostic.code}] {subjects}: {diagnostic.message}")
    return "\n".join(lines) + "\n"


def _cmd_analyze(args: argparse.Namespace) -> int:
    scenario, diagnostics, name = _load(args.file)
    stem = Path(args.file).stem
    if scenario is None:
        if args.format == "json":
            empty = {
                "scenario": stem,
                "layers": {},
                "claims": [],
                "diagnostics": [_diag_json(d) for d in sorted(diagnostics, key=Diagnostic.sort_key)],
            }
            print(json.dumps(empty, indent=2))
        else:
            _print_diagnostics(diagnostics, name)
        return 1
    report = analysis.layered_analysis(
        scenario, order=args.order, max_vars=_max_vars(None), scenario_name=stem
    )
    senses = set(analysis.LAYER_NAMES) if args.sense == "all" else {args.sense}
    if args.format == "json":
        print(json.dumps(report_to_json(report, senses), indent=2))
    else:
        sys.stdout.write(_report_text(report, senses))
    return _exit_code(list(report.diagnostics) + diagnostics, args.strict_warnings)


def _parse_literal(text: str, what: str) -> Literal:
    name, _, value_text = text.partition("=")
    if not name:
        print(f"respnet: {what} requires a variable name", file=sys.stderr)
        raise SystemExit(2)
    if value_text == "":
        value = True
    elif value_text in ("true", "false"):
        value = value_text == "true"
    else:
        print(f"respnet: bad literal {text!r}; use VAR, VAR=true or VAR=false", file=sys.stderr)
        raise SystemExit(2)
    return Literal(name, value)


def _cmd_ness(args: argparse.Namespace) -> int:
    scenario, diagnostics, name = _load(args.file)
    if scenario is None or any(d.severity is Severity.ERROR for d in diagnostics):
        _print_diagnostics(diagnostics, name)
        return 1
    if scenario.model is None:
        print(f"{name}: error[E_UNKNOWN_VAR]: scenario has no causal model", file=sys.stderr)
        return 1
    cause = _parse_literal(args.cause, "--cause")
    effect = _parse_literal(args.effect, "--effect")
    try:
        verdict = ness_cause(scenario.model, cause, effect, max_vars=_max_vars(args.max_vars))
        counterfactual = but_for(scenario.model, cause, effect)
    except CausalError as error:
        print(f"{name}: error[{error.code}]: {error.message}", file=sys.stderr)
        return 1
    print(f"NESS: {'yes' if verdict.is_cause else 'no'}")
    if verdict.witness is not None:
        print(f"witness: {verdict.witness_text()}")
    print(f"but-for: {'yes' if counterfactual else 'no'}")
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    scenario, diagnostics, name = _load(args.file)
    if scenario is None or any(d.severity is Severity.ERROR for d in diagnostics):
        _print_diagnostics(diagnostics, name)
        return 1
    report = analysis.layered_analysis(
        scenario, max_vars=_max_vars(None), scenario_name=Path(args.file).stem
    )
    if args.senses:
        senses = frozenset(part.strip() for part in args.senses.split(",") if part.strip())
    else:
        senses = frozenset(analysis.LAYER_NAMES)
    try:
        options = render.RenderOptions(
            senses=senses,
            include_candidates=not args.no_candidates,
            legend=not args.no_legend,
        )
    except ValueError as error:
        print(f"respnet: {error}", file=sys.stderr)
        return 2
    text = render.to_dot(scenario, report, options)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_explain(args: argparse.Namespace) -> int:
    scenario, diagnostics, name = _load(args.file)
    if scenario is None or any(d.severity is Severity.ERROR for d in diagnostics):
        _print_diagnostics(diagnostics, name)
        return 1
    try:
        sense = dsl.parse_sense_text(args.sense)
    except ValueError as error:
        print(f"respnet: bad --sense: {error}", file=sys.stderr)
        return 2
    known = set(scenario.actor_map) | set(scenario.occurrence_map)
    for ref, flag in ((args.subject, "--subject"), (args.occurrence, "--occurrence")):
        if ref not in known:
            print(f"{name}: error[E_UNRESOLVED]: unknown {flag} {ref!r}", file=sys.stderr)
            return 1
    if args.occurrence not in scenario.occurrence_map:
        print(
            f"{name}: error[E_UNRESOLVED]: {args.occurrence!r} is not an occurrence",
            file=sys.stderr,
        )
        return 1
    sys.stdout.write(
        analysis.explain(scenario, args.subject, args.occurrence, sense, _max_vars(None))
    )
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="respnet",
        description="Responsibility-network workbench for .resp scenario files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="parse, build and run the entailment checks")
    check.add_argument("file")
    check.add_argument("--strict-warnings", action="store_true")
    check.set_defaults(handler=_cmd_check)

    analyze = sub.add_parser("analyze", help="layered analysis plus detectors")
    analyze.add_argument("file")
    analyze.add_argument(
        "--sense",
        choices=("causal", "role", "liability", "moral", "all"),
        default="all",
    )
    analyze.add_argument("--format", choices=("text", "json"), default="text")
    analyze.add_argument(
        "--order", choices=("causal-first", "role-first"), default="causal-first"
    )
    analyze.add_argument("--strict-warnings", action="store_true")
    analyze.set_defaults(handler=_cmd_analyze)

    ness = sub.add_parser("ness", help="NESS verdict for a cause/effect literal pair")
    ness.add_argument("file")
    ness.add_argument("--cause", required=True, metavar="VAR[=true|false]")
    ness.add_argument("--effect", required=True, metavar="VAR[=true|false]")
    ness.add_argument("--max-vars", type=int, default=None)
    ness.set_defaults(handler=_cmd_ness)

    render_cmd = sub.add_parser("render", help="compile the scenario to DOT")
    render_cmd.add_argument("file")
    render_cmd.add_argument("-o", "--output", default=None, metavar="OUT.dot")
    render_cmd.add_argument("--senses", default=None, metavar="LIST")
    render_cmd.add_argument("--no-candidates", action="store_true")
    render_cmd.add_argument("--no-legend", action="store_true")
    render_cmd.set_defaults(handler=_cmd_render)

    explain = sub.add_parser("explain", help="show one condition ledger")
    explain.add_argument("file")
    explain.add_argument("--subject", required=True)
    explain.add_argument("--occurrence", required=True)
    explain.add_argument("--sense", required=True)
    explain.set_defaults(handler=_cmd_explain)

    return parser


def run(argv: list[str] | None = None) -> int:
    """Dispatch a command line; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code) if exit_.code is not None else 0
    try:
        return args.handler(args)
    except SystemExit as exit_:
        return int(exit_.code) if exit_.code is not None else 0


def main() -> None:  # console-script entry point
    sys.exit(run())


if __name__ == "__main__":
    main()
