"""Layered scenario analysis and the unjust-attribution detectors.

The method starts from causal responsibility and layers role, liability,
and moral responsibility on top, evaluating every attribution and claim
into a condition ledger.  On top of the layered report sit four pattern
detectors: liability sinks (W101), moral crumple zones (W102),
responsibility gaps (W103), and machine occurrences on a harm path that no
human or institution answers for (W104).  Their trigger predicates are
deliberately conservative: each needs both an over-burdened frontline
signal and an under-examined upstream actor before it fires.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .causal import DEFAULT_MAX_VARS, CausalEdge, direct_parents
from .diagnostics import Diagnostic, Severity
from .model import (
    ActorKind,
    Attribution,
    Mode,
    OccurrenceKind,
    Scenario,
    Sense,
    Status,
    Value,
)
from .rules import SOURCE_ENTAILMENT, ConditionLedger, Evaluator

LAYER_NAMES = ("causal", "role", "liability", "moral")


@dataclass(frozen=True)
class ClaimResult:
    attribution: Attribution
    ledger: ConditionLedger

    @property
    def status(self) -> Status:
        return self.ledger.overall

    def sort_key(self) -> tuple:
        sense = self.attribution.sense
        subkind_rank = 0
        if sense.kind == "moral":
            subkind_rank = 0 if sense.subkind == "attributability" else 1
        return (subkind_rank,) + self.attribution.sort_key()


@dataclass(frozen=True)
class AnalysisReport:
    scenario_name: str
    ids: frozenset[str]
    layer_order: tuple[str, ...]
    edges: tuple[CausalEdge, ...]
    causal_claims: tuple[ClaimResult, ...]
    role_claims: tuple[ClaimResult, ...]
    liability_claims: tuple[ClaimResult, ...]
    moral_claims: tuple[ClaimResult, ...]
    diagnostics: tuple[Diagnostic, ...]

    @cached_property
    def claims(self) -> tuple[ClaimResult, ...]:
        merged = (
            self.causal_claims
            + self.role_claims
            + self.liability_claims
            + self.moral_claims
        )
        return tuple(sorted(merged, key=lambda r: r.attribution.sort_key()))

    def layer_claims(self, layer: str) -> tuple[ClaimResult, ...]:
        return {
            "causal": self.causal_claims,
            "role": self.role_claims,
            "liability": self.liability_claims,
            "moral": self.moral_claims,
        }[layer]


def layered_analysis(
    scenario: Scenario,
    order: str = "causal-first",
    max_vars: int = DEFAULT_MAX_VARS,
    scenario_name: str = "scenario",
) -> AnalysisReport:
    """Evaluate every layer of the scenario and run the detectors.

    order only affects the report's layer listing (role-first is the
    alternative starting point); the evaluation itself is unchanged.
    """
    evaluator = Evaluator(scenario, max_vars=max_vars)
    edges = evaluator.edges

    def results(kind: str) -> tuple[ClaimResult, ...]:
        found = [
            ClaimResult(a, evaluator.status_of(a))
            for a in scenario.attributions
            if a.sense.kind == kind
        ]
        return tuple(sorted(found, key=ClaimResult.sort_key))

    causal_claims = results("causal")
    role_claims = results("role")
    liability_claims = results("liability")
    moral_claims = results("moral")

    diagnostics: list[Diagnostic] = list(evaluator.check_entailments())
    for group in (causal_claims, role_claims, liability_claims, moral_claims):
        for result in group:
            diagnostics.extend(result.ledger.warnings)

    layer_order = (
        ("role", "causal", "liability", "moral")
        if order == "role-first"
        else LAYER_NAMES
    )
    report = AnalysisReport(
        scenario_name=scenario_name,
        ids=frozenset(scenario.actor_map) | frozenset(scenario.occurrence_map),
        layer_order=layer_order,
        edges=edges,
        causal_claims=causal_claims,
        role_claims=role_claims,
        liability_claims=liability_claims,
        moral_claims=moral_claims,
        diagnostics=(),
    )
    diagnostics.extend(detect_liability_sinks(scenario, report))
    diagnostics.extend(detect_crumple_zones(scenario, report))
    diagnostics.extend(detect_responsibility_gaps(scenario, report))
    diagnostics.extend(detect_uncovered_machine_occurrences(scenario, report))
    diagnostics.sort(key=Diagnostic.sort_key)
    return AnalysisReport(
        scenario_name=report.scenario_name,
        ids=report.ids,
        layer_order=report.layer_order,
        edges=report.edges,
        causal_claims=report.causal_claims,
        role_claims=report.role_claims,
        liability_claims=report.liability_claims,
        moral_claims=report.moral_claims,
        diagnostics=tuple(diagnostics),
    )


# ---------------------------------------------------------------------------
# Detectors
# ---------------------------------------------------------------------------

def _is_kind(scenario: Scenario, subject: str, kind: ActorKind) -> bool:
    actor = scenario.actor_map.get(subject)
    return actor is not None and actor.kind is kind


def _fact_entries_all_unknown(ledger: ConditionLedger) -> bool:
    fact_entries = [e for e in ledger.entries if e.source != SOURCE_ENTAILMENT]
    return all(e.value is Value.UNKNOWN for e in fact_entries)


def detect_liability_sinks(scenario: Scenario, report: AnalysisReport) -> list[Diagnostic]:
    """W101: a human bears a live liability claim under a strained role while
    a causally involved institution goes unexamined."""
    edge_set = {(e.source, e.target) for e in report.edges}
    findings: list[Diagnostic] = []
    humans = sorted(
        a.id for a in scenario.actors if a.kind is ActorKind.HUMAN
    )
    institutions = sorted(
        a.id for a in scenario.actors if a.kind is ActorKind.INSTITUTION
    )
    for human in humans:
        role_strained = any(
            result.attribution.subject == human
            and any(
                entry.condition in ("achievable", "no_conflict")
                and entry.value in (Value.UNMET, Value.UNKNOWN)
                for entry in result.ledger.entries
            )
            for result in report.role_claims
        )
        if not role_strained:
            continue
        for result in report.liability_claims:
            if result.attribution.subject != human:
                continue
            if result.status not in (Status.OPEN, Status.SUPPORTED):
                continue
            consequence = result.attribution.occurrence
            unexamined = []
            for institution in institutions:
                if (institution, consequence) not in edge_set:
                    continue
                ledgers = [
                    other.ledger
                    for other in report.liability_claims
                    if other.attribution.subject == institution
                    and other.attribution.occurrence == consequence
                ]
                if not ledgers or all(_fact_entries_all_unknown(lg) for lg in ledgers):
                    unexamined.append(institution)
            if unexamined:
                findings.append(
                    Diagnostic(
                        Severity.WARNING,
                        "W101",
                        f"possible liability sink: {human!r} carries the liability "
                        f"claim for {consequence!r} under a strained role while "
                        f"causally involved institutions go unexamined: "
                        + ", ".join(unexamined),
                        (human,) + tuple(unexamined),
                    )
                )
    return findings


def detect_crumple_zones(scenario: Scenario, report: AnalysisReport) -> list[Diagnostic]:
    """W102: a human is claimed morally accountable for a consequence they
    could not control or foresee while another actor's attributability for
    it is supported."""
    evaluator = Evaluator(scenario)
    findings: list[Diagnostic] = []
    supported_attributability: dict[str, list[str]] = {}
    for result in report.moral_claims:
        if (
            result.attribution.sense.subkind == "attributability"
            and result.status is Status.SUPPORTED
        ):
            supported_attributability.setdefault(
                result.attribution.occurrence, []
            ).append(result.attribution.subject)
    for result in report.moral_claims:
        attribution = result.attribution
        if attribution.sense.subkind != "accountability":
            continue
        if not _is_kind(scenario, attribution.subject, ActorKind.HUMAN):
            continue
        occ = scenario.occurrence_map.get(attribution.occurrence)
        if occ is None or occ.kind is not OccurrenceKind.CONSEQUENCE:
            continue
        sub = evaluator.attributability(attribution.subject, attribution.occurrence)
        shaky = any(
            entry.condition in ("control", "knowledge")
            and entry.value in (Value.UNMET, Value.UNKNOWN)
            for entry in sub.entries
        )
        if not shaky:
            continue
        others = sorted(
            subject
            for subject in supported_attributability.get(attribution.occurrence, [])
            if subject != attribution.subject
        )
        if others:
            findings.append(
                Diagnostic(
                    Severity.WARNING,
                    "W102",
                    f"possible moral crumple zone: {attribution.subject!r} is held "
                    f"to account for {attribution.occurrence!r} without control or "
                    f"knowledge while attributability is supported for: "
                    + ", ".join(others),
                    (attribution.subject,) + tuple(others),
                )
            )
    return findings


def detect_responsibility_gaps(scenario: Scenario, report: AnalysisReport) -> list[Diagnostic]:
    """W103: a harm with causal ancestors but no supported liability or
    accountability anywhere among humans and institutions."""
    findings: list[Diagnostic] = []
    inbound = {e.target for e in report.edges}
    for occ in scenario.occurrences:
        if occ.kind is not OccurrenceKind.CONSEQUENCE or not occ.harm:
            continue
        if occ.id not in inbound:
            continue  # nothing to trace
        liability_supported = any(
            result.attribution.occurrence == occ.id
            and result.status is Status.SUPPORTED
            and not _is_kind(scenario, result.attribution.subject, ActorKind.AI_SYSTEM)
            for result in report.liability_claims
        )
        accountability_supported = any(
            result.attribution.occurrence == occ.id
            and result.attribution.sense.subkind == "accountability"
            and result.status is Status.SUPPORTED
            and not _is_kind(scenario, result.attribution.subject, ActorKind.AI_SYSTEM)
            for result in report.moral_claims
        )
        if not liability_supported and not accountability_supported:
            findings.append(
                Diagnostic(
                    Severity.WARNING,
                    "W103",
                    f"responsibility gap: {occ.id!r} has causal ancestors but no "
                    f"supported liability or accountability attribution",
                    (occ.id,),
                )
            )
    return findings


def detect_uncovered_machine_occurrences(
    scenario: Scenario, report: AnalysisReport
) -> list[Diagnostic]:
    """W104: a machine occurrence sits on a causal path to a harm and neither
    it nor any of its direct causal parents has a human or institutional
    role attribution."""
    occ_ids = set(scenario.occurrence_map)
    children: dict[str, set[str]] = {}
    for edge in report.edges:
        if edge.source in occ_ids and edge.target in occ_ids:
            children.setdefault(edge.source, set()).add(edge.target)

    harms = {o.id for o in scenario.occurrences if o.harm}

    def reaches_harm(start: str) -> bool:
        seen: set[str] = set()
        stack = [start]
        while stack:
            node = stack.pop()
            if node in harms:
                return True
            for child in children.get(node, ()):
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return False

    role_holders: dict[str, bool] = {}
    for attribution in scenario.attributions:
        if attribution.sense.kind != "role":
            continue
        actor = scenario.actor_map.get(attribution.subject)
        if actor is None or actor.kind is ActorKind.AI_SYSTEM:
            continue
        role_holders[attribution.occurrence] = True

    parents = direct_parents(scenario)
    findings: list[Diagnostic] = []
    for occ in scenario.occurrences:
        if not occ.kind.is_machine:
            continue
        if not reaches_harm(occ.id):
            continue
        covered = role_holders.get(occ.id, False) or any(
            role_holders.get(parent, False) for parent in parents[occ.id]
        )
        if not covered:
            findings.append(
                Diagnostic(
                    Severity.WARNING,
                    "W104",
                    f"machine occurrence {occ.id!r} lies on a causal path to a harm "
                    f"but no human or institution holds a role attribution for it "
                    f"or its direct causes",
                    (occ.id,),
                )
            )
    return findings


# ---------------------------------------------------------------------------
# Explanations
# ---------------------------------------------------------------------------

def explain(
    scenario: Scenario,
    subject: str,
    occurrence: str,
    sense: Sense,
    max_vars: int = DEFAULT_MAX_VARS,
) -> str:
    """Deterministic, human-readable rendering of one condition ledger."""
    evaluator = Evaluator(scenario, max_vars=max_vars)
    attribution = Attribution(subject, occurrence, sense, Mode.CLAIMED)
    ledger = evaluator.status_of(attribution)
    header = f"{subject} / {occurrence} / {sense.text}: {ledger.overall}"
    if ledger.overall is Status.BLOCKED:
        return f"{header} ({ledger.blocked_reason})\n"
    decisive = ledger.decisive()
    width = max((len(e.condition) for e in ledger.entries), default=0)
    value_width = max((len(str(e.value)) for e in ledger.entries), default=0)
    lines = [header]
    for entry in ledger.entries:
        line = f"  {entry.condition.ljust(width)}  {str(entry.value).ljust(value_width)}  {entry.source}"
        if entry is decisive:
            line += "  (decisive)"
        lines.append(line)
    for warning in ledger.warnings:
        lines.append(f"  warning[{warning.code}]: {warning.message}")
    return "\n".join(lines) + "\n"
