"""Per-sense responsibility condition evaluation under three-valued evidence.

Each claim is scored against its sense's condition set.  Condition facts
are three-valued (met / unmet / unknown) because absence of evidence must
not read as refutation.  Structural necessary conditions from the
entailment table (causal responsibility for liability, a held legal duty
for liability, attributability for accountability) enter the ledgers as
two-valued entailment entries: they either hold in the scenario or they do
not.

Folding a ledger: blocked if the validity matrix rejects the attribution;
otherwise unsupported if any entry is unmet, open if any is unknown, and
supported only when everything is met.  Role criteria are benchmarks
rather than conditions, so an unmet criterion downgrades to open with a
warning instead of unsupported.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .causal import (
    DEFAULT_MAX_VARS,
    CausalEdge,
    Literal,
    derive_causal_edges,
    evaluate,
    ness_cause,
)
from .diagnostics import Diagnostic, Severity
from .model import (
    CONDITION_NAMES,
    OCCURRENCE_SUBJECT,
    ActorKind,
    Attribution,
    ConditionFact,
    Mode,
    Scenario,
    Sense,
    Status,
    Value,
    validate_attribution,
)

__all__ = [
    "CONDITION_NAMES",
    "ConditionFact",
    "ConditionLedger",
    "Evaluator",
    "LedgerEntry",
    "Value",
    "check_entailments",
    "derive_status",
    "evaluate_accountability",
    "evaluate_attributability",
    "evaluate_causal",
    "evaluate_civil",
    "evaluate_criminal",
    "evaluate_role",
]

SOURCE_FACT = "fact"
SOURCE_ENGINE = "derived-from-causal-engine"
SOURCE_DEFAULT = "default-unknown"
SOURCE_ENTAILMENT = "entailment"

ROLE_CRITERIA = ("clearly_stated", "context_appropriate", "achievable", "no_conflict")
ROLE_WARNING_CODES = {
    "clearly_stated": "W_ROLE_UNCLEAR",
    "context_appropriate": "W_ROLE_CONTEXT",
    "achievable": "W_ROLE_DEMANDING",
    "no_conflict": "W_ROLE_CONFLICT",
}

_STATUS_AS_VALUE = {
    Status.SUPPORTED: Value.MET,
    Status.OPEN: Value.UNKNOWN,
    Status.UNSUPPORTED: Value.UNMET,
    Status.BLOCKED: Value.UNMET,
}


@dataclass(frozen=True)
class LedgerEntry:
    condition: str
    value: Value
    source: str


@dataclass(frozen=True)
class ConditionLedger:
    subject: str
    occurrence: str
    sense: Sense
    entries: tuple[LedgerEntry, ...]
    overall: Status
    warnings: tuple[Diagnostic, ...] = ()
    blocked_reason: str | None = None

    def entry(self, condition: str) -> LedgerEntry | None:
        for item in self.entries:
            if item.condition == condition:
                return item
        return None

    def decisive(self) -> LedgerEntry | None:
        """The first entry that pins the overall below supported."""
        if self.overall is Status.UNSUPPORTED:
            for item in self.entries:
                if item.value is Value.UNMET:
                    return item
        return None


def _fold(entries: tuple[LedgerEntry, ...]) -> Status:
    values = [e.value for e in entries]
    if any(v is Value.UNMET for v in values):
        return Status.UNSUPPORTED
    if any(v is Value.UNKNOWN for v in values):
        return Status.OPEN
    return Status.SUPPORTED


class Evaluator:
    """Caches the causal layer so repeated claim evaluations stay cheap."""

    def __init__(self, scenario: Scenario, max_vars: int = DEFAULT_MAX_VARS):
        self.scenario = scenario
        self.max_vars = max_vars

    @cached_property
    def edges(self) -> tuple[CausalEdge, ...]:
        return derive_causal_edges(self.scenario, max_vars=self.max_vars)

    @cached_property
    def edge_set(self) -> frozenset[tuple[str, str]]:
        return frozenset((e.source, e.target) for e in self.edges)

    @cached_property
    def _actual(self) -> dict[str, bool] | None:
        model = self.scenario.model
        return None if model is None else evaluate(model)

    def _subject_variables(self, subject: str) -> tuple[str, ...]:
        """Model variables standing for the subject's own occurrences."""
        model = self.scenario.model
        if model is None:
            return ()
        if subject in self.scenario.occurrence_map:
            var = model.bound_occurrences.get(subject)
            return () if var is None else (var,)
        return tuple(
            var
            for occ in self.scenario.produced_by(subject)
            if (var := model.bound_occurrences.get(occ.id)) is not None
        )

    def causal_value(self, subject: str, occurrence: str) -> tuple[Value, str]:
        """Three-valued cause-of verdict for (subject, occurrence)."""
        if (subject, occurrence) in self.edge_set:
            return Value.MET, SOURCE_ENGINE
        model = self.scenario.model
        if model is not None:
            target_var = model.bound_occurrences.get(occurrence)
            subject_vars = self._subject_variables(subject)
            if target_var is not None and subject_vars:
                # an edge would exist if NESS had held for any pairing
                return Value.UNMET, SOURCE_ENGINE
        return Value.UNKNOWN, SOURCE_DEFAULT

    def ness_between(self, occ_x: str, occ_e: str) -> bool | None:
        """Model verdict on whether occurrence occ_x NESS-causes occ_e."""
        model = self.scenario.model
        if model is None:
            return None
        var_x = model.bound_occurrences.get(occ_x)
        var_e = model.bound_occurrences.get(occ_e)
        if var_x is None or var_e is None or var_x == var_e:
            return None
        actual = self._actual
        assert actual is not None
        if not actual[var_x] or not actual[var_e]:
            return False
        return ness_cause(
            model, Literal(var_x, True), Literal(var_e, True), max_vars=self.max_vars
        ).is_cause

    def _fact_entry(self, subject: str, occurrence: str, condition: str) -> LedgerEntry:
        declared = self.scenario.fact_map.get((subject, occurrence, condition))
        if declared is None:
            return LedgerEntry(condition, Value.UNKNOWN, SOURCE_DEFAULT)
        return LedgerEntry(condition, declared, SOURCE_FACT)

    def holds_role_duty(self, subject: str, subkind: str) -> bool:
        """Whether the subject asserts a role duty of the given subkind anywhere."""
        return any(
            a.subject == subject
            and a.mode is Mode.ASSERTED
            and a.sense.kind == "role"
            and a.sense.subkind == subkind
            for a in self.scenario.attributions
        )

    # -- validity ----------------------------------------------------------

    def _subject_kind(self, subject: str) -> ActorKind | str | None:
        actor = self.scenario.actor_map.get(subject)
        if actor is not None:
            return actor.kind
        if subject in self.scenario.occurrence_map:
            return OCCURRENCE_SUBJECT
        return None

    def _blocked(self, subject: str, occurrence: str, sense: Sense) -> ConditionLedger | None:
        kind = self._subject_kind(subject)
        occ = self.scenario.occurrence_map.get(occurrence)
        if kind is None or occ is None:
            raise KeyError(f"unknown reference {subject!r} or {occurrence!r}")
        verdict = validate_attribution(kind, sense, occ.kind)
        if verdict:
            return None
        return ConditionLedger(
            subject, occurrence, sense, (), Status.BLOCKED, (), verdict.reason
        )

    # -- per-sense evaluators ----------------------------------------------

    def causal(self, subject: str, occurrence: str) -> ConditionLedger:
        sense = Sense("causal")
        blocked = self._blocked(subject, occurrence, sense)
        if blocked is not None:
            return blocked
        value, source = self.causal_value(subject, occurrence)
        entries = (LedgerEntry("cause-of", value, source),)
        return ConditionLedger(subject, occurrence, sense, entries, _fold(entries))

    def role(self, attribution: Attribution) -> ConditionLedger:
        blocked = self._blocked(attribution.subject, attribution.occurrence, attribution.sense)
        if blocked is not None:
            return blocked
        entries = tuple(
            self._fact_entry(attribution.subject, attribution.occurrence, criterion)
            for criterion in ROLE_CRITERIA
        )
        warnings = tuple(
            Diagnostic(
                Severity.WARNING,
                ROLE_WARNING_CODES[entry.condition],
                f"role criterion {entry.condition!r} is unmet for "
                f"{attribution.subject!r} over {attribution.occurrence!r}",
                (attribution.subject, attribution.occurrence),
                attribution.span,
            )
            for entry in entries
            if entry.value is Value.UNMET
        )
        # criteria are benchmarks, not conditions: unmet downgrades to open
        overall = Status.SUPPORTED if all(e.value is Value.MET for e in entries) else Status.OPEN
        return ConditionLedger(
            attribution.subject,
            attribution.occurrence,
            attribution.sense,
            entries,
            overall,
            warnings,
        )

    def attributability(self, subject: str, occurrence: str) -> ConditionLedger:
        sense = Sense("moral", "attributability")
        blocked = self._blocked(subject, occurrence, sense)
        if blocked is not None:
            return blocked
        value, source = self.causal_value(subject, occurrence)
        entries = (
            LedgerEntry("cause-of", value, source),
            self._fact_entry(subject, occurrence, "control"),
            self._fact_entry(subject, occurrence, "knowledge"),
        )
        return ConditionLedger(subject, occurrence, sense, entries, _fold(entries))

    def accountability(self, subject: str, occurrence: str) -> ConditionLedger:
        sense = Sense("moral", "accountability")
        blocked = self._blocked(subject, occurrence, sense)
        if blocked is not None:
            return blocked
        sub = self.attributability(subject, occurrence)
        entries = (
            LedgerEntry("attributability", _STATUS_AS_VALUE[sub.overall], SOURCE_ENTAILMENT),
            self._fact_entry(subject, occurrence, "moral_shortfall"),
        )
        return ConditionLedger(subject, occurrence, sense, entries, _fold(entries))

    def _liability_entailments(
        self, subject: str, occurrence: str
    ) -> tuple[LedgerEntry, LedgerEntry]:
        duty = Value.MET if self.holds_role_duty(subject, "legal_duty") else Value.UNMET
        cause, _ = self.causal_value(subject, occurrence)
        cause_entailed = Value.MET if cause is Value.MET else Value.UNMET
        return (
            LedgerEntry("legal-duty-held", duty, SOURCE_ENTAILMENT),
            LedgerEntry("cause-of", cause_entailed, SOURCE_ENTAILMENT),
        )

    def _causation_fact_entry(self, subject: str, occurrence: str) -> tuple[LedgerEntry, Diagnostic | None]:
        """breach_caused_harm, cross-checked against the model when it binds
        one of the subject's occurrences and the harm; the engine wins over
        an inconsistent fact."""
        entry = self._fact_entry(subject, occurrence, "breach_caused_harm")
        verdicts = [
            self.ness_between(occ.id, occurrence)
            for occ in self.scenario.produced_by(subject)
        ]
        verdicts = [v for v in verdicts if v is not None]
        if not verdicts:
            return entry, None
        engine_value = Value.MET if any(verdicts) else Value.UNMET
        warning = None
        if entry.source == SOURCE_FACT and entry.value is not Value.UNKNOWN and entry.value != engine_value:
            warning = Diagnostic(
                Severity.WARNING,
                "W_FACT_CONFLICT",
                f"declared breach_caused_harm({subject}, {occurrence}) = {entry.value} "
                f"conflicts with the causal model, which says {engine_value}",
                (subject, occurrence),
            )
        return LedgerEntry("breach_caused_harm", engine_value, SOURCE_ENGINE), warning

    def civil(self, subject: str, occurrence: str, sense: Sense | None = None) -> ConditionLedger:
        sense = sense or Sense("liability", "civil")
        blocked = self._blocked(subject, occurrence, sense)
        if blocked is not None:
            return blocked
        entailments = self._liability_entailments(subject, occurrence)
        causation, conflict = self._causation_fact_entry(subject, occurrence)
        branch = sense.qualifier or "negligence"
        if branch == "negligence":
            entries = entailments + (
                self._fact_entry(subject, occurrence, "duty_owed"),
                self._fact_entry(subject, occurrence, "breach"),
                causation,
                self._fact_entry(subject, occurrence, "harm_in_scope"),
            )
        else:
            # undecomposed branches carry one basis fact plus the causation element
            entries = entailments + (
                self._fact_entry(subject, occurrence, "basis_established"),
                causation,
            )
        warnings = (conflict,) if conflict is not None else ()
        return ConditionLedger(subject, occurrence, sense, entries, _fold(entries), warnings)

    def criminal(self, subject: str, occurrence: str) -> ConditionLedger:
        sense = Sense("liability", "criminal")
        blocked = self._blocked(subject, occurrence, sense)
        if blocked is not None:
            return blocked
        entries = self._liability_entailments(subject, occurrence) + (
            self._fact_entry(subject, occurrence, "actus_reus"),
            self._fact_entry(subject, occurrence, "mens_rea"),
        )
        return ConditionLedger(subject, occurrence, sense, entries, _fold(entries))

    # -- dispatch ------------------------------------------------------------

    def status_of(self, attribution: Attribution) -> ConditionLedger:
        sense = attribution.sense
        if sense.kind == "causal":
            return self.causal(attribution.subject, attribution.occurrence)
        if sense.kind == "role":
            return self.role(attribution)
        if sense.kind == "liability":
            if sense.subkind == "criminal":
                return self.criminal(attribution.subject, attribution.occurrence)
            return self.civil(attribution.subject, attribution.occurrence, sense)
        if sense.subkind == "attributability":
            return self.attributability(attribution.subject, attribution.occurrence)
        return self.accountability(attribution.subject, attribution.occurrence)

    def check_entailments(self) -> list[Diagnostic]:
        """Table-2 necessary-condition checks over asserted attributions."""
        findings: list[Diagnostic] = []
        for attribution in self.scenario.attributions:
            if attribution.mode is not Mode.ASSERTED:
                continue
            sense = attribution.sense
            subject, occurrence = attribution.subject, attribution.occurrence
            if sense.kind == "liability":
                problems = []
                cause, _ = self.causal_value(subject, occurrence)
                if cause is not Value.MET:
                    problems.append("no established causal responsibility")
                if not self.holds_role_duty(subject, "legal_duty"):
                    problems.append("no asserted legal duty")
                if problems:
                    findings.append(
                        Diagnostic(
                            Severity.ERROR,
                            "E_ENTAIL_LIABILITY",
                            f"asserted liability of {subject!r} for {occurrence!r} "
                            f"lacks its necessary conditions: {'; '.join(problems)}",
                            (subject, occurrence),
                            attribution.span,
                        )
                    )
            elif sense.kind == "moral" and sense.subkind == "accountability":
                problems = []
                if self.attributability(subject, occurrence).overall is not Status.SUPPORTED:
                    problems.append("attributability is not supported")
                shortfall = self.scenario.fact(subject, occurrence, "moral_shortfall")
                if not self.holds_role_duty(subject, "moral_duty") and shortfall is not Value.MET:
                    problems.append("no asserted moral duty and no established moral shortfall")
                if problems:
                    findings.append(
                        Diagnostic(
                            Severity.ERROR,
                            "E_ENTAIL_ACCOUNT",
                            f"asserted accountability of {subject!r} for {occurrence!r} "
                            f"lacks its necessary conditions: {'; '.join(problems)}",
                            (subject, occurrence),
                            attribution.span,
                        )
                    )
            elif sense.kind == "moral" and sense.subkind == "attributability":
                cause, _ = self.causal_value(subject, occurrence)
                if cause is not Value.MET:
                    findings.append(
                        Diagnostic(
                            Severity.ERROR,
                            "E_ENTAIL_ATTRIB",
                            f"asserted attributability of {subject!r} for {occurrence!r} "
                            f"lacks established causal responsibility",
                            (subject, occurrence),
                            attribution.span,
                        )
                    )
        findings.sort(key=Diagnostic.sort_key)
        return findings


# ---------------------------------------------------------------------------
# Module-level surface
# ---------------------------------------------------------------------------

def evaluate_causal(subject: str, occurrence: str, scenario: Scenario) -> ConditionLedger:
    return Evaluator(scenario).causal(subject, occurrence)


def evaluate_role(attribution: Attribution, scenario: Scenario) -> ConditionLedger:
    return Evaluator(scenario).role(attribution)


def evaluate_attributability(subject: str, occurrence: str, scenario: Scenario) -> ConditionLedger:
    return Evaluator(scenario).attributability(subject, occurrence)


def evaluate_accountability(subject: str, occurrence: str, scenario: Scenario) -> ConditionLedger:
    return Evaluator(scenario).accountability(subject, occurrence)


def evaluate_civil(
    subject: str, occurrence: str, scenario: Scenario, sense: Sense | None = None
) -> ConditionLedger:
    return Evaluator(scenario).civil(subject, occurrence, sense)


def evaluate_criminal(subject: str, occurrence: str, scenario: Scenario) -> ConditionLedger:
    return Evaluator(scenario).criminal(subject, occurrence)


def check_entailments(scenario: Scenario) -> list[Diagnostic]:
    return Evaluator(scenario).check_entailments()


def derive_status(attribution: Attribution, scenario: Scenario) -> Status:
    return Evaluator(scenario).status_of(attribution).overall
