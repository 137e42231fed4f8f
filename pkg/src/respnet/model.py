"""Domain types for responsibility networks and the attribution validity rules.

Three actor kinds, seven occurrence kinds, four senses of responsibility.
AI systems can hold tasks but no duties, no liability, and no moral
responsibility; liability attaches to consequences only.  Those rules live
in one validity matrix so that every layer of the tool enforces the same
constraints.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from functools import cached_property

from .causal import CausalError, CausalModel, Expr
from .diagnostics import Diagnostic, Severity, SourceSpan


class ActorKind(enum.Enum):
    AI_SYSTEM = "ai_system"
    HUMAN = "human"
    INSTITUTION = "institution"

    def __str__(self) -> str:
        return self.value


class OccurrenceKind(enum.Enum):
    MACHINE_DECISION = "machine_decision"
    MACHINE_ACTION = "machine_action"
    MACHINE_OMISSION = "machine_omission"
    DECISION = "decision"
    ACTION = "action"
    OMISSION = "omission"
    CONSEQUENCE = "consequence"

    def __str__(self) -> str:
        return self.value

    @property
    def is_machine(self) -> bool:
        return self.value.startswith("machine_")

    @property
    def display(self) -> str:
        """Figure-style label: machine kinds carry a trailing star."""
        if self.is_machine:
            return self.value.removeprefix("machine_").capitalize() + "*"
        return self.value.capitalize()


class Mode(enum.Enum):
    ASSERTED = "asserted"
    CLAIMED = "claimed"

    def __str__(self) -> str:
        return self.value


class Status(enum.IntEnum):
    """Derived attribution statuses, ordered from worst to best."""

    BLOCKED = 0
    UNSUPPORTED = 1
    OPEN = 2
    SUPPORTED = 3

    def __str__(self) -> str:
        return self.name.lower()


class Value(enum.IntEnum):
    """Three-valued evidence for a condition, ordered unmet < unknown < met."""

    UNMET = 0
    UNKNOWN = 1
    MET = 2

    def __str__(self) -> str:
        return self.name.lower()


SENSE_KINDS = ("causal", "role", "liability", "moral")
ROLE_SUBKINDS = ("task", "moral_duty", "legal_duty")
LEGAL_DUTY_BASES = ("duty_of_care", "absolute", "contractual", "statutory")
LIABILITY_SUBKINDS = ("criminal", "civil")
CIVIL_BRANCHES = ("negligence", "product", "vicarious", "contract")
MORAL_SUBKINDS = ("attributability", "accountability")

# Subkind-level keys used by the validity matrix; legal-duty bases and civil
# branches are labels, not separate cells.
SENSE_KEYS = (
    "causal",
    "task",
    "moral_duty",
    "legal_duty",
    "criminal",
    "civil",
    "attributability",
    "accountability",
)

CONDITION_NAMES = frozenset(
    {
        "control",
        "knowledge",
        "moral_shortfall",
        "duty_owed",
        "breach",
        "breach_caused_harm",
        "harm_in_scope",
        "basis_established",
        "actus_reus",
        "mens_rea",
        "clearly_stated",
        "context_appropriate",
        "achievable",
        "no_conflict",
    }
)


@dataclass(frozen=True)
class Sense:
    """A sense of responsibility: causal, role, liability, or moral.

    subkind is required for every kind except causal; qualifier carries a
    legal-duty basis or a civil branch when one was given.
    """

    kind: str
    subkind: str | None = None
    qualifier: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in SENSE_KINDS:
            raise ValueError(f"unknown sense kind {self.kind!r}")
        if self.kind == "causal":
            if self.subkind is not None or self.qualifier is not None:
                raise ValueError("causal sense takes no subkind")
            return
        allowed = {
            "role": ROLE_SUBKINDS,
            "liability": LIABILITY_SUBKINDS,
            "moral": MORAL_SUBKINDS,
        }[self.kind]
        if self.subkind not in allowed:
            raise ValueError(f"sense {self.kind} requires a subkind from {allowed}")
        if self.qualifier is not None:
            if self.subkind == "legal_duty":
                if self.qualifier not in LEGAL_DUTY_BASES:
                    raise ValueError(f"unknown legal-duty basis {self.qualifier!r}")
            elif self.subkind == "civil":
                if self.qualifier not in CIVIL_BRANCHES:
                    raise ValueError(f"unknown civil branch {self.qualifier!r}")
            else:
                raise ValueError(f"subkind {self.subkind} takes no qualifier")

    @property
    def key(self) -> str:
        """Matrix cell key: the subkind, or 'causal'."""
        return self.subkind if self.subkind is not None else "causal"

    @property
    def text(self) -> str:
        if self.kind == "causal":
            return "causal"
        if self.qualifier is not None:
            return f"{self.kind}({self.subkind}:{self.qualifier})"
        return f"{self.kind}({self.subkind})"

    def __str__(self) -> str:
        return self.text


CAUSAL = Sense("causal")

# Sentinel subject kind for occurrence-subject attributions.
OCCURRENCE_SUBJECT = "occurrence"

# Matrix: sense key -> actor kinds for which the cell is valid.
_VALID_CELLS: dict[str, frozenset[ActorKind]] = {
    "causal": frozenset(ActorKind),
    "task": frozenset(ActorKind),
    "moral_duty": frozenset({ActorKind.HUMAN, ActorKind.INSTITUTION}),
    "legal_duty": frozenset({ActorKind.HUMAN, ActorKind.INSTITUTION}),
    "criminal": frozenset({ActorKind.HUMAN, ActorKind.INSTITUTION}),
    "civil": frozenset({ActorKind.HUMAN, ActorKind.INSTITUTION}),
    "attributability": frozenset({ActorKind.HUMAN, ActorKind.INSTITUTION}),
    "accountability": frozenset({ActorKind.HUMAN, ActorKind.INSTITUTION}),
}

_AI_REASONS = {
    "moral_duty": "AI_NO_DUTY",
    "legal_duty": "AI_NO_DUTY",
    "criminal": "AI_NO_LIABILITY",
    "civil": "AI_NO_LIABILITY",
    "attributability": "AI_NO_MORAL",
    "accountability": "AI_NO_MORAL",
}


@dataclass(frozen=True)
class Verdict:
    valid: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.valid


VALID = Verdict(True)


def is_valid_cell(actor_kind: ActorKind, sense_key: str) -> bool:
    """Validity of the (actor kind, sense subkind) matrix cell."""
    return actor_kind in _VALID_CELLS[sense_key]


def validate_attribution(
    subject_kind: ActorKind | str,
    sense: Sense,
    occurrence_kind: OccurrenceKind,
) -> Verdict:
    """Check whether subject_kind may bear sense for occurrence_kind.

    subject_kind is an ActorKind, or OCCURRENCE_SUBJECT for an
    occurrence-as-subject attribution (legal only in the causal sense).
    Total: never raises on well-formed senses.
    """
    if subject_kind == OCCURRENCE_SUBJECT:
        if sense.kind != "causal":
            return Verdict(False, "OCCURRENCE_SUBJECT_NOT_CAUSAL")
        return VALID
    assert isinstance(subject_kind, ActorKind)
    if not is_valid_cell(subject_kind, sense.key):
        return Verdict(False, _AI_REASONS[sense.key])
    if sense.kind == "liability" and occurrence_kind is not OccurrenceKind.CONSEQUENCE:
        return Verdict(False, "LIABILITY_NEEDS_CONSEQUENCE")
    return VALID


def validate_producer(
    occurrence_kind: OccurrenceKind, producer_kind: ActorKind
) -> Verdict:
    """Machine kinds take AI producers, plain kinds take human or institutional
    ones, and consequences are outcomes that take no producer at all."""
    if occurrence_kind is OccurrenceKind.CONSEQUENCE:
        return Verdict(False, "CONSEQUENCE_HAS_NO_PRODUCER")
    if occurrence_kind.is_machine:
        if producer_kind is not ActorKind.AI_SYSTEM:
            return Verdict(False, "MACHINE_OCCURRENCE_NEEDS_AI")
        return VALID
    if producer_kind is ActorKind.AI_SYSTEM:
        return Verdict(False, "PLAIN_OCCURRENCE_NEEDS_PERSON")
    return VALID


# ---------------------------------------------------------------------------
# Scenario entities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Actor:
    id: str
    kind: ActorKind
    label: str = ""
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Occurrence:
    id: str
    kind: OccurrenceKind
    label: str = ""
    producer: str | None = None
    harm: bool = False
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Attribution:
    subject: str
    occurrence: str
    sense: Sense
    mode: Mode
    span: SourceSpan | None = field(default=None, compare=False)

    def sort_key(self) -> tuple:
        return (self.subject, self.occurrence, self.sense.text, self.mode.value)


@dataclass(frozen=True)
class ConditionFact:
    """Three-valued evidence for a named condition of a (subject, occurrence) pair."""

    subject: str
    occurrence: str
    condition: str
    value: Value
    span: SourceSpan | None = field(default=None, compare=False)

    def sort_key(self) -> tuple:
        return (self.subject, self.occurrence, self.condition)


@dataclass(frozen=True)
class CausalLink:
    """A declared `causes` edge; source may be an actor or an occurrence."""

    source: str
    target: str
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Note:
    id: str
    text: str
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Scenario:
    """Immutable root aggregate; content is canonically sorted at build time."""

    actors: tuple[Actor, ...] = ()
    occurrences: tuple[Occurrence, ...] = ()
    edges: tuple[CausalLink, ...] = ()
    model: CausalModel | None = None
    attributions: tuple[Attribution, ...] = ()
    facts: tuple[ConditionFact, ...] = ()
    notes: tuple[Note, ...] = ()

    @cached_property
    def actor_map(self) -> dict[str, Actor]:
        return {a.id: a for a in self.actors}

    @cached_property
    def occurrence_map(self) -> dict[str, Occurrence]:
        return {o.id: o for o in self.occurrences}

    @cached_property
    def fact_map(self) -> dict[tuple[str, str, str], Value]:
        return {(f.subject, f.occurrence, f.condition): f.value for f in self.facts}

    def fact(self, subject: str, occurrence: str, condition: str) -> Value:
        """Declared value, or UNKNOWN when no fact was stated."""
        return self.fact_map.get((subject, occurrence, condition), Value.UNKNOWN)

    def produced_by(self, actor_id: str) -> tuple[Occurrence, ...]:
        return tuple(o for o in self.occurrences if o.producer == actor_id)

    @property
    def is_empty(self) -> bool:
        return not (
            self.actors
            or self.occurrences
            or self.edges
            or self.model is not None
            or self.attributions
            or self.facts
            or self.notes
        )

    def with_facts(self, facts: tuple[ConditionFact, ...]) -> "Scenario":
        return replace(self, facts=tuple(sorted(facts, key=ConditionFact.sort_key)))


# ---------------------------------------------------------------------------
# Declarations (produced by the DSL parser or constructed programmatically)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActorDecl:
    id: str
    kind: ActorKind
    label: str = ""
    span: SourceSpan | None = None


@dataclass(frozen=True)
class OccurrenceDecl:
    id: str
    kind: OccurrenceKind
    label: str = ""
    producer: str | None = None
    harm: bool = False
    span: SourceSpan | None = None


@dataclass(frozen=True)
class CausesDecl:
    source: str
    target: str
    span: SourceSpan | None = None


@dataclass(frozen=True)
class ModelDecl:
    """One `model { ... }` block; several blocks merge at build time."""

    exogenous: tuple[str, ...] = ()
    equations: tuple[tuple[str, Expr], ...] = ()
    context: tuple[tuple[str, bool], ...] = ()
    bindings: tuple[tuple[str, str], ...] = ()
    span: SourceSpan | None = None


@dataclass(frozen=True)
class AttributionDecl:
    sense: Sense
    subject: str
    occurrence: str
    mode: Mode
    span: SourceSpan | None = None


@dataclass(frozen=True)
class FactDecl:
    condition: str
    subject: str
    occurrence: str
    value: Value
    span: SourceSpan | None = None


@dataclass(frozen=True)
class NoteDecl:
    id: str
    text: str
    span: SourceSpan | None = None


Declaration = (
    ActorDecl
    | OccurrenceDecl
    | CausesDecl
    | ModelDecl
    | AttributionDecl
    | FactDecl
    | NoteDecl
)


def build_scenario(
    declarations: list[Declaration] | tuple[Declaration, ...],
) -> tuple[Scenario | None, list[Diagnostic]]:
    """Resolve and validate declarations into an immutable Scenario.

    All violations are collected rather than failing fast; the scenario is
    returned only when no errors were found.  Asserted attributions the
    validity matrix rejects are errors (E001/E002); claimed ones are
    admitted and later derive the blocked status.
    """
    errors: list[Diagnostic] = []

    def err(code: str, message: str, span: SourceSpan | None, *subjects: str) -> None:
        errors.append(Diagnostic(Severity.ERROR, code, message, tuple(subjects), span))

    actors: dict[str, Actor] = {}
    occurrences: dict[str, Occurrence] = {}
    seen_ids: dict[str, SourceSpan | None] = {}

    for decl in declarations:
        if isinstance(decl, (ActorDecl, OccurrenceDecl)):
            if decl.id in seen_ids:
                err("E_DUP_ID", f"duplicate identifier {decl.id!r}", decl.span, decl.id)
                continue
            seen_ids[decl.id] = decl.span
            if isinstance(decl, ActorDecl):
                actors[decl.id] = Actor(decl.id, decl.kind, decl.label, decl.span)
            else:
                occurrences[decl.id] = Occurrence(
                    decl.id, decl.kind, decl.label, decl.producer, decl.harm, decl.span
                )

    for occ in occurrences.values():
        if occ.producer is not None:
            producer = actors.get(occ.producer)
            if producer is None:
                err(
                    "E_UNRESOLVED",
                    f"occurrence {occ.id!r} names unknown producer {occ.producer!r}",
                    occ.span,
                    occ.id,
                )
            else:
                verdict = validate_producer(occ.kind, producer.kind)
                if not verdict:
                    err(
                        "E_BAD_PRODUCER",
                        f"occurrence {occ.id!r} of kind {occ.kind} cannot be produced "
                        f"by {occ.producer!r} of kind {producer.kind} ({verdict.reason})",
                        occ.span,
                        occ.id,
                        occ.producer,
                    )
        if occ.harm and occ.kind is not OccurrenceKind.CONSEQUENCE:
            err(
                "E_BAD_HARM",
                f"occurrence {occ.id!r} of kind {occ.kind} cannot carry the harm flag",
                occ.span,
                occ.id,
            )

    edges: list[CausalLink] = []
    edge_keys: set[tuple[str, str]] = set()
    for decl in declarations:
        if not isinstance(decl, CausesDecl):
            continue
        if decl.source not in actors and decl.source not in occurrences:
            err(
                "E_UNRESOLVED",
                f"causes statement names unknown source {decl.source!r}",
                decl.span,
                decl.source,
            )
            continue
        if decl.target not in occurrences:
            err(
                "E_UNRESOLVED",
                f"causes statement target {decl.target!r} is not an occurrence",
                decl.span,
                decl.target,
            )
            continue
        key = (decl.source, decl.target)
        if key not in edge_keys:
            edge_keys.add(key)
            edges.append(CausalLink(decl.source, decl.target, decl.span))

    attributions: list[Attribution] = []
    attr_keys: set[tuple] = set()
    for decl in declarations:
        if not isinstance(decl, AttributionDecl):
            continue
        subject_kind: ActorKind | str | None
        if decl.subject in actors:
            subject_kind = actors[decl.subject].kind
        elif decl.subject in occurrences:
            subject_kind = OCCURRENCE_SUBJECT
        else:
            subject_kind = None
            err(
                "E_UNRESOLVED",
                f"attribution names unknown subject {decl.subject!r}",
                decl.span,
                decl.subject,
            )
        occurrence = occurrences.get(decl.occurrence)
        if occurrence is None:
            err(
                "E_UNRESOLVED",
                f"attribution names unknown occurrence {decl.occurrence!r}",
                decl.span,
                decl.occurrence,
            )
        if subject_kind is None or occurrence is None:
            continue
        if decl.mode is Mode.ASSERTED:
            verdict = validate_attribution(subject_kind, decl.sense, occurrence.kind)
            if not verdict:
                code = "E002" if verdict.reason == "LIABILITY_NEEDS_CONSEQUENCE" else "E001"
                err(
                    code,
                    f"invalid attribution: {decl.subject!r} cannot bear "
                    f"{decl.sense.text} for {decl.occurrence!r} ({verdict.reason})",
                    decl.span,
                    decl.subject,
                    decl.occurrence,
                )
                continue
        attribution = Attribution(
            decl.subject, decl.occurrence, decl.sense, decl.mode, decl.span
        )
        key = attribution.sort_key()
        if key not in attr_keys:
            attr_keys.add(key)
            attributions.append(attribution)

    facts: list[ConditionFact] = []
    fact_keys: set[tuple[str, str, str]] = set()
    for decl in declarations:
        if not isinstance(decl, FactDecl):
            continue
        for ref in (decl.subject, decl.occurrence):
            if ref not in actors and ref not in occurrences:
                err(
                    "E_UNRESOLVED",
                    f"fact names unknown reference {ref!r}",
                    decl.span,
                    ref,
                )
                break
        else:
            key = (decl.subject, decl.occurrence, decl.condition)
            if key in fact_keys:
                err(
                    "E_DUP_ID",
                    f"duplicate fact {decl.condition}({decl.subject}, {decl.occurrence})",
                    decl.span,
                    decl.subject,
                )
            else:
                fact_keys.add(key)
                facts.append(
                    ConditionFact(
                        decl.subject, decl.occurrence, decl.condition, decl.value, decl.span
                    )
                )

    notes: list[Note] = []
    for decl in declarations:
        if not isinstance(decl, NoteDecl):
            continue
        if decl.id not in actors and decl.id not in occurrences:
            err(
                "E_UNRESOLVED",
                f"note names unknown reference {decl.id!r}",
                decl.span,
                decl.id,
            )
        else:
            notes.append(Note(decl.id, decl.text, decl.span))

    model = _merge_model_decls(
        [d for d in declarations if isinstance(d, ModelDecl)], occurrences, err
    )

    if errors:
        return None, errors

    scenario = Scenario(
        actors=tuple(sorted(actors.values(), key=lambda a: a.id)),
        occurrences=tuple(sorted(occurrences.values(), key=lambda o: o.id)),
        edges=tuple(sorted(edges, key=lambda e: (e.source, e.target))),
        model=model,
        attributions=tuple(sorted(attributions, key=Attribution.sort_key)),
        facts=tuple(sorted(facts, key=ConditionFact.sort_key)),
        notes=tuple(sorted(notes, key=lambda n: (n.id, n.text))),
    )
    return scenario, []


def _merge_model_decls(decls, occurrences, err) -> CausalModel | None:
    if not decls:
        return None
    span = decls[0].span
    exogenous: list[str] = []
    equations: list[tuple[str, Expr]] = []
    context: list[tuple[str, bool]] = []
    bindings: list[tuple[str, str]] = []
    for decl in decls:
        exogenous.extend(decl.exogenous)
        equations.extend(decl.equations)
        context.extend(decl.context)
        bindings.extend(decl.bindings)

    declared: set[str] = set()
    for name in exogenous + [name for name, _ in equations]:
        if name in declared:
            err("E_DUP_ID", f"model variable {name!r} defined twice", span, name)
        declared.add(name)
    exo_set = set(exogenous)
    for name, _ in context:
        if name not in exo_set:
            kind = "endogenous" if name in declared else "unknown"
            err("E_MODEL", f"context assigns {kind} variable {name!r}", span, name)
    context_vars = {name for name, _ in context}
    for name in exogenous:
        if name not in context_vars:
            err("E_MODEL", f"exogenous variable {name!r} has no context value", span, name)

    bound_vars: set[str] = set()
    bound_occs: set[str] = set()
    for var, occ in bindings:
        if var not in declared:
            err("E_UNKNOWN_VAR", f"binding for unknown variable {var!r}", span, var)
        if occ not in occurrences:
            err("E_UNRESOLVED", f"binding targets unknown occurrence {occ!r}", span, occ)
        if var in bound_vars or occ in bound_occs:
            err("E_DUP_ID", f"binding {var!r} -> {occ!r} is not injective", span, var)
        bound_vars.add(var)
        bound_occs.add(occ)

    model = CausalModel(
        exogenous=tuple(sorted(set(exogenous))),
        equations=tuple(sorted(equations, key=lambda pair: pair[0])),
        context=tuple(sorted(context)),
        bindings=tuple(sorted(bindings)),
    )
    try:
        model.check()
    except CausalError as exc:
        err(exc.code, exc.message, span)
        return None
    return model
