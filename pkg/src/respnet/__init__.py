"""respnet: a workbench for modelling responsibility networks around AI incidents.

Parse a .resp scenario, derive causal responsibility with the NESS test,
evaluate role, liability, and moral responsibility claims under
three-valued evidence, flag unjust-attribution patterns, and compile the
network to DOT.
"""

from .analysis import (
    AnalysisReport,
    ClaimResult,
    detect_crumple_zones,
    detect_liability_sinks,
    detect_responsibility_gaps,
    detect_uncovered_machine_occurrences,
    explain,
    layered_analysis,
)
from .causal import (
    CausalError,
    CausalModel,
    Literal,
    NessVerdict,
    but_for,
    derive_causal_edges,
    evaluate,
    is_sufficient,
    ness_cause,
)
from .diagnostics import Diagnostic, Severity, SourceSpan
from .dsl import parse, serialize
from .model import (
    Actor,
    ActorKind,
    Attribution,
    ConditionFact,
    Mode,
    Occurrence,
    OccurrenceKind,
    Scenario,
    Sense,
    Status,
    Value,
    build_scenario,
    validate_attribution,
    validate_producer,
)
from .render import RenderOptions, to_dot
from .rules import (
    ConditionLedger,
    Evaluator,
    LedgerEntry,
    check_entailments,
    derive_status,
)

__version__ = "0.1.0"
