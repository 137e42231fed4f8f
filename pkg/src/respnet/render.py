"""Deterministic DOT compilation of a scenario plus its analysis report.

Notation: actor nodes are shaped by kind (ai_system: component, human:
ellipse, institution: hexagon), occurrences are boxes labeled "Kind:
label" with machine kinds carrying a trailing star.  Each sense draws in
its own colour; solid lines are asserted or supported relations, dashed
ones are open candidates, dotted ones unsupported.  Blocked claims are
left out of the drawing and listed in the legend.  Emission order is
sorted, so output is byte-identical across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import AnalysisReport
from .model import ActorKind, Mode, Scenario, Status

SENSE_LABELS = {
    "causal": "causally responsible for",
    "role": "role-responsibility",
    "liability": "liable for",
    "moral": "morally responsible for",
}

SENSE_COLORS = {
    "causal": "#444444",
    "role": "#1f6fb4",
    "liability": "#c03028",
    "moral": "#2a7d46",
}

ACTOR_SHAPES = {
    ActorKind.AI_SYSTEM: "component",
    ActorKind.HUMAN: "ellipse",
    ActorKind.INSTITUTION: "hexagon",
}

_SENSE_ORDER = {"causal": 0, "role": 1, "liability": 2, "moral": 3}


class RenderError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass(frozen=True)
class RenderOptions:
    senses: frozenset[str] = frozenset(SENSE_LABELS)
    include_candidates: bool = True
    legend: bool = True

    def __post_init__(self) -> None:
        if not self.senses:
            raise ValueError("senses must be non-empty")
        unknown = self.senses - set(SENSE_LABELS)
        if unknown:
            raise ValueError(f"unknown senses: {sorted(unknown)}")


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def _quote(text: str) -> str:
    return f'"{_escape(text)}"'


def _edge_style(mode: Mode, status: Status) -> str:
    if status is Status.UNSUPPORTED:
        return "dotted"
    if mode is Mode.ASSERTED or status is Status.SUPPORTED:
        return "solid"
    return "dashed"


def _causal_drawn_edges(scenario: Scenario, report: AnalysisReport) -> list[tuple[str, str]]:
    """Declared edges, production links, and the transitive reduction of the
    derived occurrence edges (the NESS closure would bury the chain)."""
    occ_ids = set(scenario.occurrence_map)
    occ_edges = {
        (e.source, e.target): e.origin
        for e in report.edges
        if e.source in occ_ids and e.target in occ_ids
    }
    children: dict[str, set[str]] = {}
    for source, target in occ_edges:
        children.setdefault(source, set()).add(target)

    def has_indirect_path(source: str, target: str) -> bool:
        stack = [child for child in children.get(source, ()) if child != target]
        seen = set(stack)
        while stack:
            node = stack.pop()
            if target in children.get(node, ()):
                return True
            for child in children.get(node, ()):
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return False

    drawn: list[tuple[str, str]] = []
    for (source, target), origin in occ_edges.items():
        if origin == "declared" or not has_indirect_path(source, target):
            drawn.append((source, target))
    for edge in report.edges:
        if edge.source in scenario.actor_map and edge.origin == "declared":
            drawn.append((edge.source, edge.target))
    for occ in scenario.occurrences:
        if occ.producer is not None:
            drawn.append((occ.producer, occ.id))
    return sorted(set(drawn))


def to_dot(
    scenario: Scenario,
    report: AnalysisReport,
    options: RenderOptions | None = None,
) -> str:
    """Compile the scenario and report into DOT text."""
    options = options or RenderOptions()
    scenario_ids = frozenset(scenario.actor_map) | frozenset(scenario.occurrence_map)
    if scenario_ids != report.ids:
        raise RenderError(
            "E_MISMATCH", "report was produced from a different scenario"
        )

    lines = ["digraph respnet {"]
    if scenario.is_empty:
        lines.append("}")
        return "\n".join(lines) + "\n"
    lines.append("  rankdir=LR;")

    entities = sorted(
        [(a.id, "actor") for a in scenario.actors]
        + [(o.id, "occurrence") for o in scenario.occurrences]
    )
    for entity_id, entity_kind in entities:
        if entity_kind == "actor":
            actor = scenario.actor_map[entity_id]
            label = actor.label or actor.id
            shape = ACTOR_SHAPES[actor.kind]
            lines.append(f"  {_quote(entity_id)} [shape={shape} label={_quote(label)}];")
        else:
            occ = scenario.occurrence_map[entity_id]
            label = f"{occ.kind.display}: {occ.label}" if occ.label else occ.kind.display
            attrs = f"shape=box label={_quote(label)}"
            if occ.harm:
                attrs += " penwidth=2"
            lines.append(f"  {_quote(entity_id)} [{attrs}];")

    if "causal" in options.senses:
        color = SENSE_COLORS["causal"]
        label = SENSE_LABELS["causal"]
        for source, target in _causal_drawn_edges(scenario, report):
            lines.append(
                f"  {_quote(source)} -> {_quote(target)} "
                f'[label={_quote(label)} color="{color}" style=solid];'
            )

    blocked: list[str] = []
    drawn_claims = sorted(
        report.claims,
        key=lambda r: (
            r.attribution.subject,
            r.attribution.occurrence,
            _SENSE_ORDER[r.attribution.sense.kind],
            r.attribution.sense.text,
            r.attribution.mode.value,
        ),
    )
    for result in drawn_claims:
        attribution = result.attribution
        if attribution.sense.kind not in options.senses:
            continue
        if result.status is Status.BLOCKED:
            blocked.append(
                f"blocked: {attribution.subject} {attribution.sense.text} "
                f"{attribution.occurrence} ({result.ledger.blocked_reason})"
            )
            continue
        if not options.include_candidates and attribution.mode is Mode.CLAIMED:
            continue
        sense_kind = attribution.sense.kind
        style = _edge_style(attribution.mode, result.status)
        lines.append(
            f"  {_quote(attribution.subject)} -> {_quote(attribution.occurrence)} "
            f"[label={_quote(SENSE_LABELS[sense_kind])} "
            f'color="{SENSE_COLORS[sense_kind]}" style={style}];'
        )

    if options.legend:
        legend_lines = [
            "Legend",
            "actor shapes: ai_system=component, human=ellipse, institution=hexagon",
            "occurrences: boxes; machine kinds starred; harms drawn bold",
            "line colours: causal=grey, role=blue, liability=red, moral=green",
            "line styles: solid=asserted/supported, dashed=candidate/open, dotted=unsupported",
        ]
        legend_lines.extend(blocked)
        legend_text = "".join(part + "\\l" for part in legend_lines)
        lines.append(f'  label="{_escape_legend(legend_text)}";')
        lines.append("  labelloc=b;")

    lines.append("}")
    return "\n".join(lines) + "\n"


def _escape_legend(text: str) -> str:
    # the \l line separators are already escape sequences; quote the rest
    return text.replace('"', '\\"')


# ---------------------------------------------------------------------------
# Minimal DOT well-formedness checking (used by the test suite)
# ---------------------------------------------------------------------------

def check_dot(text: str) -> list[str]:
    """Validate a digraph against a minimal DOT grammar; returns problems."""
    problems: list[str] = []
    tokens = _tokenize_dot(text, problems)
    if problems:
        return problems
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str | None:
        nonlocal pos
        token = peek()
        pos += 1
        return token

    if take() != "digraph":
        return ["expected 'digraph'"]
    if peek() not in ("{",):
        take()  # graph name
    if take() != "{":
        return ["expected '{'"]
    depth = 1
    while True:
        token = take()
        if token is None:
            problems.append("unterminated digraph body")
            break
        if token == "{":
            depth += 1
            continue
        if token == "}":
            depth -= 1
            if depth == 0:
                break
            continue
        if token == ";":
            continue
        if not _is_dot_value(token):
            problems.append(f"unexpected token {token!r}")
            break
        # statement: value (= value | (-> value)+) [attr list]
        if peek() == "=":
            take()
            value = take()
            if value is None or not _is_dot_value(value):
                problems.append("malformed attribute statement")
                break
            continue
        while peek() == "->":
            take()
            value = take()
            if value is None or not _is_dot_value(value):
                problems.append("malformed edge statement")
                return problems
        if peek() == "[":
            take()
            while peek() not in ("]", None):
                name = take()
                if not _is_dot_value(name):
                    problems.append(f"malformed attribute name {name!r}")
                    return problems
                if peek() == "=":
                    take()
                    value = take()
                    if value is None or not _is_dot_value(value):
                        problems.append("malformed attribute value")
                        return problems
                if peek() == ",":
                    take()
            if take() != "]":
                problems.append("unterminated attribute list")
                break
    if not problems and pos < len(tokens):
        problems.append("trailing tokens after digraph")
    return problems


def _is_dot_value(token: str) -> bool:
    if token.startswith('"'):
        return token.endswith('"') and len(token) >= 2
    return token not in ("{", "}", "[", "]", "=", "->", ";", ",")


def _tokenize_dot(text: str, problems: list[str]) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < len(text):
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == '"':
                    break
                j += 1
            if j >= len(text):
                problems.append("unterminated quoted string")
                return tokens
            tokens.append(text[i : j + 1])
            i = j + 1
            continue
        if ch == "-" and text[i : i + 2] == "->":
            tokens.append("->")
            i += 2
            continue
        if ch in "{}[]=;,":
            tokens.append(ch)
            i += 1
            continue
        j = i
        while j < len(text) and not text[j].isspace() and text[j] not in '{}[]=;,"' and text[j : j + 2] != "->":
            j += 1
        if j == i:
            problems.append(f"bad character {ch!r}")
            return tokens
        tokens.append(text[i:j])
        i = j
    return tokens
