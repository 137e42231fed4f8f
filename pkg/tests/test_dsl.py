"""Parser, diagnostics, recovery, and canonical serialization."""

import random

from respnet import dsl
from respnet.model import (
    ActorKind,
    Mode,
    OccurrenceKind,
    Scenario,
    Sense,
    Value,
    build_scenario,
)

from conftest import build_text
from genscen import random_scenario


class TestParseStatements:
    def test_actor(self):
        declarations, diagnostics = dsl.parse('actor op kind human "Remote Operator"')
        assert diagnostics == []
        (decl,) = declarations
        assert (decl.id, decl.kind, decl.label) == ("op", ActorKind.HUMAN, "Remote Operator")

    def test_occurrence_with_producer(self):
        declarations, diagnostics = dsl.parse(
            'occurrence o2 kind omission by op "fails to send control signal"'
        )
        assert diagnostics == []
        (decl,) = declarations
        assert decl.kind is OccurrenceKind.OMISSION
        assert decl.producer == "op"
        assert decl.harm is False

    def test_harm_flag(self):
        declarations, _ = dsl.parse('occurrence c kind consequence "the harm" harm')
        assert declarations[0].harm is True

    def test_causes_and_note(self):
        declarations, diagnostics = dsl.parse('causes a -> b\nnote a "context"')
        assert diagnostics == []
        assert declarations[0].source == "a" and declarations[0].target == "b"
        assert declarations[1].text == "context"

    def test_senses(self):
        source = "\n".join(
            [
                "claim causal a for b",
                "claim role(task) a for b",
                "claim role(legal_duty:statutory) a for b",
                "claim liability(civil:negligence) a for b",
                "claim liability(criminal) a for b",
                "claim moral(attributability) a for b",
            ]
        )
        declarations, diagnostics = dsl.parse(source)
        assert diagnostics == []
        assert [d.sense.text for d in declarations] == [
            "causal",
            "role(task)",
            "role(legal_duty:statutory)",
            "liability(civil:negligence)",
            "liability(criminal)",
            "moral(attributability)",
        ]
        assert all(d.mode is Mode.CLAIMED for d in declarations)

    def test_fact(self):
        declarations, diagnostics = dsl.parse("fact control(op, o2) = unmet")
        assert diagnostics == []
        decl = declarations[0]
        assert (decl.condition, decl.subject, decl.occurrence, decl.value) == (
            "control",
            "op",
            "o2",
            Value.UNMET,
        )

    def test_model_block(self):
        source = """
model {
  exogenous a, b
  context a = true, b = false
  equation c = a & !b | (a & a)
  bind c -> o1
}
"""
        declarations, diagnostics = dsl.parse(source)
        assert diagnostics == []
        decl = declarations[0]
        assert decl.exogenous == ("a", "b")
        assert decl.context == (("a", True), ("b", False))
        assert decl.bindings == (("c", "o1"),)
        assert decl.equations[0][1].text() == "a & !b | a & a"

    def test_comments_and_semicolons(self):
        declarations, diagnostics = dsl.parse(
            "# respnet 1\nactor a kind human; actor b kind institution # tail\n"
        )
        assert diagnostics == []
        assert len(declarations) == 2

    def test_crlf_accepted(self):
        declarations, diagnostics = dsl.parse("actor a kind human\r\nactor b kind human\r\n")
        assert diagnostics == []
        assert len(declarations) == 2


class TestDiagnostics:
    def test_misspelled_condition_names_closed_set(self):
        _, diagnostics = dsl.parse("fact contrl(op, o2) = unmet")
        (diagnostic,) = diagnostics
        assert diagnostic.code == "E_SYN"
        assert "contrl" in diagnostic.message
        assert "control" in diagnostic.message  # lists the closed set

    def test_bad_token_is_lex_error(self):
        _, diagnostics = dsl.parse("actor Op kind human")
        assert any(d.code == "E_LEX" for d in diagnostics)

    def test_unterminated_string(self):
        _, diagnostics = dsl.parse('actor a kind human "oops')
        assert any(d.code == "E_LEX" for d in diagnostics)

    def test_recovery_yields_one_diagnostic_per_bad_statement(self):
        source = "\n".join(
            [
                "actor a kind human",
                "occurrence kind broken",
                "causes a ->",
                "fact misnamed(a, b) = met",
                "actor b kind institution",
            ]
        )
        declarations, diagnostics = dsl.parse(source)
        assert len(diagnostics) >= 3
        kinds = [type(d).__name__ for d in declarations]
        assert kinds.count("ActorDecl") == 2

    def test_span_points_at_offending_token(self):
        source = "actor a kind robot"
        _, diagnostics = dsl.parse(source, file="f.resp")
        (diagnostic,) = diagnostics
        assert diagnostic.span.file == "f.resp"
        assert diagnostic.span.line == 1
        assert diagnostic.span.column == source.index("robot") + 1
        assert diagnostic.span.length == len("robot")

    def test_unterminated_model_block(self):
        _, diagnostics = dsl.parse("model {\n  exogenous a\n")
        assert any("unterminated model block" in d.message for d in diagnostics)

    def test_error_inside_model_block_recovers(self):
        source = """
model {
  exogenous a
  equation = broken
  context a = true
}
actor ok kind human
"""
        declarations, diagnostics = dsl.parse(source)
        assert any(d.code == "E_SYN" for d in diagnostics)
        assert any(type(d).__name__ == "ActorDecl" for d in declarations)


class TestSerialize:
    def test_empty_scenario_serializes_to_empty_text(self):
        assert dsl.serialize(Scenario()) == ""

    def test_header_present(self, maritime_scenario):
        assert dsl.serialize(maritime_scenario).startswith("# respnet 1\n")

    def test_deterministic(self, maritime_scenario):
        assert dsl.serialize(maritime_scenario) == dsl.serialize(maritime_scenario)

    def test_round_trip_fixture(self, maritime_scenario):
        text = dsl.serialize(maritime_scenario)
        declarations, diagnostics = dsl.parse(text)
        assert diagnostics == []
        rebuilt, errors = build_scenario(declarations)
        assert errors == []
        assert rebuilt == maritime_scenario

    def test_serialize_idempotent_on_fixture(self, maritime_scenario):
        once = dsl.serialize(maritime_scenario)
        declarations, _ = dsl.parse(once)
        rebuilt, _ = build_scenario(declarations)
        assert dsl.serialize(rebuilt) == once

    def test_round_trip_fuzzed(self):
        rng = random.Random(777)
        for _ in range(100):
            scenario = random_scenario(rng)
            text = dsl.serialize(scenario)
            declarations, diagnostics = dsl.parse(text)
            assert diagnostics == [], text
            rebuilt, errors = build_scenario(declarations)
            assert errors == [], text
            assert rebuilt == scenario

    def test_string_escapes_round_trip(self):
        scenario, diagnostics = build_text(
            'actor a kind human "line\\nbreak \\"quoted\\" back\\\\slash"\n'
        )
        assert diagnostics == []
        assert scenario.actors[0].label == 'line\nbreak "quoted" back\\slash'
        text = dsl.serialize(scenario)
        declarations, _ = dsl.parse(text)
        rebuilt, _ = build_scenario(declarations)
        assert rebuilt == scenario


class TestParseSenseText:
    def test_ok(self):
        assert dsl.parse_sense_text("moral(attributability)") == Sense("moral", "attributability")
        assert dsl.parse_sense_text("role(legal_duty:contractual)").qualifier == "contractual"

    def test_trailing_garbage(self):
        import pytest

        with pytest.raises(ValueError):
            dsl.parse_sense_text("causal nonsense")
