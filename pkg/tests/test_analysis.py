"""Layered analysis, the four detectors, and ledger explanations."""

import random

from respnet import dsl
from respnet.analysis import (
    detect_crumple_zones,
    detect_liability_sinks,
    detect_responsibility_gaps,
    detect_uncovered_machine_occurrences,
    explain,
    layered_analysis,
)
from respnet.model import (
    ActorKind,
    OccurrenceKind,
    Scenario,
    Sense,
    Status,
    Value,
    build_scenario,
)

from conftest import build_text
from genscen import random_scenario


def analyze_text(text: str):
    declarations, diagnostics = dsl.parse(text)
    assert diagnostics == []
    scenario, errors = build_scenario(declarations)
    assert errors == [], errors
    return scenario, layered_analysis(scenario)


def codes(report):
    return [d.code for d in report.diagnostics]


def claim_status(report, subject, occurrence, sense_text):
    for result in report.claims:
        attribution = result.attribution
        if (
            attribution.subject == subject
            and attribution.occurrence == occurrence
            and attribution.sense.text == sense_text
        ):
            return result.status
    raise AssertionError(f"no claim {subject}/{occurrence}/{sense_text}")


class TestLayeredAnalysis:
    def test_fixture_layers(self, maritime_scenario, maritime_source):
        report = layered_analysis(maritime_scenario, scenario_name="maritime")
        assert report.layer_order == ("causal", "role", "liability", "moral")
        assert report.edges  # layer 1 populated
        assert report.role_claims and report.liability_claims and report.moral_claims
        assert (
            claim_status(report, "remote_operator", "omission2", "moral(attributability)")
            is Status.UNSUPPORTED
        )
        assert (
            claim_status(report, "vessel_manufacturer", "consequence2", "liability(civil:product)")
            is Status.SUPPORTED
        )
        assert "W103" not in codes(report)

    def test_role_first_reorders_report_only(self, maritime_scenario):
        default = layered_analysis(maritime_scenario)
        reordered = layered_analysis(maritime_scenario, order="role-first")
        assert reordered.layer_order == ("role", "causal", "liability", "moral")
        assert default.claims == reordered.claims
        assert default.diagnostics == reordered.diagnostics

    def test_empty_scenario(self):
        report = layered_analysis(Scenario())
        assert report.edges == ()
        assert report.claims == ()
        assert report.diagnostics == ()

    def test_diagnostics_sorted(self, maritime_scenario):
        report = layered_analysis(maritime_scenario)
        keys = [d.sort_key() for d in report.diagnostics]
        assert keys == sorted(keys)

    def test_detectors_deterministic(self, maritime_scenario):
        first = layered_analysis(maritime_scenario)
        second = layered_analysis(maritime_scenario)
        assert first.diagnostics == second.diagnostics
        assert first.claims == second.claims


class TestLiabilitySinks:
    def test_fixture_as_shipped_quiet(self, maritime_scenario):
        report = layered_analysis(maritime_scenario)
        assert "W101" not in codes(report)

    def test_only_operator_claimed_liable(self, maritime_source):
        lines = [
            line
            for line in maritime_source.splitlines()
            if not (
                ("claim liability" in line or "attribute liability" in line)
                and "remote_operator" not in line
            )
        ]
        scenario, diagnostics = build_text("\n".join(lines) + "\n")
        assert scenario is not None
        report = layered_analysis(scenario)
        sinks = [d for d in report.diagnostics if d.code == "W101"]
        assert len(sinks) == 1
        assert sinks[0].subjects[0] == "remote_operator"
        named = set(sinks[0].subjects[1:])
        assert "comms_provider" in named and "vessel_owner" in named

    def test_no_humans_no_sink(self):
        scenario, report = analyze_text(
            """
actor org kind institution
occurrence harm kind consequence harm
causes org -> harm
claim liability(civil) org for harm
"""
        )
        assert detect_liability_sinks(scenario, report) == []


class TestCrumpleZones:
    def test_fixture_fires_on_operator(self, maritime_scenario):
        report = layered_analysis(maritime_scenario)
        zones = [d for d in report.diagnostics if d.code == "W102"]
        assert len(zones) == 1
        assert zones[0].subjects == ("remote_operator", "vessel_owner")

    def test_control_and_knowledge_met_quiet(self, maritime_source):
        text = maritime_source.replace(
            "fact control(remote_operator, consequence2) = unmet",
            "fact control(remote_operator, consequence2) = met",
        )
        scenario, diagnostics = build_text(text)
        report = layered_analysis(scenario)
        assert "W102" not in codes(report)

    def test_no_accountability_claims_quiet(self, maritime_source):
        text = "\n".join(
            line
            for line in maritime_source.splitlines()
            if "moral(accountability)" not in line
        )
        scenario, _ = build_text(text + "\n")
        report = layered_analysis(scenario)
        assert "W102" not in codes(report)


class TestResponsibilityGaps:
    def test_stripping_facts_opens_gap(self, maritime_source):
        text = "\n".join(
            line for line in maritime_source.splitlines() if not line.startswith("fact ")
        )
        scenario, _ = build_text(text + "\n")
        report = layered_analysis(scenario)
        gaps = [d for d in report.diagnostics if d.code == "W103"]
        assert [g.subjects for g in gaps] == [("consequence2",)]

    def test_fixture_as_shipped_quiet(self, maritime_scenario):
        report = layered_analysis(maritime_scenario)
        assert "W103" not in codes(report)

    def test_consequence_without_ancestors_quiet(self):
        scenario, report = analyze_text(
            """
actor p kind human
occurrence orphan kind consequence harm
"""
        )
        assert detect_responsibility_gaps(scenario, report) == []

    def test_gaps_monotone_under_fact_removal(self, maritime_source):
        # removing any single fact never removes an existing W103
        stripped = "\n".join(
            line for line in maritime_source.splitlines() if not line.startswith("fact ")
        )
        scenario, _ = build_text(stripped + "\n")
        baseline = {
            d.subjects for d in layered_analysis(scenario).diagnostics if d.code == "W103"
        }
        assert baseline
        rng = random.Random(11)
        for _ in range(40):
            candidate = random_scenario(rng)
            report = layered_analysis(candidate)
            before = {d.subjects for d in report.diagnostics if d.code == "W103"}
            for index in range(len(candidate.facts)):
                fewer = candidate.facts[:index] + candidate.facts[index + 1 :]
                after_report = layered_analysis(candidate.with_facts(fewer))
                after = {d.subjects for d in after_report.diagnostics if d.code == "W103"}
                assert before <= after


class TestUncoveredMachineOccurrences:
    def test_removing_tech_corporation_duty_uncovers_classification(self, maritime_source):
        text = maritime_source.replace(
            "attribute role(legal_duty:contractual) tech_corporation for machine_omission1\n",
            "",
        )
        scenario, _ = build_text(text)
        report = layered_analysis(scenario)
        flagged = {d.subjects[0] for d in report.diagnostics if d.code == "W104"}
        assert "machine_omission1" in flagged

    def test_fixture_as_shipped_quiet(self, maritime_scenario):
        report = layered_analysis(maritime_scenario)
        assert "W104" not in codes(report)

    def test_machine_occurrence_off_harm_path_quiet(self):
        scenario, report = analyze_text(
            """
actor cas kind ai_system
occurrence stray kind machine_decision by cas
occurrence harm kind consequence harm
"""
        )
        assert detect_uncovered_machine_occurrences(scenario, report) == []


class TestDetectorKindRestrictions:
    def test_fuzzed_subject_kinds(self):
        rng = random.Random(2024)
        for _ in range(60):
            scenario = random_scenario(rng)
            report = layered_analysis(scenario)
            for diagnostic in report.diagnostics:
                if diagnostic.code in ("W101", "W102"):
                    actor = scenario.actor_map[diagnostic.subjects[0]]
                    assert actor.kind is ActorKind.HUMAN
                elif diagnostic.code == "W103":
                    occurrence = scenario.occurrence_map[diagnostic.subjects[0]]
                    assert occurrence.kind is OccurrenceKind.CONSEQUENCE
                    assert occurrence.harm
                elif diagnostic.code == "W104":
                    occurrence = scenario.occurrence_map[diagnostic.subjects[0]]
                    assert occurrence.kind.is_machine


class TestExplain:
    def test_operator_attributability(self, maritime_scenario):
        text = explain(
            maritime_scenario, "remote_operator", "omission2", Sense("moral", "attributability")
        )
        lines = text.strip().splitlines()
        assert lines[0].endswith("unsupported")
        assert len(lines) == 4  # header + three conditions
        control_line = next(line for line in lines if "control" in line)
        assert "(decisive)" in control_line
        assert explain(
            maritime_scenario, "remote_operator", "omission2", Sense("moral", "attributability")
        ) == text

    def test_blocked_ai_claim_one_line(self, maritime_scenario):
        text = explain(
            maritime_scenario,
            "collision_avoidance",
            "machine_omission1",
            Sense("role", "legal_duty"),
        )
        assert text == (
            "collision_avoidance / machine_omission1 / role(legal_duty): blocked (AI_NO_DUTY)\n"
        )

    def test_unknown_everything_open(self):
        scenario, _ = analyze_text(
            """
actor org kind institution
occurrence om kind omission
"""
        )
        text = explain(scenario, "org", "om", Sense("moral", "attributability"))
        lines = text.strip().splitlines()
        assert lines[0].endswith(": open")
        assert len(lines) == 4
        assert all("unknown  default-unknown" in line for line in lines[1:])
