import pytest

from respnet import dsl
from respnet.fixtures import maritime_path
from respnet.model import build_scenario


@pytest.fixture(scope="session")
def maritime_source() -> str:
    return maritime_path().read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def maritime_scenario(maritime_source):
    declarations, diagnostics = dsl.parse(maritime_source, file="maritime.resp")
    assert diagnostics == []
    scenario, errors = build_scenario(declarations)
    assert errors == []
    assert scenario is not None
    return scenario


def build_text(text: str):
    """Parse + build; returns (scenario-or-None, all diagnostics)."""
    declarations, diagnostics = dsl.parse(text, file="test.resp")
    scenario, errors = build_scenario(declarations)
    return scenario, diagnostics + errors
