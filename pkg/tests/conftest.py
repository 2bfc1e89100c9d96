import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from plantmatch.model import CapacityBasis, SourceDescriptor, default_settings, parse_term_value, set_stop_tokens

ROOT = Path(__file__).resolve().parents[1]
FIXTURE_SPECS = ROOT / "fixtures"
GENERIC_COLUMNS = {
    "name": "name", "fuel": "fueltype", "tech": "technology", "chp": "set", "country": "country",
    "mw": "capacity", "year": "year", "lat": "lat", "lon": "lon", "id": "project_id", "status": "status",
}


def generic_descriptor(source_id="SRC", basis="net", score=1, **extra_terms) -> SourceDescriptor:
    terms = {k: parse_term_value(v) for k, v in default_settings()["term_map"].items()}
    terms.update(extra_terms)
    return SourceDescriptor(
        source_id=source_id,
        capacity_basis=CapacityBasis(basis),
        reliability_score=score,
        term_map=terms,
        column_map=dict(GENERIC_COLUMNS),
    )


@pytest.fixture(autouse=True)
def _default_stop_tokens():
    set_stop_tokens(None)
    yield
    set_stop_tokens(None)


@pytest.fixture
def scope():
    return tuple(default_settings()["scope"])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
