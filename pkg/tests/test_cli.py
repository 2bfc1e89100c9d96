import csv
import json
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from _dirs import tree_digest
from conftest import FIXTURE_SPECS
from plantmatch.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)


@pytest.fixture
def smoke(runner, tmp_path):
    result = invoke(runner, "fixture", "--config", FIXTURE_SPECS / "smoke.yaml", "--seed", 1, "--output", tmp_path / "fx")
    assert result.exit_code == 0, result.output
    return tmp_path / "fx"


def matched_rows(path: Path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_two_source_run_matches_perfectly(runner, smoke):
    result = invoke(runner, "run", "--config", smoke / "config.yaml")
    assert result.exit_code == 0, result.stderr
    summary = json.loads(result.stdout)
    assert summary["validation"]["precision"] == 1.0 and summary["validation"]["recall"] == 1.0
    rows = matched_rows(smoke / "output" / "matched.csv")
    assert rows and all(r["n_sources"] == "2" for r in rows)
    assert list(rows[0])[:11] == ["Name", "Fueltype", "Technology", "Set", "Country", "Capacity",
                                  "YearCommissioned", "lat", "lon", "File", "projectID"]


def test_fixture_is_seed_deterministic(runner, tmp_path):
    for out in ("a", "b"):
        invoke(runner, "fixture", "--config", FIXTURE_SPECS / "smoke.yaml", "--seed", 4, "--output", tmp_path / out)
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")
    invoke(runner, "fixture", "--config", FIXTURE_SPECS / "smoke.yaml", "--seed", 5, "--output", tmp_path / "c")
    assert tree_digest(tmp_path / "a") != tree_digest(tmp_path / "c")


def test_identical_runs_are_byte_identical(runner, smoke, tmp_path):
    for out in ("r1", "r2"):
        assert invoke(runner, "run", "--config", smoke / "config.yaml", "--output", tmp_path / out).exit_code == 0
    assert tree_digest(tmp_path / "r1") == tree_digest(tmp_path / "r2")


def test_missing_statistics_is_a_notice(runner, smoke):
    cfg = yaml.safe_load((smoke / "config.yaml").read_text())
    del cfg["statistics_path"]
    (smoke / "nostats.yaml").write_text(yaml.safe_dump(cfg))
    result = invoke(runner, "run", "--config", smoke / "nostats.yaml")
    assert result.exit_code == 0
    assert "statistics" in result.stderr
    assert json.loads(result.stdout)["ratio_to_statistics"] is None


def test_stages_reproduce_end_to_end(runner, smoke, tmp_path):
    cfg = smoke / "config.yaml"
    invoke(runner, "run", "--config", cfg, "--output", tmp_path / "whole")
    staged = tmp_path / "staged"
    for stage in ("ingest", "aggregate", "match", "reduce", "report"):
        result = invoke(runner, stage, "--config", cfg, "--output", staged)
        assert result.exit_code == 0, (stage, result.stderr)
    assert tree_digest(staged) == tree_digest(tmp_path / "whole")
    result = invoke(runner, "validate", "--config", cfg, "--output", staged)
    assert json.loads(result.stdout)["wrong"] == 0


def test_stage_without_its_input_fails_with_stage_name(runner, smoke, tmp_path):
    result = invoke(runner, "match", "--config", smoke / "config.yaml", "--output", tmp_path / "empty")
    assert result.exit_code == 1
    assert result.stderr.startswith("error: stage match:")


def test_missing_input_file_fails(runner, smoke):
    (smoke / "truth.csv").unlink()
    result = invoke(runner, "run", "--config", smoke / "config.yaml")
    assert result.exit_code == 1
    assert "error: stage config:" in result.stderr and "truth.csv" in result.stderr


def test_unreadable_source_fails_in_ingest(runner, smoke):
    (smoke / "S1.csv").write_bytes(b"\xff\xfe\x00garbage")
    result = invoke(runner, "run", "--config", smoke / "config.yaml")
    assert result.exit_code == 1
    assert result.stderr.startswith("error: stage ingest:")


@pytest.mark.parametrize("edit, message", [
    (lambda c: c["scores"].pop("S2"), "without reliability score"),
    (lambda c: c.update(schema_version=2), "schema_version"),
    (lambda c: c["sources"].pop(), "at least two sources"),
])
def test_config_errors(runner, smoke, edit, message):
    cfg = yaml.safe_load((smoke / "config.yaml").read_text())
    edit(cfg)
    (smoke / "bad.yaml").write_text(yaml.safe_dump(cfg))
    result = invoke(runner, "run", "--config", smoke / "bad.yaml")
    assert result.exit_code == 1 and message in result.stderr


def test_fixture_spec_errors(runner, tmp_path):
    (tmp_path / "spec.yaml").write_text("n_plants: 5\nn_sources: 1\n")
    result = invoke(runner, "fixture", "--config", tmp_path / "spec.yaml", "--output", tmp_path / "o")
    assert result.exit_code == 1 and "at least two sources" in result.stderr


def test_renewables_are_appended(runner, tmp_path):
    spec = yaml.safe_load((FIXTURE_SPECS / "smoke.yaml").read_text())
    spec["n_renewables"] = 7
    (tmp_path / "spec.yaml").write_text(yaml.safe_dump(spec))
    invoke(runner, "fixture", "--config", tmp_path / "spec.yaml", "--seed", 1, "--output", tmp_path / "fx")
    result = invoke(runner, "run", "--config", tmp_path / "fx" / "config.yaml")
    assert result.exit_code == 0, result.stderr
    summary = json.loads(result.stdout)
    assert summary["sources_per_record"]["1"] == 7
