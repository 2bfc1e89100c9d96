"""Command-line entry point: ``plantmatch <stage> --config PATH``."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import pipeline, report
from .config import ConfigError, load_config
from .fixtures import load_spec, make_fixture
from .model import set_stop_tokens

config_option = click.option("--config", "config_path", required=True,
                             type=click.Path(exists=True, dir_okay=False, path_type=Path))
output_option = click.option("--output", type=click.Path(file_okay=False, path_type=Path),
                             help="Override the output directory from the config.")
workers_option = click.option("--workers", default=1, show_default=True, type=click.IntRange(min=1))


def _fail(stage: str, cause) -> None:
    click.echo(f"error: stage {stage}: {cause}", err=True)
    sys.exit(1)


def _prepare(config_path: Path, output: Path | None):
    try:
        cfg = load_config(config_path)
        cfg.check_paths()
    except ConfigError as exc:
        _fail("config", exc)
    set_stop_tokens(cfg.stop_tokens)
    return cfg, Path(output or cfg.output_dir)


def _stage(name: str, fn, *args):
    try:
        return fn(*args)
    except Exception as exc:
        _fail(name, exc)


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose: bool) -> None:
    """Clean, aggregate, link and reduce power plant registries."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@config_option
@output_option
@workers_option
def run(config_path, output, workers):
    """Run every stage end to end."""
    cfg, out = _prepare(config_path, output)
    try:
        summary = pipeline.run(cfg, out, workers)
    except pipeline.PipelineError as exc:
        _fail(exc.stage, exc.cause)
    if summary.get("ratio_to_statistics") is None:
        click.echo("notice: no statistics configured, comparison skipped", err=True)
    click.echo(json.dumps(summary, indent=2, sort_keys=True, default=str))


@main.command()
@config_option
@output_option
def ingest(config_path, output):
    """Standardize every source file."""
    cfg, out = _prepare(config_path, output)
    _stage("ingest", pipeline.run_ingest, cfg, out)


@main.command()
@config_option
@output_option
@workers_option
def aggregate(config_path, output, workers):
    """Group units into plants (reads the ingest snapshots)."""
    cfg, out = _prepare(config_path, output)
    units = _stage("aggregate", pipeline.load_stage, out, "ingest", cfg)
    _stage("aggregate", pipeline.run_aggregate, cfg, out, units, workers)


@main.command()
@config_option
@output_option
@workers_option
def match(config_path, output, workers):
    """Link plants across sources (reads the aggregate snapshots)."""
    cfg, out = _prepare(config_path, output)
    plants = _stage("match", pipeline.load_stage, out, "aggregate", cfg)
    _stage("match", pipeline.run_match, cfg, out, plants, workers)


@main.command()
@config_option
@output_option
def reduce(config_path, output):
    """Collapse chains into the matched dataset."""
    cfg, out = _prepare(config_path, output)
    plants = _stage("reduce", pipeline.load_stage, out, "aggregate", cfg)
    chains = _stage("reduce", pipeline.load_chains, out, plants)
    _stage("reduce", pipeline.run_reduce, cfg, out, chains)


@main.command("report")
@config_option
@output_option
def report_cmd(config_path, output):
    """Capacity tables, statistics comparison and year coverage."""
    cfg, out = _prepare(config_path, output)
    matched = _stage("report", pipeline.load_matched, out)
    plants = _stage("report", pipeline.load_stage, out, "aggregate", cfg)
    chains = _stage("report", pipeline.load_chains, out, plants)
    summary = _stage("report", pipeline.run_report, cfg, out, matched, chains)
    click.echo(json.dumps(summary, indent=2, sort_keys=True, default=str))


@main.command()
@config_option
@output_option
def validate(config_path, output):
    """Compare found links against the configured truth file."""
    cfg, out = _prepare(config_path, output)
    if cfg.truth_path is None:
        _fail("validate", "config has no truth_path")
    plants = _stage("validate", pipeline.load_stage, out, "aggregate", cfg)
    chains = _stage("validate", pipeline.load_chains, out, plants)
    truth = _stage("validate", report.read_truth, cfg.truth_path)
    result = report.validate_links(report.chain_links(chains), truth)
    click.echo(json.dumps(result.as_dict(), indent=2, sort_keys=True))


@main.command()
@config_option
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--output", required=True, type=click.Path(file_okay=False, path_type=Path))
def fixture(config_path, seed, output):
    """Generate a synthetic fixture from a fixture spec file."""
    try:
        spec = load_spec(config_path)
    except (OSError, ValueError, TypeError) as exc:
        _fail("fixture", exc)
    info = make_fixture(spec, seed, output)
    click.echo(f"wrote {output} ({len(info['truth'])} truth links, config {info['config']})")


if __name__ == "__main__":
    main()
