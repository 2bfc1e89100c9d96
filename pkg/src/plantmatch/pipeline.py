"""
Staged pipeline: ingest -> aggregate -> match -> reduce -> report.

Every stage writes its snapshot under the output directory and the next stage
can start from those files alone.
"""

from __future__ import annotations

import json
import logging
from decimal import Decimal
from pathlib import Path

from . import report
from .aggregate import aggregate_source
from .config import PipelineConfig
from .ingest import append_renewables, parse_source
from .link import chains_from_json, chains_to_json, join_chains, match_all, write_links
from .model import set_stop_tokens
from .reduce import reduce_all
from .rescale import estimate_factors, read_pairs, write_factors
from .snapshots import read_matched, read_units, write_matched, write_units

logger = logging.getLogger(__name__)

STAGES = ("ingest", "aggregate", "match", "reduce", "report")


class PipelineError(Exception):
    def __init__(self, stage: str, cause: BaseException | str):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _dump(data, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


def _dirs(out: Path) -> dict[str, Path]:
    d = {s: out / s for s in ("ingest", "aggregate", "link", "report")}
    for p in d.values():
        p.mkdir(parents=True, exist_ok=True)
    return d


def _source_ids(cfg: PipelineConfig) -> list[str]:
    return [s.descriptor.source_id for s in cfg.sources]


def run_ingest(cfg: PipelineConfig, out: Path) -> dict:
    dirs = _dirs(out)
    factors = []
    if cfg.pairs_path is not None:
        factors = estimate_factors(read_pairs(cfg.pairs_path))
        write_factors(factors, dirs["ingest"] / "rescale_factors.csv")
    units = {}
    for entry in cfg.sources:
        sid = entry.descriptor.source_id
        records, rep = parse_source(
            entry.path, entry.descriptor, cfg.scope, factors,
            default_factor=cfg.default_factor, country_aliases=cfg.country_aliases,
        )
        write_units(records, dirs["ingest"] / f"{sid}.csv")
        (dirs["ingest"] / f"{sid}_report.json").write_text(rep.to_json(), encoding="utf-8")
        units[sid] = records
    return units


def load_stage(out: Path, stage: str, cfg: PipelineConfig) -> dict:
    return {sid: read_units(out / stage / f"{sid}.csv") for sid in _source_ids(cfg)}


def run_aggregate(cfg: PipelineConfig, out: Path, units: dict, workers: int = 1) -> dict:
    dirs = _dirs(out)
    plants = {}
    for sid in sorted(units):
        plants[sid] = aggregate_source(units[sid], cfg.aggregation, workers)
        write_units(plants[sid], dirs["aggregate"] / f"{sid}.csv")
        logger.info("%s: %d units -> %d plants", sid, len(units[sid]), len(plants[sid]))
    return plants


def run_match(cfg: PipelineConfig, out: Path, plants: dict, workers: int = 1) -> list:
    dirs = _dirs(out)
    links = match_all(plants, cfg.linkage, workers)
    write_links(links, dirs["link"] / "links.csv")
    chains = join_chains(links)
    (dirs["link"] / "chains.json").write_text(chains_to_json(chains), encoding="utf-8")
    logger.info("%d links joined into %d chains", len(links), len(chains))
    return chains


def load_chains(out: Path, plants: dict) -> list:
    lookup = {p.key: p for group in plants.values() for p in group}
    return chains_from_json((out / "link" / "chains.json").read_text(encoding="utf-8"), lookup)


def run_reduce(cfg: PipelineConfig, out: Path, chains: list) -> list:
    matched = reduce_all(chains, cfg.scores)
    if cfg.renewables is not None:
        matched, rep = append_renewables(
            matched, cfg.renewables.path, cfg.renewables.descriptor, cfg.scope,
            country_aliases=cfg.country_aliases,
        )
        (out / "ingest" / "renewables_report.json").write_text(rep.to_json(), encoding="utf-8")
    write_matched(matched, out / "matched.csv")
    return matched


def _table(d: dict, key: str) -> list[dict]:
    return [{key: k, "capacity_mw": v} for k, v in d.items()]


def run_report(cfg: PipelineConfig, out: Path, matched: list, chains: list | None = None) -> dict:
    dirs = _dirs(out)
    rdir = dirs["report"]
    summary: dict = {
        "records": len(matched),
        "total_capacity_mw": sum((r.capacity_mw for r in matched), Decimal(0)),
        "sources_per_record": {},
    }
    for r in matched:
        k = str(r.n_sources)
        summary["sources_per_record"][k] = summary["sources_per_record"].get(k, 0) + 1

    report.write_table(_table(report.group_capacity(matched, "fueltype"), "fueltype"), rdir / "capacity_by_fueltype.csv")
    report.write_table(_table(report.group_capacity(matched, "country"), "country"), rdir / "capacity_by_country.csv")
    both = [{"country": c, "fueltype": f, "capacity_mw": v}
            for (c, f), v in report.group_capacity(matched, "both").items()]
    report.write_table(both, rdir / "capacity_by_country_fueltype.csv")
    report.write_table(report.year_coverage(matched), rdir / "year_coverage.csv")

    if cfg.statistics_path is not None:
        stats = report.read_statistics(cfg.statistics_path)
        table, ratio = report.compare_to_statistics(matched, stats, cfg.scope)
        report.write_table(table, rdir / "statistics_comparison.csv")
        summary["ratio_to_statistics"] = ratio
        by_country_stats: dict = {}
        for s in stats:
            if s.country in cfg.scope:
                by_country_stats[s.country] = by_country_stats.get(s.country, Decimal(0)) + s.capacity_mw
        by_country = report.group_capacity(matched, "country")
        common = sorted(set(by_country) & set(by_country_stats))
        try:
            summary["country_r2"] = report.country_r2(
                {c: float(by_country_stats[c]) for c in common}, {c: float(by_country[c]) for c in common}
            )
        except ValueError as exc:
            summary["country_r2"] = None
            logger.warning("country R² not available: %s", exc)
    else:
        logger.info("no statistics_path configured; statistics comparison skipped")
        summary["ratio_to_statistics"] = None

    if cfg.truth_path is not None and chains is not None:
        result = report.validate_links(report.chain_links(chains), report.read_truth(cfg.truth_path))
        summary["validation"] = result.as_dict()
        _dump(result.as_dict(), rdir / "validation.json")
    _dump(summary, rdir / "summary.json")
    return summary


def run(cfg: PipelineConfig, out: Path | None = None, workers: int = 1) -> dict:
    """Whole pipeline; returns the report summary."""
    out = Path(out or cfg.output_dir)
    cfg.check_paths()
    set_stop_tokens(cfg.stop_tokens)
    stage = "ingest"
    try:
        units = run_ingest(cfg, out)
        stage = "aggregate"
        plants = run_aggregate(cfg, out, units, workers)
        stage = "match"
        chains = run_match(cfg, out, plants, workers)
        stage = "reduce"
        matched = run_reduce(cfg, out, chains)
        stage = "report"
        return run_report(cfg, out, matched, chains)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(stage, exc) from exc


def load_matched(out: Path) -> list:
    return read_matched(out / "matched.csv")
