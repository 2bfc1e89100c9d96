"""
Pipeline configuration file (YAML).

Example::

    schema_version: 1
    scope: [Germany]
    output_dir: out
    sources:
      - id: BNETZA
        path: bnetza.csv
        capacity_basis: net
        columns: {Kraftwerksname: name, Energietraeger: fueltype, ...}
        terms: {erdgas: [NaturalGas]}
    scores: {BNETZA: 3, UBA: 2}
    rescale: {default_factor: 0.9, pairs_path: pairs.csv}
    statistics_path: stats.csv
    truth_path: truth.csv
    renewables: {id: OPSD_RES, path: res.csv, columns: {...}}

Relative paths resolve against the config file's directory. Keys left out
fall back to the packaged defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .model import CapacityBasis, SourceDescriptor, default_settings, fold_text, parse_term_value
from .similarity import SimilarityConfig

SCHEMA_VERSION = 1


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class SourceEntry:
    descriptor: SourceDescriptor
    path: Path


@dataclass(frozen=True)
class PipelineConfig:
    scope: tuple[str, ...]
    sources: tuple[SourceEntry, ...]
    aggregation: SimilarityConfig
    linkage: SimilarityConfig
    scores: dict = field(hash=False)
    output_dir: Path
    default_factor: float = 0.9
    pairs_path: Path | None = None
    statistics_path: Path | None = None
    truth_path: Path | None = None
    renewables: SourceEntry | None = None
    country_aliases: dict = field(default_factory=dict, hash=False)
    stop_tokens: frozenset = frozenset()
    seed: int = 0

    def check_paths(self) -> None:
        paths = [s.path for s in self.sources]
        paths += [p for p in (self.pairs_path, self.statistics_path, self.truth_path) if p]
        if self.renewables:
            paths.append(self.renewables.path)
        missing = [str(p) for p in paths if not p.exists()]
        if missing:
            raise ConfigError(f"missing input files: {missing}")


def _terms(raw: dict | None) -> dict:
    out = {}
    for k, v in (raw or {}).items():
        try:
            out[str(k).strip().casefold()] = parse_term_value(v)
        except ValueError as exc:
            raise ConfigError(f"bad term mapping {k!r}: {exc}") from None
    return out


def _source(entry: dict, base: Path, generic_terms: dict, scores: dict) -> SourceEntry:
    try:
        sid = entry["id"]
        path = base / entry["path"]
        columns = dict(entry["columns"])
    except KeyError as exc:
        raise ConfigError(f"source entry lacks {exc}") from None
    desc = SourceDescriptor(
        source_id=sid,
        capacity_basis=CapacityBasis(entry.get("capacity_basis", "net")),
        reliability_score=int(scores.get(sid, entry.get("score", 1))),
        term_map={**generic_terms, **_terms(entry.get("terms"))},
        column_map=columns,
        delimiter=entry.get("delimiter", ","),
    )
    return SourceEntry(desc, path)


def parse_config(data: dict, base: Path) -> PipelineConfig:
    defaults = default_settings()
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")
    scores = {str(k): int(v) for k, v in (data.get("scores") or {}).items()}
    generic = _terms(defaults["term_map"])
    generic.update(_terms(data.get("term_map")))
    sources = tuple(_source(e, base, generic, scores) for e in data.get("sources") or [])
    if len(sources) < 2:
        raise ConfigError("at least two sources are needed for matching")
    ids = [s.descriptor.source_id for s in sources]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate source ids")
    unscored = [i for i in ids if i not in scores]
    if unscored:
        raise ConfigError(f"sources without reliability score: {unscored}")

    sim = {**defaults["similarity"], **(data.get("similarity") or {})}
    rescale = {**defaults["rescale"], **(data.get("rescale") or {})}

    def opt_path(value):
        return base / value if value else None

    renewables = None
    if data.get("renewables"):
        renewables = _source(data["renewables"], base, generic, {})

    stop = data.get("stop_tokens", defaults["stop_tokens"])
    return PipelineConfig(
        scope=tuple(data.get("scope") or defaults["scope"]),
        sources=sources,
        aggregation=SimilarityConfig.from_dict("aggregation", sim["aggregation"]),
        linkage=SimilarityConfig.from_dict("linkage", sim["linkage"]),
        scores=scores,
        output_dir=base / data.get("output_dir", "output"),
        default_factor=float(rescale["default_factor"]),
        pairs_path=opt_path(rescale.get("pairs_path")),
        statistics_path=opt_path(data.get("statistics_path")),
        truth_path=opt_path(data.get("truth_path")),
        renewables=renewables,
        country_aliases={**defaults["country_aliases"], **(data.get("country_aliases") or {})},
        stop_tokens=frozenset(fold_text(t) for t in stop),
        seed=int(data.get("seed", 0)),
    )


def load_config(path: Path) -> PipelineConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data, path.parent)
