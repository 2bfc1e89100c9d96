"""
Reading raw source files into standardized unit records.

Each source file is translated through its descriptor's column and term maps,
filtered to the configured countries, stripped of wind and solar units and,
for gross-basis sources, rescaled to net capacity.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Sequence

from .model import (
    CapacityBasis,
    FuelType,
    NormalizationError,
    RecordError,
    SetType,
    SourceDescriptor,
    Technology,
    UnitRecord,
    canonical_name,
    fold_text,
)
from .rescale import DEFAULT_FACTOR, RescaleFactor, apply_factor

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("name", "fueltype", "country", "capacity", "project_id")
RETIRED_STATES = frozenset({"retired", "shutdown", "shut down", "decommissioned", "closed", "stillgelegt"})
WIND_SOLAR = frozenset({FuelType.Wind, FuelType.Solar})
CHP_VALUES = frozenset({"chp", "yes", "y", "true", "1", "kwk", "ja"})


class IngestError(Exception):
    """A source file cannot be read at all."""


class UnmappedTermError(KeyError):
    def __init__(self, raw: str):
        super().__init__(raw)
        self.raw = raw

    def __str__(self):
        return f"unmapped term {self.raw!r}"


class _Excluded(Exception):
    """Row deliberately excluded (not an error)."""


@dataclass
class IngestReport:
    source_id: str
    rows_read: int = 0
    rows_kept: int = 0
    rows_dropped_scope: int = 0
    rows_dropped_windsolar: int = 0
    rows_rejected: int = 0
    rejection_reasons: dict[str, int] = field(default_factory=dict)
    total_capacity_mw: Decimal = Decimal(0)
    # parsed (pre-rescale) capacity of kept rows and of dropped/rejected rows
    capacity_in_mw: Decimal = Decimal(0)
    capacity_dropped_mw: Decimal = Decimal(0)

    def reject(self, reason: str) -> None:
        self.rows_rejected += 1
        self.rejection_reasons[reason] = self.rejection_reasons.get(reason, 0) + 1

    def is_consistent(self) -> bool:
        return self.rows_read == (
            self.rows_kept + self.rows_dropped_scope + self.rows_dropped_windsolar + self.rows_rejected
        )

    def to_json(self) -> str:
        data = asdict(self)
        for k in ("total_capacity_mw", "capacity_in_mw", "capacity_dropped_mw"):
            data[k] = str(data[k])
        data["rejection_reasons"] = dict(sorted(self.rejection_reasons.items()))
        return json.dumps(data, indent=2, sort_keys=True) + "\n"


def translate_term(raw: str, desc: SourceDescriptor) -> tuple[FuelType, Technology, SetType] | None:
    """
    Look up a raw fuel term. Returns ``None`` for terms mapped to exclusion.

    Raises
    ------
    UnmappedTermError
        If the term is not in the descriptor's term map.
    """
    key = raw.strip().casefold()
    if key not in desc.term_map:
        raise UnmappedTermError(raw)
    return desc.term_map[key]


def _cell(row: dict, inverse: dict, column: str) -> str:
    raw_col = inverse.get(column)
    if raw_col is None:
        return ""
    return (row.get(raw_col) or "").strip()


def _parse_float(text: str) -> float | None:
    if not text:
        return None
    return float(text.replace(",", ".")) if text.count(",") == 1 and "." not in text else float(text)


def _parse_capacity(text: str) -> Decimal:
    if not text:
        raise RecordError("missing capacity")
    if text.count(",") == 1 and "." not in text:
        text = text.replace(",", ".")
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise RecordError(f"malformed capacity {text!r}") from None
    if not value.is_finite() or value <= 0:
        raise RecordError(f"non-positive capacity {text!r}")
    return value


def _translate_row(row: dict, inverse: dict, desc: SourceDescriptor):
    fuel_raw = _cell(row, inverse, "fueltype")
    tech_raw = _cell(row, inverse, "technology")
    triple = None
    if tech_raw:
        composite = f"{fuel_raw}|{tech_raw}".casefold()
        if composite in desc.term_map:
            triple = desc.term_map[composite]
            if triple is None:
                raise _Excluded("excluded term")
    if triple is None:
        triple = translate_term(fuel_raw, desc)
        if triple is None:
            raise _Excluded("excluded term")
        if tech_raw and triple[1] is Technology.Unknown:
            tech = desc.term_map.get(tech_raw.casefold())
            if tech is None and tech_raw.casefold() in desc.term_map:
                raise _Excluded("excluded term")
            if tech is not None and tech[0] is triple[0]:
                triple = (triple[0], tech[1], triple[2])
    fuel, technology, set_type = triple
    set_raw = _cell(row, inverse, "set")
    if set_raw:
        set_type = SetType.CHP if set_raw.casefold() in CHP_VALUES else SetType.PP
    return fuel, technology, set_type


def _read_rows(path: Path, delimiter: str) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            return list(csv.DictReader(fh, delimiter=delimiter))
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc


def _build_record(row, inverse, desc, aliases, *, allow_blank_name=False) -> UnitRecord:
    name = _cell(row, inverse, "name")
    if name:
        canonical_name(name)
    elif not allow_blank_name:
        raise NormalizationError("missing name")
    project_id = _cell(row, inverse, "project_id")
    if not project_id:
        raise RecordError("missing project ID")
    fuel, technology, set_type = _translate_row(row, inverse, desc)
    country = _cell(row, inverse, "country")
    country = aliases.get(country, country)
    capacity = _parse_capacity(_cell(row, inverse, "capacity"))
    try:
        year_text = _cell(row, inverse, "year")
        year = int(float(year_text)) if year_text else None
        lat = _parse_float(_cell(row, inverse, "lat"))
        lon = _parse_float(_cell(row, inverse, "lon"))
    except ValueError as exc:
        raise RecordError(f"malformed number: {exc}") from None
    return UnitRecord(
        name=name,
        fueltype=fuel,
        technology=technology,
        set_type=set_type,
        country=country,
        capacity_mw=capacity,
        source_id=desc.source_id,
        project_id=project_id,
        year_commissioned=year,
        lat=lat,
        lon=lon,
        capacity_basis=desc.capacity_basis,
        status=_cell(row, inverse, "status"),
    )


def parse_source(
    path: Path,
    desc: SourceDescriptor,
    scope: Iterable[str],
    factors: Sequence[RescaleFactor] = (),
    *,
    default_factor: float = DEFAULT_FACTOR,
    country_aliases: dict | None = None,
) -> tuple[list[UnitRecord], IngestReport]:
    """
    Standardize one source file.

    Rows with unmapped terms, missing or non-positive capacity, bad coordinates
    or years, duplicate IDs, excluded terms or retired status are rejected and
    counted by reason. Out-of-scope and wind/solar rows are dropped.
    """
    missing = set(REQUIRED_COLUMNS) - set(desc.column_map.values())
    if missing:
        raise IngestError(f"{desc.source_id}: column map lacks {sorted(missing)}")
    rows = _read_rows(Path(path), desc.delimiter)
    inverse = {schema: raw for raw, schema in desc.column_map.items()}
    if rows:
        absent = [raw for raw in inverse.values() if raw not in rows[0]]
        if absent:
            raise IngestError(f"{desc.source_id}: file lacks columns {absent}")
    scope = frozenset(scope)
    aliases = country_aliases or {}
    report = IngestReport(source_id=desc.source_id)
    seen: set[str] = set()
    records = []

    for row in rows:
        report.rows_read += 1
        try:
            rec = _build_record(row, inverse, desc, aliases)
        except UnmappedTermError as exc:
            report.reject(f"unmapped term: {exc.raw}")
            _count_dropped(report, row, inverse)
            continue
        except _Excluded as exc:
            report.reject(str(exc))
            _count_dropped(report, row, inverse)
            continue
        except RecordError as exc:
            reason = "normalization" if isinstance(exc, NormalizationError) else "malformed row"
            report.reject(reason)
            logger.debug("%s: rejected row %s: %s", desc.source_id, report.rows_read, exc)
            _count_dropped(report, row, inverse)
            continue
        if rec.country not in scope:
            report.rows_dropped_scope += 1
            report.capacity_dropped_mw += rec.capacity_mw
            continue
        if rec.fueltype in WIND_SOLAR:
            report.rows_dropped_windsolar += 1
            report.capacity_dropped_mw += rec.capacity_mw
            continue
        if fold_text(rec.status) in RETIRED_STATES:
            report.reject("retired")
            report.capacity_dropped_mw += rec.capacity_mw
            continue
        if rec.project_id in seen:
            report.reject("duplicate project ID")
            report.capacity_dropped_mw += rec.capacity_mw
            continue
        seen.add(rec.project_id)
        report.capacity_in_mw += rec.capacity_mw
        if desc.capacity_basis is CapacityBasis.gross:
            rec = apply_factor(rec, factors, default_factor)
        report.rows_kept += 1
        report.total_capacity_mw += rec.capacity_mw
        records.append(rec)

    if report.rows_rejected:
        logger.warning(
            "%s: rejected %d of %d rows %s",
            desc.source_id, report.rows_rejected, report.rows_read, report.rejection_reasons,
        )
    return records, report


def _count_dropped(report: IngestReport, row: dict, inverse: dict) -> None:
    try:
        report.capacity_dropped_mw += _parse_capacity(_cell(row, inverse, "capacity"))
    except RecordError:
        pass


def append_renewables(
    matched: Sequence,
    path: Path,
    desc: SourceDescriptor,
    scope: Iterable[str],
    *,
    country_aliases: dict | None = None,
) -> tuple[list, IngestReport]:
    """
    Concatenate wind/solar units to the matched dataset without matching them.

    Renewable rows may have blank names. Returns the extended dataset and the
    ingest report of the renewables file.
    """
    from .reduce import MatchedRecord

    rows = _read_rows(Path(path), desc.delimiter)
    inverse = {schema: raw for raw, schema in desc.column_map.items()}
    scope = frozenset(scope)
    aliases = country_aliases or {}
    report = IngestReport(source_id=desc.source_id)
    seen: set[str] = set()
    out = list(matched)
    for row in rows:
        report.rows_read += 1
        try:
            rec = _build_record(row, inverse, desc, aliases, allow_blank_name=True)
        except (UnmappedTermError, _Excluded, RecordError):
            report.reject("malformed row")
            continue
        if rec.country not in scope:
            report.rows_dropped_scope += 1
            continue
        if rec.project_id in seen:
            report.reject("duplicate project ID")
            continue
        seen.add(rec.project_id)
        report.rows_kept += 1
        report.total_capacity_mw += rec.capacity_mw
        out.append(MatchedRecord.from_single(rec))
    return out, report
