"""CSV snapshots of units, plants and the matched dataset, readable by the next stage."""

from __future__ import annotations

import csv
import json
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Sequence

from .model import CapacityBasis, FuelType, PlantRecord, SetType, Technology, UnitRecord
from .reduce import MatchedRecord

TABLE_COLUMNS = [
    "Name", "Fueltype", "Technology", "Set", "Country", "Capacity",
    "YearCommissioned", "lat", "lon", "File", "projectID",
]
UNIT_COLUMNS = TABLE_COLUMNS + ["capacity_basis", "status"]
PLANT_COLUMNS = UNIT_COLUMNS + ["member_project_ids"]
MATCHED_COLUMNS = TABLE_COLUMNS + ["n_sources", "winning_source", "chain_id"]


def _opt(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def _common(rec) -> list[str]:
    return [
        rec.name, rec.fueltype.value, rec.technology.value, rec.set_type.value, rec.country,
        str(rec.capacity_mw), _opt(rec.year_commissioned), _opt(rec.lat), _opt(rec.lon),
    ]


def _write(path: Path, header: list[str], rows: Iterable[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_units(records: Sequence[UnitRecord], path: Path) -> None:
    is_plant = bool(records) and isinstance(records[0], PlantRecord)
    header = PLANT_COLUMNS if is_plant else UNIT_COLUMNS

    def row(r):
        out = _common(r) + [r.source_id, r.project_id, r.capacity_basis.value, r.status]
        if is_plant:
            out.append(json.dumps(list(r.member_project_ids)))
        return out

    _write(path, header, (row(r) for r in records))


def _fields(row: dict) -> dict:
    return dict(
        name=row["Name"],
        fueltype=FuelType(row["Fueltype"]),
        technology=Technology(row["Technology"]),
        set_type=SetType(row["Set"]),
        country=row["Country"],
        capacity_mw=Decimal(row["Capacity"]),
        year_commissioned=int(row["YearCommissioned"]) if row["YearCommissioned"] else None,
        lat=float(row["lat"]) if row["lat"] else None,
        lon=float(row["lon"]) if row["lon"] else None,
    )


def read_units(path: Path) -> list[UnitRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            kw = _fields(row)
            kw.update(
                source_id=row["File"],
                project_id=row["projectID"],
                capacity_basis=CapacityBasis(row["capacity_basis"]),
                status=row["status"],
            )
            if "member_project_ids" in row:
                out.append(PlantRecord(**kw, member_project_ids=tuple(json.loads(row["member_project_ids"]))))
            else:
                out.append(UnitRecord(**kw))
    return out


def write_matched(records: Sequence[MatchedRecord], path: Path) -> None:
    def row(r):
        prov = {k: list(v) for k, v in sorted(r.provenance.items())}
        return _common(r) + [
            ";".join(sorted(r.provenance)), json.dumps(prov, sort_keys=True),
            str(r.n_sources), r.winning_source, r.chain_id,
        ]

    _write(path, MATCHED_COLUMNS, (row(r) for r in records))


def read_matched(path: Path) -> list[MatchedRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            prov = {k: tuple(v) for k, v in json.loads(row["projectID"]).items()}
            out.append(MatchedRecord(**_fields(row), provenance=prov,
                                     winning_source=row["winning_source"], chain_id=row["chain_id"]))
    return out
