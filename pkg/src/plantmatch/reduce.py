"""Collapsing each chain of claims into a single record using source reliability scores."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Mapping, Sequence

from .link import LinkChain
from .model import (
    FuelType,
    PlantRecord,
    SetType,
    Technology,
    UnitRecord,
    _check_common,
)

TIE = "tie"


class ConfigurationError(Exception):
    """Pipeline configuration is inconsistent with the data."""


@dataclass(frozen=True)
class MatchedRecord:
    name: str
    fueltype: FuelType
    technology: Technology
    set_type: SetType
    country: str
    capacity_mw: Decimal
    year_commissioned: int | None
    lat: float | None
    lon: float | None
    provenance: dict = field(hash=False)  # source_id -> tuple of unit project IDs
    winning_source: str
    chain_id: str = ""

    def __post_init__(self):
        _check_common(self)
        if not self.provenance:
            raise ValueError("provenance must not be empty")

    @property
    def n_sources(self) -> int:
        return len(self.provenance)

    @classmethod
    def from_single(cls, rec: UnitRecord) -> MatchedRecord:
        ids = rec.member_project_ids if isinstance(rec, PlantRecord) else (rec.project_id,)
        return cls(
            name=rec.name,
            fueltype=rec.fueltype,
            technology=rec.technology,
            set_type=rec.set_type,
            country=rec.country,
            capacity_mw=rec.capacity_mw,
            year_commissioned=rec.year_commissioned,
            lat=rec.lat,
            lon=rec.lon,
            provenance={rec.source_id: tuple(ids)},
            winning_source=rec.source_id,
        )


def _mode(values, key=str):
    counts = Counter(values)
    return min(counts, key=lambda v: (-counts[v], len(key(v)), key(v)))


def median(values: Sequence[Decimal]) -> Decimal:
    s = sorted(values)
    n = len(s)
    mid = n // 2
    return s[mid] if n % 2 else (s[mid - 1] + s[mid]) / 2


def _backfill(members: Sequence[PlantRecord], scores: Mapping[str, int], attr: str, missing):
    """Value of ``attr`` from the highest-scoring member that provides it."""
    ranked = sorted(members, key=lambda p: (-scores[p.source_id], p.source_id))
    for p in ranked:
        value = getattr(p, attr)
        if value != missing:
            return value
    return missing


def reduce_chain(chain: LinkChain, scores: Mapping[str, int]) -> MatchedRecord:
    """
    The claim of the unique highest-scoring source wins outright; a tie at the
    top is resolved field by field (modes, mean location, median capacity).
    Missing year and technology are backfilled from the best member that has them.
    """
    members = list(chain.members.values())
    for p in members:
        if p.source_id not in scores:
            raise ConfigurationError(f"no reliability score for source {p.source_id!r}")
    top = max(scores[p.source_id] for p in members)
    best = sorted((p for p in members if scores[p.source_id] == top), key=lambda p: p.source_id)
    provenance = {p.source_id: tuple(p.member_project_ids) for p in sorted(members, key=lambda p: p.source_id)}

    if len(best) == 1:
        win = best[0]
        technology = win.technology
        year = win.year_commissioned
        name, fuel, set_type = win.name, win.fueltype, win.set_type
        lat, lon, capacity = win.lat, win.lon, win.capacity_mw
        winner = win.source_id
    else:
        name = _mode([p.name for p in best])
        fuel = _mode([p.fueltype for p in best], key=lambda v: v.value)
        known = [p.technology for p in best if p.technology is not Technology.Unknown]
        technology = _mode(known, key=lambda v: v.value) if known else Technology.Unknown
        set_type = _mode([p.set_type for p in best], key=lambda v: v.value)
        coords = [(p.lat, p.lon) for p in best if p.has_coords]
        lat = lon = None
        if coords:
            lat = math.fsum(c[0] for c in coords) / len(coords)
            lon = math.fsum(c[1] for c in coords) / len(coords)
        capacity = median([p.capacity_mw for p in best])
        years = [p.year_commissioned for p in best if p.year_commissioned is not None]
        year = min(years) if years else None
        winner = TIE

    if year is None:
        year = _backfill(members, scores, "year_commissioned", None)
    if technology is Technology.Unknown:
        technology = _backfill(members, scores, "technology", Technology.Unknown)

    return MatchedRecord(
        name=name,
        fueltype=fuel,
        technology=technology,
        set_type=set_type,
        country=members[0].country,
        capacity_mw=capacity,
        year_commissioned=year,
        lat=lat,
        lon=lon,
        provenance=provenance,
        winning_source=winner,
        chain_id=chain.chain_id,
    )


def _sort_key(r: MatchedRecord):
    return (r.country, r.name, sorted(r.provenance.items()))


def reduce_all(chains: Sequence[LinkChain], scores: Mapping[str, int]) -> list[MatchedRecord]:
    """One record per chain, ordered by country and name."""
    return sorted((reduce_chain(c, scores) for c in chains), key=_sort_key)
