"""
Standardized plant schema, controlled vocabularies and name canonicalization.

All stages exchange the frozen record types defined here. Capacities are
held as :class:`decimal.Decimal` so that sums over units and plants are exact.
"""

from __future__ import annotations

import datetime
import re
import unicodedata
from dataclasses import dataclass, field, fields, replace
from decimal import Decimal
from enum import Enum
from functools import lru_cache
from importlib import resources

import yaml


class FuelType(str, Enum):
    Bioenergy = "Bioenergy"
    Geothermal = "Geothermal"
    HardCoal = "HardCoal"
    Hydro = "Hydro"
    Lignite = "Lignite"
    NaturalGas = "NaturalGas"
    Nuclear = "Nuclear"
    Oil = "Oil"
    Waste = "Waste"
    Wind = "Wind"
    Solar = "Solar"
    Other = "Other"


class Technology(str, Enum):
    SteamTurbine = "SteamTurbine"
    CCGT = "CCGT"
    OCGT = "OCGT"
    CombustionEngine = "CombustionEngine"
    Reservoir = "Reservoir"
    RunOfRiver = "RunOfRiver"
    PumpedStorage = "PumpedStorage"
    PV = "PV"
    Onshore = "Onshore"
    Offshore = "Offshore"
    Unknown = "Unknown"


class SetType(str, Enum):
    PP = "PP"
    CHP = "CHP"


class CapacityBasis(str, Enum):
    gross = "gross"
    net = "net"
    unknown = "unknown"


class RecordError(ValueError):
    """A record violates a schema invariant."""


class NormalizationError(RecordError):
    """Name canonicalization left nothing behind."""


FIRST_YEAR = 1900


def _current_year() -> int:
    return datetime.date.today().year


@lru_cache(maxsize=1)
def default_settings() -> dict:
    """Packaged defaults (vocabularies, stop tokens, similarity weights)."""
    text = resources.files("plantmatch").joinpath("data/defaults.yaml").read_text("utf-8")
    return yaml.safe_load(text)


# letters NFKD does not decompose into base letters
_FOLD = str.maketrans(
    {
        "ł": "l",
        "Ł": "l",
        "ø": "o",
        "Ø": "o",
        "đ": "d",
        "Đ": "d",
        "æ": "ae",
        "Æ": "ae",
        "œ": "oe",
        "Œ": "oe",
        "ı": "i",
        "þ": "th",
        "ð": "d",
    }
)
_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def fold_text(raw: str) -> str:
    """Lowercase, fold diacritics and collapse punctuation to single spaces."""
    text = unicodedata.normalize("NFKD", raw.translate(_FOLD).casefold())
    text = "".join(c for c in text if not unicodedata.combining(c))
    return _NON_ALNUM.sub(" ", text).strip()


@lru_cache(maxsize=1)
def default_stop_tokens() -> frozenset[str]:
    return frozenset(fold_text(t) for t in default_settings()["stop_tokens"])


_active_stop_tokens: frozenset[str] | None = None


def set_stop_tokens(tokens) -> None:
    """Replace the stop tokens used when none are passed explicitly (``None`` restores defaults)."""
    global _active_stop_tokens
    _active_stop_tokens = None if tokens is None else frozenset(fold_text(t) for t in tokens)


def active_stop_tokens() -> frozenset[str]:
    return default_stop_tokens() if _active_stop_tokens is None else _active_stop_tokens


@lru_cache(maxsize=65536)
def _canonical(raw: str, stop_tokens: frozenset[str]) -> str:
    tokens = [t for t in fold_text(raw).split() if t not in stop_tokens]
    return " ".join(tokens)


def canonical_name(raw: str, stop_tokens: frozenset[str] | None = None) -> str:
    """
    Canonical matching key for a plant or unit name.

    Raises
    ------
    NormalizationError
        If nothing is left after removing punctuation and stop tokens.
    """
    if stop_tokens is None:
        stop_tokens = active_stop_tokens()
    out = _canonical(raw, stop_tokens)
    if not out:
        raise NormalizationError(f"name {raw!r} is empty after normalization")
    return out


def _check_common(rec) -> None:
    if rec.capacity_mw <= 0:
        raise RecordError(f"capacity must be positive, got {rec.capacity_mw}")
    if (rec.lat is None) != (rec.lon is None):
        raise RecordError("lat and lon must be both present or both absent")
    if rec.lat is not None:
        if not -90.0 <= rec.lat <= 90.0 or not -180.0 <= rec.lon <= 180.0:
            raise RecordError(f"coordinates out of range: {rec.lat}, {rec.lon}")
    if rec.year_commissioned is not None:
        if not FIRST_YEAR <= rec.year_commissioned <= _current_year():
            raise RecordError(f"year out of range: {rec.year_commissioned}")


@dataclass(frozen=True)
class UnitRecord:
    name: str
    fueltype: FuelType
    technology: Technology
    set_type: SetType
    country: str
    capacity_mw: Decimal
    source_id: str
    project_id: str
    year_commissioned: int | None = None
    lat: float | None = None
    lon: float | None = None
    capacity_basis: CapacityBasis = CapacityBasis.net
    # intermediate operating states ("reserve", "temporary shutdown", ...)
    status: str = ""

    def __post_init__(self):
        _check_common(self)

    @property
    def key(self) -> tuple[str, str]:
        return (self.source_id, self.project_id)

    @property
    def has_coords(self) -> bool:
        return self.lat is not None


@dataclass(frozen=True)
class PlantRecord(UnitRecord):
    """Units of one source merged into a plant; ``project_id`` is the smallest member ID."""

    member_project_ids: tuple[str, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        if not self.member_project_ids:
            raise RecordError("a plant needs at least one member unit")
        if len(set(self.member_project_ids)) != len(self.member_project_ids):
            raise RecordError("member project IDs must be unique")

    @property
    def n_units(self) -> int:
        return len(self.member_project_ids)

    @classmethod
    def from_unit(cls, unit: UnitRecord) -> PlantRecord:
        values = {f.name: getattr(unit, f.name) for f in fields(UnitRecord)}
        return cls(**values, member_project_ids=(unit.project_id,))


@dataclass(frozen=True)
class SourceDescriptor:
    """
    How to read one raw source file.

    ``term_map`` keys are casefolded raw terms; a value of ``None`` excludes the
    row (e.g. batteries). ``column_map`` maps raw headers to schema columns:
    name, fueltype, technology, set, country, capacity, year, lat, lon,
    project_id, status.
    """

    source_id: str
    capacity_basis: CapacityBasis
    reliability_score: int
    term_map: dict = field(default_factory=dict, hash=False)
    column_map: dict = field(default_factory=dict, hash=False)
    delimiter: str = ","

    def __post_init__(self):
        if self.reliability_score < 1:
            raise ValueError(f"{self.source_id}: reliability score must be >= 1")

    def with_terms(self, extra: dict) -> SourceDescriptor:
        return replace(self, term_map={**self.term_map, **extra})


def parse_term_value(value) -> tuple[FuelType, Technology, SetType] | None:
    """Turn a config term-map value (list or 'Fuel/Tech/Set' string) into a triple."""
    if value is None:
        return None
    if isinstance(value, str):
        value = value.split("/")
    value = list(value) + [None] * (3 - len(value))
    fuel, tech, set_type = value[:3]
    return (
        FuelType(fuel),
        Technology(tech or "Unknown"),
        SetType(set_type or "PP"),
    )
