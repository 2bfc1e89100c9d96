"""
Field comparators and the naive-Bayes combiner used for both unit aggregation
and cross-source linkage.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from rapidfuzz import fuzz
from rapidfuzz.distance import Levenshtein

from .model import UnitRecord, canonical_name, default_settings

EPS = 1e-4
EARTH_RADIUS_KM = 6371.0
FIELDS = ("name", "fueltype", "geoposition")


@dataclass(frozen=True)
class FieldSpec:
    field: str
    low: float
    high: float
    max_distance_km: float = 50.0

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ValueError(f"unknown similarity field {self.field!r}")
        if not (0 < self.low <= 0.5 <= self.high < 1 and self.low < self.high):
            raise ValueError(f"{self.field}: need 0 < low <= 0.5 <= high < 1, low < high")
        if self.field == "geoposition" and self.max_distance_km <= 0:
            raise ValueError("max_distance_km must be positive")


@dataclass(frozen=True)
class SimilarityConfig:
    fields: tuple[FieldSpec, ...]
    threshold: float = 0.985
    profile: str = "aggregation"

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must lie in (0, 1)")
        if self.profile not in ("aggregation", "linkage"):
            raise ValueError(f"unknown profile {self.profile!r}")

    @classmethod
    def from_dict(cls, profile: str, data: dict) -> SimilarityConfig:
        specs = tuple(FieldSpec(**f) for f in data["fields"])
        return cls(fields=specs, threshold=float(data.get("threshold", 0.985)), profile=profile)

    def to_dict(self) -> dict:
        out = []
        for f in self.fields:
            d = {"field": f.field, "low": f.low, "high": f.high}
            if f.field == "geoposition":
                d["max_distance_km"] = f.max_distance_km
            out.append(d)
        return {"threshold": self.threshold, "fields": out}

    def spec(self, name: str) -> FieldSpec | None:
        for f in self.fields:
            if f.field == name:
                return f
        return None


def default_config(profile: str = "aggregation") -> SimilarityConfig:
    return SimilarityConfig.from_dict(profile, default_settings()["similarity"][profile])


# unit designators: "2", "b", "iv"
_BLOCK_TOKEN = re.compile(r"\d+|[a-z]|[ivx]+")


def strip_block_tokens(name: str) -> str:
    """Drop unit designators so that "gersteinwerk f" and "gersteinwerk k" compare equal."""
    return " ".join(t for t in name.split() if not _BLOCK_TOKEN.fullmatch(t))


def _token_score(a: str, b: str) -> float:
    if not a or not b or set(a.split()).isdisjoint(b.split()):
        return 0.0
    return fuzz.token_set_ratio(a, b) / 100.0


def compare_names(a: str, b: str) -> float:
    """
    Similarity of two canonical names in [0, 1].

    The larger of normalized Levenshtein similarity and, when the names share
    at least one token, the token-set ratio. The token-set ratio is taken both
    on the full names and on the names without unit designators, so reordered
    or block-suffixed names stay close.
    """
    if not a or not b:
        return 0.0
    if a == b:
        return 1.0
    if b < a:
        a, b = b, a
    score = Levenshtein.normalized_similarity(a, b)
    score = max(score, _token_score(a, b))
    return max(score, _token_score(strip_block_tokens(a), strip_block_tokens(b)))


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def compare_geo(a: UnitRecord, b: UnitRecord, max_distance_km: float) -> float | None:
    """Linear distance score; ``None`` when either side has no coordinates."""
    if not (a.has_coords and b.has_coords):
        return None
    d = haversine_km(a.lat, a.lon, b.lat, b.lon)
    return max(0.0, 1.0 - d / max_distance_km)


def field_probability(score: float | None, spec: FieldSpec) -> float:
    if score is None:
        return 0.5
    p = spec.low + score * (spec.high - spec.low)
    return min(1.0 - EPS, max(EPS, p))


@lru_cache(maxsize=65536)
def _as_ratio(p: float) -> tuple[int, int]:
    # read p as the decimal it prints as, so 1 - 0.9 is exactly 0.1
    return Fraction(repr(p)).as_integer_ratio()


def combine_bayes(probs: Sequence[float]) -> float:
    """
    Naive-Bayes posterior Πp / (Πp + Π(1-p)) with a uniform prior.

    Evaluated in exact integer arithmetic on the decimal values of ``probs``,
    so the result is order-invariant and symmetric evidence cancels exactly.
    """
    if not probs:
        return 0.5
    match, nonmatch = 1, 1
    for p in probs:
        num, den = _as_ratio(float(p))
        match *= num
        nonmatch *= den - num
    return match / (match + nonmatch)


def _name_key(rec: UnitRecord) -> str:
    return canonical_name(rec.name) if rec.name else ""


def field_probabilities(a: UnitRecord, b: UnitRecord, cfg: SimilarityConfig) -> list[float]:
    probs = []
    for spec in cfg.fields:
        if spec.field == "name":
            score = compare_names(_name_key(a), _name_key(b))
        elif spec.field == "fueltype":
            score = 1.0 if a.fueltype == b.fueltype else 0.0
        else:
            score = compare_geo(a, b, spec.max_distance_km)
        probs.append(field_probability(score, spec))
    return probs


def record_similarity(a: UnitRecord, b: UnitRecord, cfg: SimilarityConfig) -> float:
    """Posterior probability that two records describe the same plant."""
    if a.country != b.country:
        return 0.0
    if b.key < a.key:
        a, b = b, a
    return combine_bayes(field_probabilities(a, b, cfg))


def _odds(p: float) -> float:
    return p / (1.0 - p)


def min_name_score_without_fuel_match(cfg: SimilarityConfig) -> float | None:
    """
    Smallest name score at which a pair with *different* fuel types can still
    reach ``cfg.threshold``; ``None`` if no such pair can.

    Blocking uses this bound to stay superset-safe.
    """
    name = cfg.spec("name")
    if name is None:
        return None
    rest = 1.0
    for spec in cfg.fields:
        if spec.field == "fueltype":
            rest *= _odds(field_probability(0.0, spec))
        elif spec.field == "geoposition":
            rest *= max(1.0, _odds(field_probability(1.0, spec)))
    needed = _odds(cfg.threshold) / rest
    p_max = field_probability(1.0, name)
    if _odds(p_max) < needed * (1 - 1e-9):
        return None
    p_needed = needed / (1.0 + needed)
    score = (p_needed - name.low) / (name.high - name.low)
    # margin for float rounding in the bound itself
    return max(0.0, score - 1e-6)
