"""
Analytics over a matched dataset: grouped capacities, comparison with national
statistics, country-level agreement, commissioning-year coverage and link
validation against a ground-truth file.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import FuelType

logger = logging.getLogger(__name__)

# aggregated statistical categories and the fuel type they are booked under
STATISTICS_CATEGORIES = {
    "bioenergy and other renewable fuels": FuelType.Bioenergy,
    "bioenergy and renewable waste": FuelType.Waste,
    "differently categorized fossil fuels": FuelType.Other,
    "differently categorized renewable energy sources": FuelType.Other,
    "mixed fossil fuels": FuelType.Other,
    "other or unspecified energy sources": FuelType.Other,
    "tide, wave, and ocean": FuelType.Other,
}
_FUEL_ALIASES = {
    "hard coal": FuelType.HardCoal,
    "natural gas": FuelType.NaturalGas,
    "biomass and biogas": FuelType.Bioenergy,
}


class ValidationError(Exception):
    """Malformed link-truth file."""


@dataclass(frozen=True)
class StatisticsRow:
    country: str
    fueltype: FuelType
    capacity_mw: Decimal

    def __post_init__(self):
        if self.capacity_mw < 0:
            raise ValueError("statistical capacity must be non-negative")


@dataclass(frozen=True)
class ValidationResult:
    correct: int
    wrong: int
    missed: int

    @property
    def precision(self) -> float:
        found = self.correct + self.wrong
        return self.correct / found if found else 1.0

    @property
    def recall(self) -> float:
        total = self.correct + self.missed
        return self.correct / total if total else 1.0

    def as_dict(self) -> dict:
        return {"correct": self.correct, "wrong": self.wrong, "missed": self.missed,
                "precision": self.precision, "recall": self.recall}


def statistics_fueltype(raw: str) -> FuelType:
    key = raw.strip().casefold()
    if key in STATISTICS_CATEGORIES:
        return STATISTICS_CATEGORIES[key]
    if key in _FUEL_ALIASES:
        return _FUEL_ALIASES[key]
    for f in FuelType:
        if f.value.casefold() == key.replace(" ", ""):
            return f
    raise ValueError(f"unknown statistics category {raw!r}")


def read_statistics(path: Path) -> list[StatisticsRow]:
    """CSV with columns country, fueltype, capacity_mw; aggregated categories are re-mapped."""
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            StatisticsRow(row["country"], statistics_fueltype(row["fueltype"]), Decimal(row["capacity_mw"]))
            for row in csv.DictReader(fh)
        ]


def group_capacity(records: Iterable, by: str = "fueltype") -> dict:
    """Summed capacity per fuel type, country, or (country, fuel type)."""
    if by not in ("fueltype", "country", "both"):
        raise ValueError(f"cannot group by {by!r}")
    out: dict = defaultdict(Decimal)
    for r in records:
        if by == "fueltype":
            key = r.fueltype.value
        elif by == "country":
            key = r.country
        else:
            key = (r.country, r.fueltype.value)
        out[key] += r.capacity_mw
    return dict(sorted(out.items()))


def compare_to_statistics(
    records: Iterable,
    stats: Sequence[StatisticsRow],
    scope: Iterable[str] | None = None,
) -> tuple[list[dict], Decimal]:
    """
    Per (country, fuel type) matched vs statistical capacity and the overall
    ratio Σ matched / Σ statistics.
    """
    if scope is not None:
        scope = set(scope)
        outside = [s for s in stats if s.country not in scope]
        if outside:
            logger.warning("ignoring %d statistics rows outside scope", len(outside))
        stats = [s for s in stats if s.country in scope]
    stat_cap: dict = defaultdict(Decimal)
    for s in stats:
        stat_cap[(s.country, s.fueltype.value)] += s.capacity_mw
    matched = group_capacity(records, "both")
    table = []
    for key in sorted(set(stat_cap) | set(matched)):
        m, s = matched.get(key, Decimal(0)), stat_cap.get(key, Decimal(0))
        table.append({"country": key[0], "fueltype": key[1], "matched_mw": m,
                      "statistics_mw": s, "deviation_mw": m - s})
    total_stats = sum(stat_cap.values(), Decimal(0))
    if total_stats == 0:
        raise ValueError("statistics total is zero")
    return table, sum(matched.values(), Decimal(0)) / total_stats


def country_r2(x: Mapping[str, float], y: Mapping[str, float]) -> float:
    """
    Agreement of two per-country capacity totals with the identity line on
    log10 axes: 1 - Σ(log y - log x)² / Σ(log y - mean log y)².
    """
    if set(x) != set(y):
        raise ValueError("both inputs must cover the same countries")
    countries = []
    for c in sorted(x):
        if x[c] <= 0 or y[c] <= 0:
            logger.warning("excluding %s: non-positive capacity", c)
            continue
        countries.append(c)
    lx = [math.log10(float(x[c])) for c in countries]
    ly = [math.log10(float(y[c])) for c in countries]
    if not ly:
        raise ValueError("no countries with positive capacity")
    mean = math.fsum(ly) / len(ly)
    ss_tot = math.fsum((v - mean) ** 2 for v in ly)
    if ss_tot == 0:
        raise ValueError("R² undefined: no spread across countries")
    ss_res = math.fsum((b - a) ** 2 for a, b in zip(lx, ly))
    return 1.0 - ss_res / ss_tot


def percent(ratio) -> int:
    """Whole percent, rounding halves up."""
    return int((Decimal(str(ratio)) * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def year_coverage(records: Iterable) -> list[dict]:
    with_year: dict = defaultdict(int)
    total: dict = defaultdict(int)
    for r in records:
        total[r.country] += 1
        if r.year_commissioned is not None:
            with_year[r.country] += 1
    return [
        {"country": c, "with_year": with_year[c], "total": total[c],
         "ratio": with_year[c] / total[c], "ratio_pct": percent(Decimal(with_year[c]) / total[c])}
        for c in sorted(total)
    ]


Link = frozenset  # frozenset of two (source_id, project_id) tuples


def make_link(a: tuple[str, str], b: tuple[str, str]) -> Link:
    if a == b:
        raise ValueError("a link needs two distinct records")
    return frozenset((tuple(a), tuple(b)))


def validate_links(found: Iterable[Link], truth: Iterable[Link]) -> ValidationResult:
    found, truth = set(found), set(truth)
    return ValidationResult(
        correct=len(found & truth),
        wrong=len(found - truth),
        missed=len(truth - found),
    )


TRUTH_COLUMNS = ("source_a", "project_id_a", "source_b", "project_id_b")


def read_truth(path: Path) -> set[Link]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not set(TRUTH_COLUMNS) <= set(reader.fieldnames):
                raise ValidationError(f"{path}: truth file needs columns {TRUTH_COLUMNS}")
            out = set()
            for n, row in enumerate(reader, start=2):
                vals = [(row.get(c) or "").strip() for c in TRUTH_COLUMNS]
                if not all(vals):
                    raise ValidationError(f"{path}:{n}: empty field")
                out.add(make_link((vals[0], vals[1]), (vals[2], vals[3])))
            return out
    except OSError as exc:
        raise ValidationError(f"cannot read truth file: {exc}") from exc


def write_truth(links: Iterable[Link], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRUTH_COLUMNS)
        for a, b in sorted(tuple(sorted(l)) for l in links):
            w.writerow([*a, *b])


def chain_links(chains) -> set[Link]:
    """Every pair of plants joined by a chain, referenced by plant ID."""
    out = set()
    for c in chains:
        keys = sorted(p.key for p in c.members.values())
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                out.add(make_link(keys[i], keys[j]))
    return out


def write_table(rows: Sequence[dict], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if not rows:
            fh.write("")
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
