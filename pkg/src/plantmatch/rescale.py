"""Gross-to-net capacity factors per (fuel type, technology)."""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import FuelType, Technology, UnitRecord

logger = logging.getLogger(__name__)

DEFAULT_FACTOR = 0.9
FACTOR_COLUMNS = ["fueltype", "technology", "mean_ratio", "median_ratio", "q1", "q3", "n_samples"]


@dataclass(frozen=True)
class RescaleFactor:
    fueltype: FuelType
    technology: Technology
    mean_ratio: float
    median_ratio: float
    q1: float
    q3: float
    n_samples: int
    outlier_ratios: tuple[float, ...] = field(default=(), compare=False)


def quartiles(values: Sequence[float]) -> tuple[float, float, float]:
    """Q1, median, Q3 by linear interpolation between order statistics."""
    q1, med, q3 = np.quantile(np.asarray(values, dtype=float), [0.25, 0.5, 0.75])
    return float(q1), float(med), float(q3)


def exact_mean(values: Sequence[float]) -> float:
    """Arithmetic mean rounded once, so a constant sample returns its value exactly."""
    return float(sum(map(Fraction, values), Fraction(0)) / len(values))


def detect_outliers(values: Sequence[float]) -> list[bool]:
    """Flag values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR]."""
    if len(values) == 0:
        raise ValueError("detect_outliers needs at least one value")
    q1, _, q3 = quartiles(values)
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    return [v < lo or v > hi for v in values]


def estimate_factors(
    pairs: Iterable[tuple[FuelType, Technology, float, float]],
) -> list[RescaleFactor]:
    """
    One factor per (fueltype, technology) from (fuel, tech, net_mw, gross_mw)
    samples. Outliers are reported but stay in the mean.
    """
    groups: dict[tuple, list[float]] = defaultdict(list)
    rejected = 0
    for fuel, tech, net, gross in pairs:
        net, gross = float(net), float(gross)
        if not (net > 0 and gross > 0):
            rejected += 1
            continue
        groups[(FuelType(fuel), Technology(tech))].append(net / gross)
    if rejected:
        logger.warning("skipped %d pairs with non-positive capacity", rejected)

    factors = []
    for (fuel, tech), ratios in sorted(groups.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)):
        q1, med, q3 = quartiles(ratios)
        flags = detect_outliers(ratios)
        factors.append(
            RescaleFactor(
                fueltype=fuel,
                technology=tech,
                mean_ratio=exact_mean(ratios),
                median_ratio=med,
                q1=q1,
                q3=q3,
                n_samples=len(ratios),
                outlier_ratios=tuple(r for r, f in zip(ratios, flags) if f),
            )
        )
    return factors


def lookup_factor(
    fueltype: FuelType,
    technology: Technology,
    factors: Sequence[RescaleFactor],
    default: float = DEFAULT_FACTOR,
) -> float:
    """Exact (fuel, technology) mean, else sample-weighted fuel-level mean, else default."""
    weighted, n = 0.0, 0
    for f in factors:
        if f.fueltype == fueltype:
            if f.technology == technology:
                return f.mean_ratio
            weighted += f.mean_ratio * f.n_samples
            n += f.n_samples
    return weighted / n if n else default


def apply_factor(
    record: UnitRecord,
    factors: Sequence[RescaleFactor],
    default: float = DEFAULT_FACTOR,
) -> UnitRecord:
    factor = min(1.0, lookup_factor(record.fueltype, record.technology, factors, default))
    return replace(record, capacity_mw=record.capacity_mw * Decimal(repr(factor)))


def write_factors(factors: Sequence[RescaleFactor], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FACTOR_COLUMNS)
        for f in factors:
            w.writerow(
                [f.fueltype.value, f.technology.value, repr(f.mean_ratio), repr(f.median_ratio),
                 repr(f.q1), repr(f.q3), f.n_samples]
            )


def read_factors(path: Path) -> list[RescaleFactor]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            RescaleFactor(
                fueltype=FuelType(row["fueltype"]),
                technology=Technology(row["technology"]),
                mean_ratio=float(row["mean_ratio"]),
                median_ratio=float(row["median_ratio"]),
                q1=float(row["q1"]),
                q3=float(row["q3"]),
                n_samples=int(row["n_samples"]),
            )
            for row in csv.DictReader(fh)
        ]


def read_pairs(path: Path) -> list[tuple[FuelType, Technology, float, float]]:
    """Paired net/gross corpus: CSV with fueltype, technology, net_mw, gross_mw."""
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            (
                FuelType(row["fueltype"]),
                Technology(row.get("technology") or "Unknown"),
                float(row["net_mw"]),
                float(row["gross_mw"]),
            )
            for row in csv.DictReader(fh)
        ]
