"""Clustering the units of one source into plants."""

from __future__ import annotations

import math
from collections import Counter
from decimal import Decimal
from typing import Iterable, Sequence

from .blocking import candidate_pairs, score_pairs
from .model import PlantRecord, UnitRecord
from .similarity import SimilarityConfig


class DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller root wins, keeps labels independent of edge order
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def groups(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return sorted(out.values(), key=lambda g: g[0])


def components(n: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    """Connected components of an undirected graph on ``range(n)``, ordered by smallest member."""
    ds = DisjointSet(n)
    for a, b in edges:
        ds.union(a, b)
    return ds.groups()


def block(records: Sequence[UnitRecord], cfg: SimilarityConfig | None = None) -> set[tuple[int, int]]:
    """Candidate index pairs (i < j) within one source."""
    return candidate_pairs(records, None, cfg)


def cluster_units(
    records: Sequence[UnitRecord],
    cfg: SimilarityConfig,
    workers: int = 1,
) -> list[list[UnitRecord]]:
    """Single-linkage groups of units whose pairwise posterior reaches the threshold."""
    pairs = sorted(block(records, cfg))
    scores = score_pairs(records, records, pairs, cfg, workers)
    edges = [p for p, s in zip(pairs, scores) if s >= cfg.threshold]
    return [[records[i] for i in g] for g in components(len(records), edges)]


def _mode(values: Sequence, key=str):
    """Most frequent value; ties go to the shortest, then lexicographically smallest."""
    counts = Counter(values)
    return min(counts, key=lambda v: (-counts[v], len(key(v)), key(v)))


def merge_group(group: Sequence[UnitRecord]) -> PlantRecord:
    if not group:
        raise ValueError("cannot merge an empty group")
    sources = {u.source_id for u in group}
    if len(sources) != 1:
        raise ValueError(f"group spans several sources: {sorted(sources)}")
    if len(group) == 1:
        return PlantRecord.from_unit(group[0])
    coords = [(u.lat, u.lon) for u in group if u.has_coords]
    lat = lon = None
    if coords:
        lat = math.fsum(c[0] for c in coords) / len(coords)
        lon = math.fsum(c[1] for c in coords) / len(coords)
    years = [u.year_commissioned for u in group if u.year_commissioned is not None]
    ids = tuple(u.project_id for u in group)
    statuses = sorted({u.status for u in group if u.status})
    return PlantRecord(
        name=_mode([u.name for u in group]),
        fueltype=_mode([u.fueltype for u in group], key=lambda v: v.value),
        technology=_mode([u.technology for u in group], key=lambda v: v.value),
        set_type=_mode([u.set_type for u in group], key=lambda v: v.value),
        country=group[0].country,
        capacity_mw=sum((u.capacity_mw for u in group), Decimal(0)),
        source_id=group[0].source_id,
        project_id=min(ids),
        year_commissioned=min(years) if years else None,
        lat=lat,
        lon=lon,
        capacity_basis=group[0].capacity_basis,
        status=";".join(statuses),
        member_project_ids=ids,
    )


def aggregate_source(
    records: Sequence[UnitRecord],
    cfg: SimilarityConfig,
    workers: int = 1,
) -> list[PlantRecord]:
    return [merge_group(g) for g in cluster_units(records, cfg, workers)]
