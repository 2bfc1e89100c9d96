"""
Cross-source linkage of aggregated plants and joining of pairwise links into
chains with at most one plant per source.
"""

from __future__ import annotations

import json
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence

from .aggregate import components
from .blocking import candidate_pairs, score_pairs
from .model import PlantRecord
from .similarity import SimilarityConfig

logger = logging.getLogger(__name__)

# components with more links than this fall back to iterative weakest-link removal
EXACT_LIMIT = 48


@dataclass(frozen=True)
class DatasetLink:
    plant_a: PlantRecord
    plant_b: PlantRecord
    posterior: float

    def __post_init__(self):
        if self.plant_a.source_id == self.plant_b.source_id:
            raise ValueError("a dataset link must join two different sources")

    @property
    def source_a(self) -> str:
        return self.plant_a.source_id

    @property
    def source_b(self) -> str:
        return self.plant_b.source_id

    @property
    def keys(self) -> tuple[tuple[str, str], tuple[str, str]]:
        return self.plant_a.key, self.plant_b.key


@dataclass(frozen=True)
class LinkChain:
    members: dict = field(hash=False)  # source_id -> PlantRecord
    supporting_links: tuple[DatasetLink, ...] = ()
    chain_id: str = ""

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("a chain needs members from at least two sources")
        for src, plant in self.members.items():
            if plant.source_id != src:
                raise ValueError(f"member {plant.key} filed under source {src}")

    def posterior_support(self, source_id: str) -> float:
        key = self.members[source_id].key
        return max((l.posterior for l in self.supporting_links if key in l.keys), default=0.0)


def match_dataset_pair(
    A: Sequence[PlantRecord],
    B: Sequence[PlantRecord],
    cfg: SimilarityConfig,
    workers: int = 1,
) -> list[DatasetLink]:
    """
    One-to-one links between two sources: candidate pairs at or above the
    threshold are accepted greedily by descending posterior, then larger
    combined capacity, then plant names.
    """
    if not A or not B:
        return []
    if A[0].source_id > B[0].source_id:
        A, B = B, A
    pairs = sorted(candidate_pairs(A, B, cfg))
    scores = score_pairs(A, B, pairs, cfg, workers)
    hits = [(s, i, j) for (i, j), s in zip(pairs, scores) if s >= cfg.threshold]
    hits.sort(key=lambda h: (
        -h[0],
        -(A[h[1]].capacity_mw + B[h[2]].capacity_mw),
        A[h[1]].name, B[h[2]].name,
        A[h[1]].project_id, B[h[2]].project_id,
    ))
    used_a, used_b, links = set(), set(), []
    for s, i, j in hits:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        links.append(DatasetLink(A[i], B[j], s))
    links.sort(key=lambda l: l.keys)
    return links


def match_all(
    plants: Mapping[str, Sequence[PlantRecord]],
    cfg: SimilarityConfig,
    workers: int = 1,
) -> list[DatasetLink]:
    """Links for every pair of sources, in a fixed order."""
    results = [
        match_dataset_pair(plants[a], plants[b], cfg, workers)
        for a, b in combinations(sorted(plants), 2)
    ]
    return [l for part in results for l in part]


class _Components:
    """Union-find with undo, tracking the sources present in each component."""

    def __init__(self, sources: Sequence[str]):
        self.parent = list(range(len(sources)))
        self.srcs = [frozenset([s]) for s in sources]
        self.history: list = []

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def try_union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            self.history.append(None)
            return True
        if self.srcs[ra] & self.srcs[rb]:
            return False
        self.history.append((rb, ra, self.srcs[ra]))
        self.parent[rb] = ra
        self.srcs[ra] = self.srcs[ra] | self.srcs[rb]
        return True

    def undo(self) -> None:
        entry = self.history.pop()
        if entry is not None:
            rb, ra, old = entry
            self.parent[rb] = rb
            self.srcs[ra] = old


def _best_subset(sources: Sequence[str], edges: Sequence[tuple[int, int, float]]) -> list[int]:
    """
    Indices of the conflict-free edge subset with maximum total posterior.

    ``edges`` must be sorted by descending weight; on equal totals the subset
    that keeps earlier edges wins.
    """
    m = len(edges)
    suffix = [0.0] * (m + 1)
    for k in range(m - 1, -1, -1):
        suffix[k] = suffix[k + 1] + edges[k][2]
    comps = _Components(sources)
    best_total, best = -1.0, []
    chosen: list[int] = []

    def search(k: int, total: float) -> None:
        nonlocal best_total, best
        if total + suffix[k] <= best_total:
            return
        if k == m:
            best_total, best = total, list(chosen)
            return
        a, b, w = edges[k]
        if comps.try_union(a, b):
            chosen.append(k)
            search(k + 1, total + w)
            chosen.pop()
            comps.undo()
        search(k + 1, total)

    search(0, 0.0)
    return best


def _weakest_link_removal(sources: Sequence[str], edges: list[tuple[int, int, float]]) -> list[int]:
    """Drop the lowest-posterior link on a path between two same-source plants until none remain."""
    alive = set(range(len(edges)))
    while True:
        adj = defaultdict(list)
        for k in alive:
            a, b, _ = edges[k]
            adj[a].append((b, k))
            adj[b].append((a, k))
        conflict = None
        for comp in components(len(sources), [(edges[k][0], edges[k][1]) for k in alive]):
            seen = {}
            for node in comp:
                if sources[node] in seen:
                    conflict = (seen[sources[node]], node)
                    break
                seen[sources[node]] = node
            if conflict:
                break
        if conflict is None:
            return sorted(alive)
        start, goal = conflict
        prev = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for nxt, k in sorted(adj[node]):
                if nxt not in prev:
                    prev[nxt] = (node, k)
                    queue.append(nxt)
        path, node = [], goal
        while prev[node] is not None:
            node, k = prev[node]
            path.append(k)
        alive.remove(min(path, key=lambda k: (edges[k][2], -k)))


def join_chains(links: Sequence[DatasetLink]) -> list[LinkChain]:
    """
    Join pairwise links into chains with at most one plant per source.

    Linked components that would hold two plants of the same source are
    repaired by keeping the conflict-free subset of their links with the
    largest total posterior.
    """
    ordered = sorted(links, key=lambda l: (-l.posterior, l.keys))
    index: dict = {}
    plants: list[PlantRecord] = []
    for l in ordered:
        for p in (l.plant_a, l.plant_b):
            if p.key not in index:
                index[p.key] = len(plants)
                plants.append(p)
    edges = [(index[l.plant_a.key], index[l.plant_b.key]) for l in ordered]

    kept: list[int] = []
    by_comp: dict[int, list[int]] = defaultdict(list)
    ds_groups = components(len(plants), edges)
    label = {}
    for gi, g in enumerate(ds_groups):
        for node in g:
            label[node] = gi
    for k, (a, _) in enumerate(edges):
        by_comp[label[a]].append(k)

    for gi, group in enumerate(ds_groups):
        ks = by_comp.get(gi, [])
        srcs = [plants[n].source_id for n in group]
        if len(set(srcs)) == len(srcs):
            kept.extend(ks)
            continue
        local = {n: i for i, n in enumerate(group)}
        sub = [(local[edges[k][0]], local[edges[k][1]], ordered[k].posterior) for k in ks]
        if len(sub) <= EXACT_LIMIT:
            chosen = _best_subset(srcs, sub)
        else:
            logger.warning("conflict component with %d links; using weakest-link removal", len(sub))
            chosen = _weakest_link_removal(srcs, sub)
        kept.extend(ks[c] for c in chosen)

    kept_edges = [edges[k] for k in kept]
    chains = []
    for comp in components(len(plants), kept_edges):
        if len(comp) < 2:
            continue
        members = {plants[n].source_id: plants[n] for n in comp}
        assert len(members) == len(comp)
        node_set = set(comp)
        support = tuple(sorted(
            (ordered[k] for k in kept if edges[k][0] in node_set),
            key=lambda l: l.keys,
        ))
        chains.append((members, support))
    chains.sort(key=lambda c: sorted(p.key for p in c[0].values()))
    return [
        LinkChain(members=dict(sorted(m.items())), supporting_links=s, chain_id=f"C{i:06d}")
        for i, (m, s) in enumerate(chains, start=1)
    ]


def chains_to_json(chains: Sequence[LinkChain]) -> str:
    data = [
        {
            "chain_id": c.chain_id,
            "members": [
                {
                    "source_id": src,
                    "plant_id": p.project_id,
                    "project_ids": list(p.member_project_ids),
                    "posterior_support": c.posterior_support(src),
                }
                for src, p in c.members.items()
            ],
            "links": [
                {"a": list(l.plant_a.key), "b": list(l.plant_b.key), "posterior": l.posterior}
                for l in c.supporting_links
            ],
        }
        for c in chains
    ]
    return json.dumps(data, indent=1) + "\n"


def chains_from_json(text: str, plants: Mapping[tuple[str, str], PlantRecord]) -> list[LinkChain]:
    chains = []
    for item in json.loads(text):
        members = {m["source_id"]: plants[(m["source_id"], m["plant_id"])] for m in item["members"]}
        links = tuple(
            DatasetLink(plants[tuple(l["a"])], plants[tuple(l["b"])], float(l["posterior"]))
            for l in item.get("links", [])
        )
        chains.append(LinkChain(members=members, supporting_links=links, chain_id=item["chain_id"]))
    return chains


def write_links(links: Sequence[DatasetLink], path: Path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source_a", "project_id_a", "source_b", "project_id_b", "posterior"])
        for l in links:
            w.writerow([*l.plant_a.key, *l.plant_b.key, repr(l.posterior)])
