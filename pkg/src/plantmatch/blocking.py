"""Candidate-pair generation and parallel pair scoring shared by aggregation and linkage."""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations, product
from typing import Sequence

import numpy as np
from rapidfuzz import fuzz, process
from rapidfuzz.distance import Levenshtein

from .model import UnitRecord, active_stop_tokens, canonical_name, set_stop_tokens
from .similarity import (
    SimilarityConfig,
    min_name_score_without_fuel_match,
    record_similarity,
    strip_block_tokens,
)

MIN_TOKEN_LEN = 4
CHUNK = 20000


def _name(rec: UnitRecord) -> str:
    return canonical_name(rec.name) if rec.name else ""


def _by_country(records: Sequence[UnitRecord]) -> dict[str, list[int]]:
    out: dict[str, list[int]] = defaultdict(list)
    for i, r in enumerate(records):
        out[r.country].append(i)
    return out


def _keys(rec: UnitRecord) -> set:
    keys = {("fuel", rec.fueltype)}
    keys.update(("tok", t) for t in _name(rec).split() if len(t) >= MIN_TOKEN_LEN)
    return keys


def _near_names(left: list[str], right: list[str], cutoff: float) -> np.ndarray:
    """Boolean matrix of name pairs whose similarity may reach ``cutoff``."""
    lev = process.cdist(left, right, scorer=Levenshtein.normalized_similarity,
                        score_cutoff=cutoff, dtype=np.float64)
    near = lev >= cutoff
    # token-set scores without the shared-token condition bound the real ones from above
    for lnames, rnames in ((left, right), ([strip_block_tokens(n) for n in left], [strip_block_tokens(n) for n in right])):
        tok = process.cdist(lnames, rnames, scorer=fuzz.token_set_ratio,
                            score_cutoff=cutoff * 100.0, dtype=np.float64)
        near |= tok >= cutoff * 100.0
    return near


def candidate_pairs(
    left: Sequence[UnitRecord],
    right: Sequence[UnitRecord] | None = None,
    cfg: SimilarityConfig | None = None,
) -> set[tuple[int, int]]:
    """
    Index pairs worth scoring.

    With ``right=None`` pairs are drawn within ``left`` (i < j); otherwise
    pairs are (index in left, index in right). A pair qualifies when both
    records share a country and either share a fuel type, share a name token
    of at least four characters, or (when ``cfg`` allows a fuel mismatch to
    reach its threshold) have names similar enough for that to happen.
    """
    within = right is None
    right = left if within else right
    cutoff = min_name_score_without_fuel_match(cfg) if cfg is not None else None
    out: set[tuple[int, int]] = set()
    lgroups, rgroups = _by_country(left), _by_country(right)

    for country, lidx in lgroups.items():
        ridx = rgroups.get(country)
        if not ridx:
            continue
        if cutoff is not None and cutoff <= 0.0:
            pairs = combinations(lidx, 2) if within else product(lidx, ridx)
            out.update(pairs)
            continue
        buckets_l: dict = defaultdict(list)
        for i in lidx:
            for k in _keys(left[i]):
                buckets_l[k].append(i)
        if within:
            for members in buckets_l.values():
                out.update(combinations(members, 2))
        else:
            buckets_r: dict = defaultdict(list)
            for j in ridx:
                for k in _keys(right[j]):
                    buckets_r[k].append(j)
            for k, members in buckets_l.items():
                if k in buckets_r:
                    out.update(product(members, buckets_r[k]))
        if cutoff is not None:
            lnames = [_name(left[i]) for i in lidx]
            rnames = lnames if within else [_name(right[j]) for j in ridx]
            near = _near_names(lnames, rnames, cutoff)
            for a, b in zip(*np.nonzero(near)):
                i, j = lidx[a], ridx[b]
                if within:
                    if i < j:
                        out.add((i, j))
                else:
                    out.add((i, j))
    return out


def _score_chunk(args) -> list[float]:
    pairs, cfg, stop_tokens = args
    set_stop_tokens(stop_tokens)
    return [record_similarity(a, b, cfg) for a, b in pairs]


def score_pairs(
    left: Sequence[UnitRecord],
    right: Sequence[UnitRecord],
    pairs: Sequence[tuple[int, int]],
    cfg: SimilarityConfig,
    workers: int = 1,
) -> list[float]:
    """Posterior for each index pair; identical for any worker count."""
    recs = [(left[i], right[j]) for i, j in pairs]
    if workers <= 1 or len(recs) < CHUNK:
        return [record_similarity(a, b, cfg) for a, b in recs]
    stop = active_stop_tokens()
    chunks = [(recs[k:k + CHUNK], cfg, stop) for k in range(0, len(recs), CHUNK)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [p for part in pool.map(_score_chunk, chunks) for p in part]
