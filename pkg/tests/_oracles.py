"""Exhaustive reference implementations used to check the optimized code paths."""

from __future__ import annotations

from itertools import combinations, permutations

import networkx as nx


def conflict_free(nodes_source: dict, edges) -> bool:
    graph = nx.Graph()
    graph.add_nodes_from(nodes_source)
    graph.add_edges_from((a, b) for a, b, _ in edges)
    for comp in nx.connected_components(graph):
        srcs = [nodes_source[n] for n in comp]
        if len(srcs) != len(set(srcs)):
            return False
    return True


def best_chains(links) -> tuple[float, set[frozenset]]:
    """
    Maximum retained posterior mass over all conflict-free link subsets, with
    the chains (as sets of plant keys) of the best subset. Each connected
    component of the link graph is solved independently by enumerating every
    subset of its links.
    """
    source_of = {}
    for l in links:
        for p in (l.plant_a, l.plant_b):
            source_of[p.key] = p.source_id
    graph = nx.Graph()
    for l in links:
        graph.add_edge(l.plant_a.key, l.plant_b.key, w=l.posterior)
    total, chains = 0.0, set()
    for comp in nx.connected_components(graph):
        sub = [(a, b, d["w"]) for a, b, d in graph.subgraph(comp).edges(data=True)]
        local = {n: source_of[n] for n in comp}
        best, best_set = -1.0, None
        for r in range(len(sub), -1, -1):
            for subset in combinations(sub, r):
                mass = sum(w for _, _, w in subset)
                if mass > best and conflict_free(local, subset):
                    best, best_set = mass, subset
        total += best
        kept = nx.Graph()
        kept.add_edges_from((a, b) for a, b, _ in best_set)
        chains |= {frozenset(c) for c in nx.connected_components(kept) if len(c) > 1}
    return total, chains


def best_one_to_one(scores: dict) -> float:
    """Largest total posterior of a one-to-one assignment between two small sides."""
    left = sorted({a for a, _ in scores})
    right = sorted({b for _, b in scores})
    best = 0.0
    for k in range(min(len(left), len(right)) + 1):
        for ls in combinations(left, k):
            for rs in permutations(right, k):
                if all((a, b) in scores for a, b in zip(ls, rs)):
                    best = max(best, sum(scores[(a, b)] for a, b in zip(ls, rs)))
    return best
