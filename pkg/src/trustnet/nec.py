"""News Engagement Communities: Louvain partition of the validated URL network.

Includes the purity metrics that quantify how homogeneous each community is
with respect to publisher trust labels, and per-community summary statistics.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field

from .ingest import Corpus, KnowledgeBase, Label, url_labels
from .projection import ValidatedNetwork

UNCLUSTERED = -1


@dataclass
class Partition:
    """URL -> community id; -1 marks URLs outside every community."""

    assignment: dict[str, int]
    modularity: float
    pass_modularities: list[float] = field(default_factory=list)

    def members(self, community: int) -> set[str]:
        return {u for u, c in self.assignment.items() if c == community}

    def community_ids(self) -> list[int]:
        return sorted({c for c in self.assignment.values() if c != UNCLUSTERED})


@dataclass(frozen=True)
class NecRow:
    community: int
    n_users: int
    n_distinct_urls: int
    n_publishers: int
    n_shares: int


def _edge_weights(network: ValidatedNetwork, weighted: bool) -> dict[tuple[str, str], float]:
    weights: dict[tuple[str, str], float] = {}
    for a, b, pval in network.edges:
        key = (a, b) if a < b else (b, a)
        if weighted:
            w = -math.log10(pval) if pval > 0 else 350.0
        else:
            w = 1.0
        weights[key] = w
    return weights


class _LevelGraph:
    """Aggregated graph for one Louvain level (self-weights kept separate)."""

    def __init__(self, n: int):
        self.n = n
        self.adj: list[dict[int, float]] = [dict() for _ in range(n)]
        self.loops = [0.0] * n

    def add_edge(self, i: int, j: int, w: float) -> None:
        if i == j:
            self.loops[i] += 2.0 * w
            return
        self.adj[i][j] = self.adj[i].get(j, 0.0) + w
        self.adj[j][i] = self.adj[j].get(i, 0.0) + w

    def degrees(self) -> list[float]:
        return [sum(nbrs.values()) + self.loops[i] for i, nbrs in enumerate(self.adj)]

    def total_weight2(self) -> float:
        return sum(self.degrees())


def _one_level(graph: _LevelGraph, rng: random.Random, min_gain: float = 1e-12):
    """Sequential local moves until no node improves its community.

    Returns (community per node, modularity after each sweep, whether any
    node moved). Ties between equally good target communities break toward
    the smaller community id; a tie with the current community means stay.
    """
    n = graph.n
    deg = graph.degrees()
    two_w = sum(deg)
    comm = list(range(n))
    sigma_tot = deg.copy()
    sigma_in = graph.loops.copy()
    order = list(range(n))
    rng.shuffle(order)

    def sweep_modularity() -> float:
        q = 0.0
        for c in range(n):
            if sigma_tot[c] > 0 or sigma_in[c] > 0:
                q += sigma_in[c] / two_w - (sigma_tot[c] / two_w) ** 2
        return q

    pass_q: list[float] = []
    moved_any = False
    while True:
        moves = 0
        for node in order:
            c_old = comm[node]
            w_comm: dict[int, float] = defaultdict(float)
            for nbr, w in graph.adj[node].items():
                w_comm[comm[nbr]] += w
            k_i = deg[node]
            sigma_tot[c_old] -= k_i
            sigma_in[c_old] -= 2.0 * w_comm.get(c_old, 0.0) + graph.loops[node]

            def gain(c: int) -> float:
                # modularity gain of joining c, rescaled by the constant W
                return w_comm.get(c, 0.0) - sigma_tot[c] * k_i / two_w

            best_c = c_old
            best_gain = gain(c_old)
            for c in sorted(w_comm):
                if c == c_old:
                    continue
                if gain(c) > best_gain + min_gain:
                    best_c, best_gain = c, gain(c)
            sigma_tot[best_c] += k_i
            sigma_in[best_c] += 2.0 * w_comm.get(best_c, 0.0) + graph.loops[node]
            comm[node] = best_c
            if best_c != c_old:
                moves += 1
                moved_any = True
        pass_q.append(sweep_modularity())
        if moves == 0:
            break
    return comm, pass_q, moved_any


def _aggregate(graph: _LevelGraph, comm: list[int]) -> tuple[_LevelGraph, dict[int, int]]:
    ids = sorted(set(comm))
    remap = {c: i for i, c in enumerate(ids)}
    agg = _LevelGraph(len(ids))
    for i in range(graph.n):
        ci = remap[comm[i]]
        agg.loops[ci] += graph.loops[i]
        for j, w in graph.adj[i].items():
            cj = remap[comm[j]]
            if ci == cj:
                if i < j:
                    agg.loops[ci] += 2.0 * w
            else:
                agg.adj[ci][cj] = agg.adj[ci].get(cj, 0.0) + w
    return agg, remap


def louvain(
    network: ValidatedNetwork,
    seed: int = 0,
    weighted: bool = False,
    resolution: float = 1.0,
) -> Partition:
    """Two-phase Louvain on the validated URL network.

    Deterministic for a fixed seed: the node visit order at each level is a
    seeded shuffle of the sorted id order. URLs of the tested universe that
    carry no validated edge are assigned the reserved community -1.
    """
    if resolution != 1.0:
        raise NotImplementedError("only resolution 1.0 is supported")
    assignment = {u: UNCLUSTERED for u in network.urls}
    weights = _edge_weights(network, weighted)
    if not weights:
        return Partition(assignment=assignment, modularity=0.0)

    nodes = sorted(network.validated_urls())
    index = {u: i for i, u in enumerate(nodes)}
    level = _LevelGraph(len(nodes))
    for (a, b), w in sorted(weights.items()):
        level.add_edge(index[a], index[b], w)

    rng = random.Random(seed)
    node_comm = list(range(len(nodes)))
    pass_modularities: list[float] = []
    while True:
        comm, pass_q, moved = _one_level(level, rng)
        pass_modularities.extend(pass_q)
        node_comm = [comm[c] for c in node_comm]
        if not moved:
            break
        level, remap = _aggregate(level, comm)
        node_comm = [remap[c] for c in node_comm]

    final = _relabel({nodes[i]: c for i, c in enumerate(node_comm)}, weights)
    assignment.update(final)
    q = modularity_of_edges(weights, assignment)
    return Partition(
        assignment=assignment,
        modularity=q,
        pass_modularities=pass_modularities,
    )


def _relabel(
    raw: dict[str, int], weights: dict[tuple[str, str], float]
) -> dict[str, int]:
    """Contiguous ids from 0, largest community first; singletons merged away.

    A validated URL always has a neighbor, so a surviving singleton community
    joins the neighbor community it is most strongly connected to (ties break
    toward the smaller community label).
    """
    groups: dict[int, set[str]] = defaultdict(set)
    for u, c in raw.items():
        groups[c].add(u)
    nbrs: dict[str, dict[str, float]] = defaultdict(dict)
    for (a, b), w in weights.items():
        nbrs[a][b] = w
        nbrs[b][a] = w
    for c in sorted(groups, key=lambda c: min(groups[c])):
        if len(groups[c]) != 1:
            continue
        (lone,) = groups[c]
        cand = sorted(
            (-w, raw[v], v) for v, w in nbrs[lone].items() if raw[v] != c
        )
        if not cand:
            continue
        target = cand[0][1]
        groups[c].discard(lone)
        groups[target].add(lone)
        raw[lone] = target
    ordered = sorted(
        (c for c in groups if groups[c]),
        key=lambda c: (-len(groups[c]), min(groups[c])),
    )
    remap = {c: i for i, c in enumerate(ordered)}
    return {u: remap[c] for u, c in raw.items()}


def modularity_of_edges(
    weights: dict[tuple[str, str], float], assignment: dict[str, int]
) -> float:
    """Q = sum_c (m_c / m - (d_c / 2m)^2) over the given undirected edges."""
    two_m = 0.0
    d_c: dict[int, float] = defaultdict(float)
    m_c: dict[int, float] = defaultdict(float)
    for (a, b), w in weights.items():
        two_m += 2.0 * w
        ca, cb = assignment[a], assignment[b]
        d_c[ca] += w
        d_c[cb] += w
        if ca == cb:
            m_c[ca] += w
    if two_m == 0.0:
        return 0.0
    m = two_m / 2.0
    return sum(m_c[c] / m - (d_c[c] / two_m) ** 2 for c in d_c)


def modularity(network: ValidatedNetwork, assignment: dict[str, int]) -> float:
    """Modularity of an assignment on the (unweighted) validated network."""
    for a, b, _ in network.edges:
        if a not in assignment or b not in assignment:
            raise ValueError("assignment must cover every network node")
    return modularity_of_edges(_edge_weights(network, weighted=False), assignment)


def purity(
    partition: Partition,
    community: int,
    corpus: Corpus,
    kb: KnowledgeBase,
    level: Label,
) -> float:
    """Share of a community's URLs whose publisher carries the given label.

    Unclassified URLs count in the denominator only.
    """
    members = partition.members(community)
    if not members:
        raise ValueError(f"community {community} does not exist")
    labels = url_labels(corpus, kb)
    hits = sum(1 for u in members if labels.get(u) == level)
    return hits / len(members)


def overall_purity(
    partition: Partition, corpus: Corpus, kb: KnowledgeBase, level: Label
) -> float:
    """Pooled label share over all non-reserved communities."""
    labels = url_labels(corpus, kb)
    total = 0
    hits = 0
    for u, c in partition.assignment.items():
        if c == UNCLUSTERED:
            continue
        total += 1
        if labels.get(u) == level:
            hits += 1
    if total == 0:
        raise ValueError("partition has no communities")
    return hits / total


def unclustered_purity(
    partition: Partition, corpus: Corpus, kb: KnowledgeBase, level: Label
) -> float:
    """Label share within the reserved -1 bucket."""
    labels = url_labels(corpus, kb)
    members = [u for u, c in partition.assignment.items() if c == UNCLUSTERED]
    if not members:
        raise ValueError("no unclustered URLs")
    hits = sum(1 for u in members if labels.get(u) == level)
    return hits / len(members)


def nec_summary(partition: Partition, corpus: Corpus) -> list[NecRow]:
    """Per-community engagement statistics, largest user base first."""
    urls_of: dict[int, set[str]] = defaultdict(set)
    for u, c in partition.assignment.items():
        if c != UNCLUSTERED:
            urls_of[c].add(u)
    users_of: dict[int, set[str]] = defaultdict(set)
    url_comm = {
        u: c for u, c in partition.assignment.items() if c != UNCLUSTERED
    }
    for user, url, _ in corpus.interactions:
        c = url_comm.get(url)
        if c is not None:
            users_of[c].add(user)
    shares_of: dict[int, int] = defaultdict(int)
    for _, url, _ in corpus.share_events:
        c = url_comm.get(url)
        if c is not None:
            shares_of[c] += 1
    rows = [
        NecRow(
            community=c,
            n_users=len(users_of[c]),
            n_distinct_urls=len(urls),
            n_publishers=len({corpus.url_publisher[u] for u in urls}),
            n_shares=shares_of[c],
        )
        for c, urls in urls_of.items()
    ]
    rows.sort(key=lambda r: (-r.n_users, r.community))
    return rows
