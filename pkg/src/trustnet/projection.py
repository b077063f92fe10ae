"""Statistical validation of URL co-occurrences against the null model.

For every URL pair sharing at least one user, the observed co-occurrence
count is compared to its null distribution: a sum of independent Bernoulli
variables with success probabilities p_{i,a} * p_{i,b} (one per user). The
resulting p-values go through a Benjamini-Hochberg scan sized to all possible
URL pairs; surviving pairs form the validated monopartite URL network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .bicm import BicmModel, BipartiteGraph, probability_matrix


@dataclass(frozen=True)
class PairTest:
    url_a: int
    url_b: int
    observed: int
    pvalue: float


@dataclass
class ValidatedNetwork:
    """URL pairs that co-occurred significantly more than the null predicts.

    ``urls`` is the full tested universe (every URL of the bipartite graph);
    the validated node set A_val contains only URLs incident to a surviving
    edge and is exposed as :meth:`validated_urls`.
    """

    urls: tuple[str, ...]
    edges: list[tuple[str, str, float]]
    alpha: float
    n_hypotheses: int
    bh_threshold: float
    n_tested: int = 0

    def validated_urls(self) -> set[str]:
        nodes: set[str] = set()
        for a, b, _ in self.edges:
            nodes.add(a)
            nodes.add(b)
        return nodes

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def cooccurrences(graph: BipartiteGraph) -> dict[tuple[int, int], int]:
    """Count common users for every URL column pair, sparse on pairs >= 1.

    Keys are (column_a, column_b) with a < b.
    """
    adj = graph.biadjacency.astype(np.int32)
    overlap = (adj.T @ adj).tocoo()
    counts: dict[tuple[int, int], int] = {}
    for a, b, v in zip(overlap.row, overlap.col, overlap.data):
        if a < b and v > 0:
            counts[(int(a), int(b))] = int(v)
    return counts


def poisson_binomial_tail(probs, k: int) -> float:
    """P(sum of independent Bernoulli(probs) >= k), by exact convolution.

    Only the probability mass below k is tracked (O(n*k) work); the tail is
    one minus its compensated sum. k = 0 returns 1 exactly.
    """
    p = np.asarray(probs, dtype=float)
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    n = p.size
    if not 0 <= k <= n + 1:
        raise ValueError(f"k={k} outside [0, {n + 1}]")
    if k == 0:
        return 1.0
    if k == n + 1:
        return 0.0
    pmf = np.zeros(k)
    pmf[0] = 1.0
    for q in p:
        pmf[1:] = pmf[1:] * (1.0 - q) + pmf[:-1] * q
        pmf[0] *= 1.0 - q
    below = math.fsum(pmf)
    return max(0.0, 1.0 - below)


def batch_tails(prob_matrix: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Vectorized tails for many pair tests sharing the same user axis.

    ``prob_matrix`` holds one row of per-user success probabilities per test,
    ``ks`` the observed count per test. Same convolution as
    :func:`poisson_binomial_tail`, batched over rows with a common truncation.
    """
    ks = np.asarray(ks, dtype=np.int64)
    n_tests, n_users = prob_matrix.shape
    out = np.ones(n_tests)
    todo = ks > 0
    if not todo.any():
        return out
    kmax = int(ks[todo].max())
    pmf = np.zeros((n_tests, kmax))
    pmf[:, 0] = 1.0
    for j in range(n_users):
        q = prob_matrix[:, j][:, None]
        pmf[:, 1:] = pmf[:, 1:] * (1.0 - q) + pmf[:, :-1] * q
        pmf[:, 0:1] *= 1.0 - q
    for i in np.where(todo)[0]:
        below = math.fsum(pmf[i, : ks[i]])
        out[i] = max(0.0, 1.0 - below)
    return out


def poisson_tail(rate: float, k: int) -> float:
    """Poisson approximation to the co-occurrence tail (opt-in fast path)."""
    if k == 0:
        return 1.0
    return float(stats.poisson.sf(k - 1, rate))


def pair_pvalue(
    model: BicmModel,
    pair: tuple[int, int],
    observed: int,
    method: str = "exact",
) -> PairTest:
    """Null tail probability of the observed co-occurrence for one URL pair.

    Under the null the two links of user i occur independently, so the
    per-user success probability is p_{i,a} * p_{i,b}.
    """
    a, b = pair
    p = probability_matrix(model)
    q = p[:, a] * p[:, b]
    if method == "exact":
        pval = poisson_binomial_tail(q, observed)
    elif method == "poisson":
        pval = poisson_tail(float(q.sum()), observed)
    else:
        raise ValueError(f"unknown method {method!r}")
    return PairTest(url_a=a, url_b=b, observed=observed, pvalue=pval)


def pair_pvalues(
    graph: BipartiteGraph,
    model: BicmModel,
    method: str = "exact",
    batch_size: int = 2048,
) -> list[PairTest]:
    """Tests for every URL pair with at least one observed co-occurrence."""
    counts = cooccurrences(graph)
    if not counts:
        return []
    pairs = sorted(counts)
    observed = np.array([counts[p] for p in pairs], dtype=np.int64)
    p = probability_matrix(model)
    tests: list[PairTest] = []
    if method == "poisson":
        for (a, b), obs in zip(pairs, observed):
            rate = float((p[:, a] * p[:, b]).sum())
            tests.append(PairTest(a, b, int(obs), poisson_tail(rate, int(obs))))
        return tests
    for start in range(0, len(pairs), batch_size):
        chunk = pairs[start : start + batch_size]
        ks = observed[start : start + batch_size]
        cols_a = np.array([a for a, _ in chunk])
        cols_b = np.array([b for _, b in chunk])
        q = p[:, cols_a].T * p[:, cols_b].T
        tails = batch_tails(q, ks)
        tests.extend(
            PairTest(int(a), int(b), int(k), float(t))
            for (a, b), k, t in zip(chunk, ks, tails)
        )
    return tests


def bh_scan(pvalues: np.ndarray, alpha: float, n_hypotheses: int) -> tuple[int, float]:
    """Largest rank r with p_(r) <= r * alpha / M over the realized p-values.

    Hypotheses beyond the realized list implicitly carry p = 1 and can never
    be rejected (r * alpha / M <= alpha < 1), so scanning the realized values
    with their global ranks is exact.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if n_hypotheses < pvalues.size:
        raise ValueError("n_hypotheses smaller than number of realized tests")
    order = np.sort(pvalues)
    ranks = np.arange(1, order.size + 1)
    passing = order <= ranks * alpha / n_hypotheses
    if not passing.any():
        return 0, 0.0
    r = int(np.max(np.where(passing)[0])) + 1
    return r, float(order[r - 1])


def bh_validate(
    tests: list[PairTest],
    alpha: float,
    n_hypotheses: int,
    graph: BipartiteGraph,
) -> ValidatedNetwork:
    """Benjamini-Hochberg control over all possible URL pairs.

    Pairs with p-values at or below the realized cutoff become validated
    edges (ties at the boundary included).
    """
    pvals = np.array([t.pvalue for t in tests], dtype=float)
    rank, threshold = bh_scan(pvals, alpha, n_hypotheses) if tests else (0, 0.0)
    if not tests:
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
    edges = []
    if rank > 0:
        for t in sorted(tests, key=lambda t: (t.url_a, t.url_b)):
            if t.pvalue <= threshold:
                edges.append(
                    (graph.url_ids[t.url_a], graph.url_ids[t.url_b], t.pvalue)
                )
    return ValidatedNetwork(
        urls=graph.url_ids,
        edges=edges,
        alpha=alpha,
        n_hypotheses=n_hypotheses,
        bh_threshold=threshold,
        n_tested=len(tests),
    )


def validate_projection(
    graph: BipartiteGraph,
    model: BicmModel,
    alpha: float = 0.05,
    method: str = "exact",
) -> ValidatedNetwork:
    """Full projection: count, test, correct. M = C(n_urls, 2)."""
    n_hyp = graph.n_urls * (graph.n_urls - 1) // 2
    tests = pair_pvalues(graph, model, method=method)
    return bh_validate(tests, alpha, n_hyp, graph)
