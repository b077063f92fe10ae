"""Bipartite user-URL graph and its degree-constrained maximum-entropy null model.

The null model assigns every (user, URL) pair an independent link probability
p = x_i * y_a / (1 + x_i * y_a), with per-node fitnesses x, y chosen so the
expected degree of every node matches its observed degree. Equal-degree nodes
share one unknown, so the solve runs on the much smaller degree-class system.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse


class ConvergenceError(RuntimeError):
    """Solver failed to reach tolerance; carries the best residual seen."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass
class BipartiteGraph:
    """Binary user-URL graph with both degree sequences precomputed."""

    user_ids: tuple[str, ...]
    url_ids: tuple[str, ...]
    biadjacency: sparse.csr_matrix
    user_degrees: np.ndarray
    url_degrees: np.ndarray

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_urls(self) -> int:
        return len(self.url_ids)

    @property
    def n_links(self) -> int:
        return int(self.user_degrees.sum())

    @property
    def user_index(self) -> dict[str, int]:
        return {u: i for i, u in enumerate(self.user_ids)}

    @property
    def url_index(self) -> dict[str, int]:
        return {a: j for j, a in enumerate(self.url_ids)}

    @classmethod
    def from_links(
        cls,
        links: Iterable[tuple[str, str]],
        user_order: Sequence[str] | None = None,
        url_order: Sequence[str] | None = None,
    ) -> "BipartiteGraph":
        """Build from (user_id, url_id) pairs; zero-degree nodes are dropped."""
        pairs = set(links)
        if not pairs:
            raise ValueError("cannot build a bipartite graph with no links")
        linked_users = {u for u, _ in pairs}
        linked_urls = {a for _, a in pairs}
        if user_order is None:
            users = tuple(sorted(linked_users))
        else:
            users = tuple(u for u in user_order if u in linked_users)
        if url_order is None:
            urls = tuple(sorted(linked_urls))
        else:
            urls = tuple(a for a in url_order if a in linked_urls)
        uidx = {u: i for i, u in enumerate(users)}
        aidx = {a: j for j, a in enumerate(urls)}
        rows = np.fromiter((uidx[u] for u, _ in pairs), dtype=np.int64, count=len(pairs))
        cols = np.fromiter((aidx[a] for _, a in pairs), dtype=np.int64, count=len(pairs))
        data = np.ones(len(pairs), dtype=np.int8)
        adj = sparse.csr_matrix((data, (rows, cols)), shape=(len(users), len(urls)))
        return cls(
            user_ids=users,
            url_ids=urls,
            biadjacency=adj,
            user_degrees=np.asarray(adj.sum(axis=1)).ravel().astype(np.int64),
            url_degrees=np.asarray(adj.sum(axis=0)).ravel().astype(np.int64),
        )


def build_graph(corpus) -> BipartiteGraph:
    """One link per corpus interaction; multiplicities collapse to a binary link."""
    if not corpus.interactions:
        raise ValueError("empty corpus")
    links = {(user, url) for user, url, _ in corpus.interactions}
    return BipartiteGraph.from_links(
        links,
        user_order=sorted(corpus.users),
        url_order=sorted(corpus.articles),
    )


@dataclass
class BicmModel:
    """Solved null model: fitness per node plus links pinned to probability 1.

    A pinned (degenerate) node's fitness is stored as ``inf``; nodes whose
    remaining degree was fully explained by pinned partners carry fitness 0.
    """

    user_ids: tuple[str, ...]
    url_ids: tuple[str, ...]
    user_degrees: np.ndarray
    url_degrees: np.ndarray
    x: np.ndarray
    y: np.ndarray
    forced_links: frozenset[tuple[int, int]]
    residual: float
    iterations: int
    tol: float

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_urls(self) -> int:
        return len(self.url_ids)


def _reduce_degenerate(k: np.ndarray, d: np.ndarray):
    """Pin full-degree nodes to probability-1 links and peel exhausted nodes.

    Returns (active_users, active_urls, remaining user degrees, remaining URL
    degrees, forced link index pairs, pinned user set, pinned URL set).
    Iterates because pinning can cascade.
    """
    k = k.astype(np.int64).copy()
    d = d.astype(np.int64).copy()
    active_u = np.ones(k.size, dtype=bool)
    active_a = np.ones(d.size, dtype=bool)
    forced: list[tuple[int, int]] = []
    pinned_users: set[int] = set()
    pinned_urls: set[int] = set()
    changed = True
    while changed:
        changed = False
        m_eff = int(active_a.sum())
        full_u = active_u & (k == m_eff) & (k > 0)
        if full_u.any():
            url_idx = np.where(active_a)[0]
            for i in np.where(full_u)[0]:
                pinned_users.add(int(i))
                forced.extend((int(i), int(a)) for a in url_idx)
            d[active_a] -= int(full_u.sum())
            k[full_u] = 0
            active_u[full_u] = False
            changed = True
        n_eff = int(active_u.sum())
        full_a = active_a & (d == n_eff) & (d > 0)
        if full_a.any():
            user_idx = np.where(active_u)[0]
            for a in np.where(full_a)[0]:
                pinned_urls.add(int(a))
                forced.extend((int(i), int(a)) for i in user_idx)
            k[active_u] -= int(full_a.sum())
            d[full_a] = 0
            active_a[full_a] = False
            changed = True
        dead_u = active_u & (k == 0)
        if dead_u.any():
            active_u[dead_u] = False
            changed = True
        dead_a = active_a & (d == 0)
        if dead_a.any():
            active_a[dead_a] = False
            changed = True
    return active_u, active_a, k, d, forced, pinned_users, pinned_urls


def _class_residual(xs, ys, ks, ds, ck, ed) -> float:
    xy = np.outer(xs, ys)
    p = xy / (1.0 + xy)
    row = (ed[None, :] * p).sum(axis=1)
    col = (ck[:, None] * p).sum(axis=0)
    err_u = np.abs(row - ks) / ks
    err_a = np.abs(col - ds) / ds
    return float(max(err_u.max(initial=0.0), err_a.max(initial=0.0)))


def _newton_polish(xs, ys, ks, ds, ck, ed, tol, max_steps=60):
    """Damped Newton on the log-fitness class system.

    The product gauge (x -> c*x, y -> y/c) leaves all probabilities unchanged,
    so the Jacobian has a null direction; the least-squares solve picks the
    minimum-norm step.
    """
    K = xs.size
    z = np.concatenate([np.log(xs), np.log(ys)])
    best = _class_residual(xs, ys, ks, ds, ck, ed)
    for _ in range(max_steps):
        xs = np.exp(z[:K])
        ys = np.exp(z[K:])
        xy = np.outer(xs, ys)
        p = xy / (1.0 + xy)
        w = p * (1.0 - p)
        f_u = (ed[None, :] * p).sum(axis=1) - ks
        f_a = (ck[:, None] * p).sum(axis=0) - ds
        f = np.concatenate([f_u, f_a])
        jac = np.block([
            [np.diag((ed[None, :] * w).sum(axis=1)), ed[None, :] * w],
            [(ck[:, None] * w).T, np.diag((ck[:, None] * w).sum(axis=0))],
        ])
        step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        scale = 1.0
        for _ in range(40):
            trial = z + scale * step
            txs = np.exp(trial[:K])
            tys = np.exp(trial[K:])
            res = _class_residual(txs, tys, ks, ds, ck, ed)
            if res < best:
                z = trial
                best = res
                break
            scale *= 0.5
        else:
            break
        if best <= tol:
            break
    return np.exp(z[:K]), np.exp(z[K:]), best


def solve(graph: BipartiteGraph, tol: float = 1e-8, max_iter: int = 10_000) -> BicmModel:
    """Fit the null model so every expected degree matches its constraint.

    Deterministic: fixed initialization x = k / sqrt(links), alternating
    fixed-point sweeps on the degree-class system, Newton polish if the sweep
    stalls. Raises ConvergenceError if the max relative degree error stays
    above ``tol`` after ``max_iter`` sweeps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")

    n, m = graph.n_users, graph.n_urls
    active_u, active_a, k_eff, d_eff, forced, pinned_users, pinned_urls = (
        _reduce_degenerate(graph.user_degrees, graph.url_degrees)
    )
    x = np.zeros(n)
    y = np.zeros(m)

    iterations = 0
    residual = 0.0
    if active_u.any():
        uk = k_eff[active_u].astype(float)
        ud = d_eff[active_a].astype(float)
        ks, k_inv = np.unique(uk, return_inverse=True)
        ds, d_inv = np.unique(ud, return_inverse=True)
        ck = np.bincount(k_inv).astype(float)
        ed = np.bincount(d_inv).astype(float)
        total = uk.sum()
        xs = ks / np.sqrt(total)
        ys = ds / np.sqrt(total)

        best = np.inf
        stall = 0
        for iterations in range(1, max_iter + 1):
            denom_x = (ed[None, :] * ys[None, :] / (1.0 + np.outer(xs, ys))).sum(axis=1)
            xs = ks / denom_x
            denom_y = (ck[:, None] * xs[:, None] / (1.0 + np.outer(xs, ys))).sum(axis=0)
            ys = ds / denom_y
            residual = _class_residual(xs, ys, ks, ds, ck, ed)
            if residual <= tol:
                break
            if residual < best * 0.9:
                best = residual
                stall = 0
            else:
                stall += 1
            if stall >= 25:
                xs, ys, residual = _newton_polish(xs, ys, ks, ds, ck, ed, tol)
                break
        if residual > tol:
            xs, ys, residual = _newton_polish(xs, ys, ks, ds, ck, ed, tol)
        if residual > tol:
            raise ConvergenceError(
                f"degree residual {residual:.3e} > tol {tol:.3e} "
                f"after {iterations} sweeps",
                residual,
            )
        x[active_u] = xs[k_inv]
        y[active_a] = ys[d_inv]

    for i in pinned_users:
        x[i] = np.inf
    for a in pinned_urls:
        y[a] = np.inf

    return BicmModel(
        user_ids=graph.user_ids,
        url_ids=graph.url_ids,
        user_degrees=graph.user_degrees.copy(),
        url_degrees=graph.url_degrees.copy(),
        x=x,
        y=y,
        forced_links=frozenset(forced),
        residual=residual,
        iterations=iterations,
        tol=tol,
    )


def link_probability(model: BicmModel, user: int, url: int) -> float:
    """Probability of the (user, url) link under the null model."""
    if not 0 <= user < model.n_users:
        raise IndexError(f"user row {user} out of range")
    if not 0 <= url < model.n_urls:
        raise IndexError(f"url column {url} out of range")
    if (user, url) in model.forced_links:
        return 1.0
    xi = model.x[user]
    ya = model.y[url]
    if np.isinf(xi) or np.isinf(ya):
        # Non-forced pair with a pinned node: the partner was already peeled
        # out of the system (fitness 0), so the link cannot occur.
        return 0.0
    t = xi * ya
    return float(t / (1.0 + t))


def probability_matrix(model: BicmModel) -> np.ndarray:
    """Dense matrix of link probabilities (forced links pinned to 1)."""
    finite_x = np.where(np.isinf(model.x), 0.0, model.x)
    finite_y = np.where(np.isinf(model.y), 0.0, model.y)
    t = np.outer(finite_x, finite_y)
    p = t / (1.0 + t)
    for i, a in model.forced_links:
        p[i, a] = 1.0
    return p


def expected_degrees(model: BicmModel) -> tuple[np.ndarray, np.ndarray]:
    p = probability_matrix(model)
    return p.sum(axis=1), p.sum(axis=0)


def degree_residual(model: BicmModel) -> float:
    """Max relative degree error recomputed from the full probability matrix."""
    exp_k, exp_d = expected_degrees(model)
    err_u = np.abs(exp_k - model.user_degrees) / model.user_degrees
    err_a = np.abs(exp_d - model.url_degrees) / model.url_degrees
    return float(max(err_u.max(), err_a.max()))


def sample(model: BicmModel, seed: int) -> BipartiteGraph:
    """Draw one graph from the ensemble; each link is an independent Bernoulli."""
    rng = np.random.default_rng(seed)
    p = probability_matrix(model)
    hits = rng.random(p.shape) < p
    rows, cols = np.nonzero(hits)
    links = [(model.user_ids[i], model.url_ids[a]) for i, a in zip(rows, cols)]
    if not links:
        return BipartiteGraph(
            user_ids=(),
            url_ids=(),
            biadjacency=sparse.csr_matrix((0, 0), dtype=np.int8),
            user_degrees=np.zeros(0, dtype=np.int64),
            url_degrees=np.zeros(0, dtype=np.int64),
        )
    return BipartiteGraph.from_links(
        links, user_order=model.user_ids, url_order=model.url_ids
    )
