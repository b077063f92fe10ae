"""End-to-end orchestration: stages, persistence, caching, figure tables.

Every stage writes its outputs under one run directory together with a
meta.json carrying the hash of the configuration slice that produced it.
Reruns with an unchanged slice reuse the persisted artifacts. All outputs
are plain CSV/JSON written deterministically: identical inputs, config and
seeds yield byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import bicm, classify, nec, projection, voters as voters_mod
from .ingest import (
    Corpus,
    KnowledgeBase,
    Label,
    build_corpus,
    load_knowledge_base,
    load_posts,
)
from .voters import ALL_STRATEGIES, StrategyKind, VoterProfile

log = logging.getLogger(__name__)

class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    posts: str = ""
    knowledge_base: str = ""
    out_dir: str = "run"
    alpha: float = 0.05
    solver_tol: float = 1e-8
    solver_max_iter: int = 10_000
    louvain_seed: int = 0
    resolution: float = 1.0
    strategies: tuple[str, ...] = tuple(s.value for s in ALL_STRATEGIES)
    theta_min: int = 0
    theta_max: int = 30
    cv_folds: int = 10
    cv_seed: int = 0
    reduce_to_etld1: bool = False
    pvalue_method: str = "exact"
    weighted_louvain: bool = False

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        data.update({k: v for k, v in overrides.items() if v is not None})
        if "strategies" in data:
            data["strategies"] = tuple(data["strategies"])
        return cls(**data)

    def thetas(self) -> range:
        return range(self.theta_min, self.theta_max + 1)

    def strategy_kinds(self) -> list[StrategyKind]:
        return [StrategyKind(s) for s in self.strategies]


def _sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _hash_obj(obj) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        # plain-float repr; numpy scalars would otherwise leak their type name
        return repr(float(value))
    if isinstance(value, Label):
        return value.value
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _read_meta(stage_dir: Path) -> dict | None:
    meta_path = stage_dir / "meta.json"
    if not meta_path.exists():
        return None
    with open(meta_path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _stage_cached(stage_dir: Path, stage_hash: str, files: list[str]) -> bool:
    meta = _read_meta(stage_dir)
    if meta is None or meta.get("config_hash") != stage_hash:
        return False
    return all((stage_dir / f).exists() for f in files)


# ---------------------------------------------------------------------------
# ingest stage

def stage_ingest(config: PipelineConfig, out: Path, stage_hash: str) -> tuple[Corpus, KnowledgeBase, dict]:
    stage_dir = out / "ingest"
    kb = load_knowledge_base(config.knowledge_base)
    if _stage_cached(stage_dir, stage_hash, ["interactions.csv", "share_events.csv"]):
        log.info("ingest: reusing cached artifacts")
        return load_corpus(stage_dir), kb, _read_meta(stage_dir)
    posts, malformed = load_posts(config.posts)
    corpus = build_corpus(posts, reduce_to_etld1=config.reduce_to_etld1)
    if not corpus.interactions:
        raise ValueError("corpus is empty after ingest")
    write_csv(
        stage_dir / "interactions.csv",
        ["user_id", "url", "publisher"],
        sorted(corpus.interactions),
    )
    write_csv(
        stage_dir / "share_events.csv",
        ["user_id", "url", "post_id"],
        sorted(corpus.share_events),
    )
    write_csv(
        stage_dir / "publishers.csv",
        ["domain", "score", "label"],
        [
            (p, kb.score(p), kb.label(p))
            for p in sorted(corpus.publishers)
        ],
    )
    label_counts = {level.value: 0 for level in Label}
    for p in corpus.publishers:
        label_counts[kb.label(p).value] += 1
    meta = {
        "config_hash": stage_hash,
        "n_posts": len(posts),
        "n_malformed": malformed,
        "n_skipped_urls": corpus.skipped_urls,
        "n_users": len(corpus.users),
        "n_articles": len(corpus.articles),
        "n_publishers": len(corpus.publishers),
        "n_interactions": len(corpus.interactions),
        "n_share_events": len(corpus.share_events),
        "publisher_labels": label_counts,
    }
    write_json(stage_dir / "meta.json", meta)
    return corpus, kb, meta


def load_corpus(stage_dir: Path) -> Corpus:
    interactions: set[tuple[str, str, str]] = set()
    url_publisher: dict[str, str] = {}
    with open(stage_dir / "interactions.csv", encoding="utf-8", newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            user, url, publisher = row
            interactions.add((user, url, publisher))
            url_publisher[url] = publisher
    share_events = []
    with open(stage_dir / "share_events.csv", encoding="utf-8", newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            share_events.append((row[0], row[1], row[2]))
    return Corpus(
        interactions=interactions,
        share_events=share_events,
        url_publisher=url_publisher,
    )


# ---------------------------------------------------------------------------
# bicm stage

def stage_bicm(
    config: PipelineConfig, corpus: Corpus, out: Path, stage_hash: str
) -> tuple[bicm.BipartiteGraph, bicm.BicmModel]:
    stage_dir = out / "bicm"
    graph = bicm.build_graph(corpus)
    if _stage_cached(stage_dir, stage_hash, ["fitness.csv"]):
        log.info("bicm: reusing cached artifacts")
        return graph, load_model(stage_dir, graph)
    model = bicm.solve(graph, tol=config.solver_tol, max_iter=config.solver_max_iter)
    rows = [
        (uid, "user", int(graph.user_degrees[i]), float(model.x[i]))
        for i, uid in enumerate(graph.user_ids)
    ] + [
        (aid, "url", int(graph.url_degrees[j]), float(model.y[j]))
        for j, aid in enumerate(graph.url_ids)
    ]
    write_csv(stage_dir / "fitness.csv", ["node_id", "layer", "degree", "fitness"], rows)
    write_json(
        stage_dir / "meta.json",
        {
            "config_hash": stage_hash,
            "tol": config.solver_tol,
            "max_iter": config.solver_max_iter,
            "iterations": model.iterations,
            "residual": model.residual,
            "forced_links": sorted([i, a] for i, a in model.forced_links),
            "n_users": graph.n_users,
            "n_urls": graph.n_urls,
            "n_links": graph.n_links,
        },
    )
    return graph, model


def load_model(stage_dir: Path, graph: bicm.BipartiteGraph) -> bicm.BicmModel:
    meta = _read_meta(stage_dir)
    fitness: dict[tuple[str, str], float] = {}
    with open(stage_dir / "fitness.csv", encoding="utf-8", newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            fitness[(row[1], row[0])] = float(row[3])
    x = np.array([fitness[("user", u)] for u in graph.user_ids])
    y = np.array([fitness[("url", a)] for a in graph.url_ids])
    return bicm.BicmModel(
        user_ids=graph.user_ids,
        url_ids=graph.url_ids,
        user_degrees=graph.user_degrees.copy(),
        url_degrees=graph.url_degrees.copy(),
        x=x,
        y=y,
        forced_links=frozenset((int(i), int(a)) for i, a in meta["forced_links"]),
        residual=float(meta["residual"]),
        iterations=int(meta["iterations"]),
        tol=float(meta["tol"]),
    )


# ---------------------------------------------------------------------------
# projection stage

def stage_projection(
    config: PipelineConfig,
    graph: bicm.BipartiteGraph,
    model: bicm.BicmModel,
    out: Path,
    stage_hash: str,
) -> projection.ValidatedNetwork:
    stage_dir = out / "projection"
    if _stage_cached(stage_dir, stage_hash, ["validated_edges.csv"]):
        log.info("projection: reusing cached artifacts")
        return load_validated(stage_dir, graph)
    network = projection.validate_projection(
        graph, model, alpha=config.alpha, method=config.pvalue_method
    )
    write_csv(
        stage_dir / "validated_edges.csv",
        ["url_a", "url_b", "pvalue"],
        [(a, b, p) for a, b, p in network.edges],
    )
    write_json(
        stage_dir / "meta.json",
        {
            "config_hash": stage_hash,
            "alpha": network.alpha,
            "n_hypotheses": network.n_hypotheses,
            "bh_threshold": network.bh_threshold,
            "n_tested": network.n_tested,
            "n_edges": network.n_edges,
            "n_validated_urls": len(network.validated_urls()),
        },
    )
    return network


def load_validated(stage_dir: Path, graph: bicm.BipartiteGraph) -> projection.ValidatedNetwork:
    meta = _read_meta(stage_dir)
    edges = []
    with open(stage_dir / "validated_edges.csv", encoding="utf-8", newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            edges.append((row[0], row[1], float(row[2])))
    return projection.ValidatedNetwork(
        urls=graph.url_ids,
        edges=edges,
        alpha=float(meta["alpha"]),
        n_hypotheses=int(meta["n_hypotheses"]),
        bh_threshold=float(meta["bh_threshold"]),
        n_tested=int(meta["n_tested"]),
    )


# ---------------------------------------------------------------------------
# nec stage

def stage_nec(
    config: PipelineConfig,
    network: projection.ValidatedNetwork,
    corpus: Corpus,
    kb: KnowledgeBase,
    out: Path,
    stage_hash: str,
) -> nec.Partition:
    stage_dir = out / "nec"
    if _stage_cached(stage_dir, stage_hash, ["partition.csv"]):
        log.info("nec: reusing cached artifacts")
        return load_partition(stage_dir)
    partition = nec.louvain(
        network,
        seed=config.louvain_seed,
        weighted=config.weighted_louvain,
        resolution=config.resolution,
    )
    write_csv(
        stage_dir / "partition.csv",
        ["url", "community"],
        sorted(partition.assignment.items()),
    )
    rows = nec.nec_summary(partition, corpus)
    write_csv(
        stage_dir / "nec_summary.csv",
        ["community", "n_users", "n_distinct_urls", "n_publishers", "n_shares"],
        [(r.community, r.n_users, r.n_distinct_urls, r.n_publishers, r.n_shares) for r in rows],
    )
    purity_rows = []
    for c in partition.community_ids():
        purity_rows.append(
            (
                str(c),
                nec.purity(partition, c, corpus, kb, Label.T),
                nec.purity(partition, c, corpus, kb, Label.N),
            )
        )
    if partition.community_ids():
        purity_rows.append(
            (
                "overall",
                nec.overall_purity(partition, corpus, kb, Label.T),
                nec.overall_purity(partition, corpus, kb, Label.N),
            )
        )
    if any(c == nec.UNCLUSTERED for c in partition.assignment.values()):
        purity_rows.append(
            (
                "unclustered",
                nec.unclustered_purity(partition, corpus, kb, Label.T),
                nec.unclustered_purity(partition, corpus, kb, Label.N),
            )
        )
    write_csv(stage_dir / "purity.csv", ["community", "purity_T", "purity_N"], purity_rows)
    write_json(
        stage_dir / "meta.json",
        {
            "config_hash": stage_hash,
            "modularity": partition.modularity,
            "pass_modularities": partition.pass_modularities,
            "n_communities": len(partition.community_ids()),
            "n_unclustered": sum(
                1 for c in partition.assignment.values() if c == nec.UNCLUSTERED
            ),
            "louvain_seed": config.louvain_seed,
        },
    )
    return partition


def load_partition(stage_dir: Path) -> nec.Partition:
    meta = _read_meta(stage_dir)
    assignment = {}
    with open(stage_dir / "partition.csv", encoding="utf-8", newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            assignment[row[0]] = int(row[1])
    return nec.Partition(
        assignment=assignment,
        modularity=float(meta["modularity"]),
        pass_modularities=list(meta["pass_modularities"]),
    )


# ---------------------------------------------------------------------------
# voters stage

def stage_voters(
    config: PipelineConfig,
    corpus: Corpus,
    network: projection.ValidatedNetwork,
    kb: KnowledgeBase,
    out: Path,
    stage_hash: str,
) -> dict[StrategyKind, list[VoterProfile]]:
    stage_dir = out / "voters"
    profiles = {
        kind: voters_mod.build_voter_profiles(kind, corpus, network, kb)
        for kind in config.strategy_kinds()
    }
    if not _stage_cached(stage_dir, stage_hash, []):
        for kind, profs in profiles.items():
            for theta in config.thetas():
                surviving = voters_mod.filter_min_publishers(profs, theta)
                write_csv(
                    stage_dir / f"voters_{kind.value}_theta{theta:02d}.csv",
                    ["user_id", "strategy", "value", "diet", "n_articles"],
                    [
                        (v.user_id, v.strategy.value, v.value, v.diet, len(v.articles))
                        for v in surviving
                    ],
                )
        write_json(
            stage_dir / "meta.json",
            {
                "config_hash": stage_hash,
                "strategies": [k.value for k in profiles],
                "thetas": list(config.thetas()),
                "n_voters": {k.value: len(v) for k, v in profiles.items()},
            },
        )
    return profiles


# ---------------------------------------------------------------------------
# classify stage and sweep

@dataclass
class SweepPoint:
    strategy: str
    theta: int
    n_voters: int
    covered: dict[str, int]
    balanced_accuracy_mean: float | None
    balanced_accuracy_std: float | None
    knowledge: int


def _knowledge_needed(
    kind: StrategyKind,
    surviving: list[VoterProfile],
    corpus: Corpus,
    network: projection.ValidatedNetwork,
    kb: KnowledgeBase,
) -> int:
    """Distinct labeled publishers required to characterize the voter set."""
    if kind is StrategyKind.DS_URL_NEC:
        pubs = {corpus.url_publisher[u] for u in network.validated_urls()}
    else:
        pubs = set()
        for v in surviving:
            pubs.update(corpus.url_publisher[u] for u in v.articles)
    return sum(1 for p in pubs if kb.label(p) is not Label.UNC)


def _cv_samples(scores: list[classify.PublisherScore]) -> list[tuple[float, Label]]:
    return [(s.score, s.kb_label) for s in scores if s.kb_label is not Label.UNC]


def compute_sweep(
    config: PipelineConfig,
    corpus: Corpus,
    network: projection.ValidatedNetwork,
    kb: KnowledgeBase,
    profiles: dict[StrategyKind, list[VoterProfile]],
) -> list[SweepPoint]:
    points = []
    for kind, profs in profiles.items():
        for theta in config.thetas():
            surviving = voters_mod.filter_min_publishers(profs, theta)
            valued = [v for v in surviving if v.value is not None]
            cov = classify.coverage(surviving, corpus, kb)
            scores = classify.publisher_scores(valued, corpus, kb)
            samples = _cv_samples(scores)
            try:
                report = classify.stratified_cv(
                    samples, folds=config.cv_folds, seed=config.cv_seed
                )
                mean = report.mean_balanced_accuracy
                std = report.std_balanced_accuracy
            except ValueError:
                mean = std = None
            points.append(
                SweepPoint(
                    strategy=kind.value,
                    theta=theta,
                    n_voters=len(surviving),
                    covered={l.value: cov.covered[l] for l in Label},
                    balanced_accuracy_mean=mean,
                    balanced_accuracy_std=std,
                    knowledge=_knowledge_needed(kind, surviving, corpus, network, kb),
                )
            )
    return points


def stage_classify(
    config: PipelineConfig,
    corpus: Corpus,
    network: projection.ValidatedNetwork,
    kb: KnowledgeBase,
    profiles: dict[StrategyKind, list[VoterProfile]],
    out: Path,
    stage_hash: str,
) -> tuple[dict, list[SweepPoint]]:
    stage_dir = out / "classify"
    results: dict = {"strategies": {}, "sweep": []}
    coverage_rows = []
    for kind, profs in profiles.items():
        valued = [v for v in profs if v.value is not None]
        scores = classify.publisher_scores(valued, corpus, kb)
        cov = classify.coverage(profs, corpus, kb)
        samples = _cv_samples(scores)
        cv_report = None
        try:
            cv_report = classify.stratified_cv(
                samples, folds=config.cv_folds, seed=config.cv_seed
            )
        except ValueError as exc:
            log.warning("classify %s: CV skipped (%s)", kind.value, exc)
        worthy = classify.worthy_list(scores, kb)
        stump = None
        try:
            stump = classify.fit_stump(samples)
        except ValueError:
            pass
        write_csv(
            stage_dir / f"scores_{kind.value}.csv",
            ["domain", "score", "n_voters", "kb_label", "predicted"],
            [
                (
                    s.domain,
                    s.score,
                    s.n_voters,
                    s.kb_label,
                    stump.predict(s.score) if stump else None,
                )
                for s in scores
            ],
        )
        write_csv(
            stage_dir / f"worthy_{kind.value}.csv",
            ["domain", "score", "n_voters", "predicted"],
            [(w.domain, w.score, w.n_voters, w.predicted) for w in worthy],
        )
        cv_json = None
        if cv_report is not None:
            cv_json = {
                "folds": cv_report.folds,
                "baseline": cv_report.baseline,
                "confusion": [
                    {"tp": r.tp, "fn": r.fn, "tn": r.tn, "fp": r.fp}
                    for r in cv_report.results
                ],
                "balanced_accuracy": cv_report.balanced_accuracies,
                "mean": cv_report.mean_balanced_accuracy,
                "std": cv_report.std_balanced_accuracy,
            }
        write_json(stage_dir / f"cv_{kind.value}.json", cv_json or {})
        coverage_rows.append(
            (
                kind.value,
                cov.percentage(Label.T),
                cov.percentage(Label.N),
                cov.percentage(Label.UNC),
            )
        )
        results["strategies"][kind.value] = {
            "n_voters": len(profs),
            "n_valued_voters": len(valued),
            "coverage": {
                "covered": {l.value: cov.covered[l] for l in Label},
                "universe": {l.value: cov.universe[l] for l in Label},
                "percentage": {l.value: cov.percentage(l) for l in Label},
            },
            "cv": cv_json,
            "worthy": [
                {
                    "domain": w.domain,
                    "score": w.score,
                    "n_voters": w.n_voters,
                    "predicted": w.predicted.value if w.predicted else None,
                }
                for w in worthy
            ],
        }
    write_csv(stage_dir / "coverage.csv", ["strategy", "T", "N", "UNC"], coverage_rows)

    sweep = compute_sweep(config, corpus, network, kb, profiles)
    write_csv(
        stage_dir / "sweep.csv",
        [
            "strategy",
            "theta",
            "n_voters",
            "covered_T",
            "covered_N",
            "covered_UNC",
            "balanced_accuracy_mean",
            "balanced_accuracy_std",
            "knowledge",
        ],
        [
            (
                p.strategy,
                p.theta,
                p.n_voters,
                p.covered["T"],
                p.covered["N"],
                p.covered["UNC"],
                p.balanced_accuracy_mean,
                p.balanced_accuracy_std,
                p.knowledge,
            )
            for p in sweep
        ],
    )
    results["sweep"] = [asdict(p) for p in sweep]
    write_json(stage_dir / "meta.json", {"config_hash": stage_hash})
    return results, sweep


# ---------------------------------------------------------------------------
# figures stage

def stage_figures(
    config: PipelineConfig,
    corpus: Corpus,
    kb: KnowledgeBase,
    partition: nec.Partition,
    sweep: list[SweepPoint],
    out: Path,
    stage_hash: str,
) -> None:
    stage_dir = out / "figures"
    purity_rows = []
    for c in partition.community_ids():
        members = partition.members(c)
        purity_rows.append(
            (
                c,
                len(members),
                nec.purity(partition, c, corpus, kb, Label.T),
                nec.purity(partition, c, corpus, kb, Label.N),
            )
        )
    write_csv(
        stage_dir / "fig_nec_purity.csv",
        ["community", "n_urls", "purity_T", "purity_N"],
        purity_rows,
    )
    write_csv(
        stage_dir / "fig_voters_vs_theta.csv",
        ["strategy", "theta", "n_voters"],
        [(p.strategy, p.theta, p.n_voters) for p in sweep],
    )
    coverage_rows = []
    for p in sweep:
        for level in ("T", "N", "UNC"):
            coverage_rows.append((p.strategy, p.theta, level, p.covered[level]))
    write_csv(
        stage_dir / "fig_coverage_vs_theta.csv",
        ["strategy", "theta", "level", "covered"],
        coverage_rows,
    )
    write_csv(
        stage_dir / "fig_balanced_accuracy_vs_theta.csv",
        ["strategy", "theta", "balanced_accuracy_mean", "balanced_accuracy_std"],
        [
            (p.strategy, p.theta, p.balanced_accuracy_mean, p.balanced_accuracy_std)
            for p in sweep
        ],
    )
    write_csv(
        stage_dir / "fig_knowledge_vs_theta.csv",
        ["strategy", "theta", "knowledge"],
        [(p.strategy, p.theta, p.knowledge) for p in sweep],
    )
    write_json(stage_dir / "meta.json", {"config_hash": stage_hash})


FIGURE_FILES = (
    "fig_nec_purity.csv",
    "fig_voters_vs_theta.csv",
    "fig_coverage_vs_theta.csv",
    "fig_balanced_accuracy_vs_theta.csv",
    "fig_knowledge_vs_theta.csv",
)


def load_sweep(stage_dir: Path) -> list[SweepPoint]:
    points = []
    with open(stage_dir / "sweep.csv", encoding="utf-8", newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            points.append(
                SweepPoint(
                    strategy=row[0],
                    theta=int(row[1]),
                    n_voters=int(row[2]),
                    covered={"T": int(row[3]), "N": int(row[4]), "UNC": int(row[5])},
                    balanced_accuracy_mean=float(row[6]) if row[6] else None,
                    balanced_accuracy_std=float(row[7]) if row[7] else None,
                    knowledge=int(row[8]),
                )
            )
    return points


def emit_figures(config: PipelineConfig) -> Path:
    """Figure tables from a completed run's persisted stage artifacts."""
    out = Path(config.out_dir)
    required = {
        "ingest": ["meta.json", "interactions.csv", "share_events.csv"],
        "nec": ["meta.json", "partition.csv"],
        "classify": ["meta.json", "sweep.csv"],
    }
    missing = [
        stage
        for stage, names in required.items()
        if not all((out / stage / n).exists() for n in names)
    ]
    if missing:
        raise ValueError(f"incomplete run, missing stages: {', '.join(missing)}")
    corpus = load_corpus(out / "ingest")
    kb = load_knowledge_base(config.knowledge_base)
    partition = load_partition(out / "nec")
    sweep = load_sweep(out / "classify")
    hashes = stage_hashes(config)
    stage_figures(config, corpus, kb, partition, sweep, out, hashes["figures"])
    return out / "figures"


# ---------------------------------------------------------------------------
# hashes and the full run

def stage_hashes(config: PipelineConfig) -> dict[str, str]:
    """Chained hashes of the configuration slice feeding each stage."""
    posts_sha = _sha256_file(config.posts)
    kb_sha = _sha256_file(config.knowledge_base)
    h: dict[str, str] = {}
    h["ingest"] = _hash_obj(
        {"stage": "ingest", "posts": posts_sha, "kb": kb_sha,
         "etld1": config.reduce_to_etld1}
    )
    h["bicm"] = _hash_obj(
        {"stage": "bicm", "parent": h["ingest"], "tol": config.solver_tol,
         "max_iter": config.solver_max_iter}
    )
    h["projection"] = _hash_obj(
        {"stage": "projection", "parent": h["bicm"], "alpha": config.alpha,
         "method": config.pvalue_method}
    )
    h["nec"] = _hash_obj(
        {"stage": "nec", "parent": h["projection"], "seed": config.louvain_seed,
         "resolution": config.resolution, "weighted": config.weighted_louvain}
    )
    h["voters"] = _hash_obj(
        {"stage": "voters", "parent": h["projection"],
         "strategies": list(config.strategies),
         "theta": [config.theta_min, config.theta_max]}
    )
    h["classify"] = _hash_obj(
        {"stage": "classify", "parent": h["voters"],
         "cv_folds": config.cv_folds, "cv_seed": config.cv_seed}
    )
    h["figures"] = _hash_obj(
        {"stage": "figures", "parents": [h["nec"], h["classify"]]}
    )
    return h


@dataclass
class PipelineResult:
    out_dir: Path
    corpus: Corpus
    kb: KnowledgeBase
    graph: bicm.BipartiteGraph
    model: bicm.BicmModel
    network: projection.ValidatedNetwork
    partition: nec.Partition
    profiles: dict[StrategyKind, list[VoterProfile]]
    report: dict = field(default_factory=dict)


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Execute every stage in order, persisting artifacts under out_dir."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    stage = "ingest"
    try:
        hashes = stage_hashes(config)
        corpus, kb, ingest_meta = stage_ingest(config, out, hashes["ingest"])
    except Exception as exc:
        raise StageError(stage, exc) from exc
    stage = "bicm"
    try:
        graph, model = stage_bicm(config, corpus, out, hashes["bicm"])
    except Exception as exc:
        raise StageError(stage, exc) from exc
    stage = "projection"
    try:
        network = stage_projection(config, graph, model, out, hashes["projection"])
    except Exception as exc:
        raise StageError(stage, exc) from exc
    stage = "nec"
    try:
        partition = stage_nec(config, network, corpus, kb, out, hashes["nec"])
    except Exception as exc:
        raise StageError(stage, exc) from exc
    stage = "voters"
    try:
        profiles = stage_voters(config, corpus, network, kb, out, hashes["voters"])
    except Exception as exc:
        raise StageError(stage, exc) from exc
    stage = "classify"
    try:
        results, sweep = stage_classify(
            config, corpus, network, kb, profiles, out, hashes["classify"]
        )
    except Exception as exc:
        raise StageError(stage, exc) from exc
    stage = "figures"
    try:
        stage_figures(config, corpus, kb, partition, sweep, out, hashes["figures"])
    except Exception as exc:
        raise StageError(stage, exc) from exc

    # paths are machine-specific; the report carries content hashes instead
    config_echo = {**asdict(config), "strategies": list(config.strategies)}
    for key in ("posts", "knowledge_base", "out_dir"):
        config_echo.pop(key, None)
    report = {
        "config": config_echo,
        "inputs": {
            "posts_sha256": _sha256_file(config.posts),
            "knowledge_base_sha256": _sha256_file(config.knowledge_base),
        },
        "stage_hashes": hashes,
        "ingest": {k: v for k, v in ingest_meta.items() if k != "config_hash"},
        "bicm": {
            "iterations": model.iterations,
            "residual": model.residual,
            "n_users": graph.n_users,
            "n_urls": graph.n_urls,
            "n_links": graph.n_links,
            "n_forced_links": len(model.forced_links),
        },
        "projection": {
            "alpha": network.alpha,
            "n_hypotheses": network.n_hypotheses,
            "n_tested": network.n_tested,
            "n_edges": network.n_edges,
            "bh_threshold": network.bh_threshold,
            "n_validated_urls": len(network.validated_urls()),
        },
        "nec": {
            "modularity": partition.modularity,
            "n_communities": len(partition.community_ids()),
            "summary": [
                {
                    "community": r.community,
                    "n_users": r.n_users,
                    "n_distinct_urls": r.n_distinct_urls,
                    "n_publishers": r.n_publishers,
                    "n_shares": r.n_shares,
                }
                for r in nec.nec_summary(partition, corpus)
            ],
        },
        "classify": results,
    }
    write_json(out / "report.json", report)
    return PipelineResult(
        out_dir=out,
        corpus=corpus,
        kb=kb,
        graph=graph,
        model=model,
        network=network,
        partition=partition,
        profiles=profiles,
        report=report,
    )
