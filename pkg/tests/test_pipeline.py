import json
from pathlib import Path

import pytest

from trustnet import pipeline
from trustnet.pipeline import PipelineConfig, StageError, emit_figures, run_pipeline
from trustnet.synth import SyntheticSpec, generate_synthetic

SPEC = SyntheticSpec(users_per_block=60, publishers_per_pool=8, urls_per_publisher=6,
                     p_in=0.08, p_out=0.008, unc_fraction=0.25, seed=5)


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("inputs")
    generate_synthetic(SPEC, tmp / "posts.jsonl", tmp / "kb.csv")
    return tmp


def make_config(inputs, out, **kwargs):
    defaults = dict(
        posts=str(inputs / "posts.jsonl"),
        knowledge_base=str(inputs / "kb.csv"),
        out_dir=str(out),
        theta_max=6,
    )
    defaults.update(kwargs)
    return PipelineConfig(**defaults)


@pytest.fixture(scope="module")
def run(inputs, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    config = make_config(inputs, out)
    return run_pipeline(config), config


STAGE_FILES = {
    "ingest": ["meta.json", "interactions.csv", "share_events.csv", "publishers.csv"],
    "bicm": ["meta.json", "fitness.csv"],
    "projection": ["meta.json", "validated_edges.csv"],
    "nec": ["meta.json", "partition.csv", "nec_summary.csv", "purity.csv"],
    "voters": ["meta.json"],
    "classify": ["meta.json", "coverage.csv", "sweep.csv"],
    "figures": ["meta.json", *pipeline.FIGURE_FILES],
}


class TestRunArtifacts:
    def test_all_stage_files_present(self, run):
        result, _ = run
        for stage, files in STAGE_FILES.items():
            for name in files:
                assert (result.out_dir / stage / name).exists(), f"{stage}/{name}"
        assert (result.out_dir / "report.json").exists()

    def test_voter_tables_per_strategy_and_theta(self, run):
        result, config = run
        for strategy in config.strategies:
            for theta in config.thetas():
                path = result.out_dir / "voters" / f"voters_{strategy}_theta{theta:02d}.csv"
                assert path.exists()

    def test_stage_metas_carry_config_hash(self, run):
        result, config = run
        hashes = pipeline.stage_hashes(config)
        for stage in STAGE_FILES:
            meta = json.loads((result.out_dir / stage / "meta.json").read_text())
            assert meta["config_hash"] == hashes[stage]

    def test_validated_edges_have_observed_cooccurrence(self, run):
        from trustnet import projection

        result, _ = run
        counts = projection.cooccurrences(result.graph)
        index = result.graph.url_index
        for a, b, _ in result.network.edges:
            ia, ib = sorted((index[a], index[b]))
            assert counts[(ia, ib)] >= 1

    def test_partition_covers_all_articles(self, run):
        result, _ = run
        assert set(result.partition.assignment) == result.corpus.articles


class TestDeterminism:
    def test_reruns_are_byte_identical(self, inputs, tmp_path_factory):
        out1 = tmp_path_factory.mktemp("det1")
        out2 = tmp_path_factory.mktemp("det2")
        run_pipeline(make_config(inputs, out1, theta_max=3))
        run_pipeline(make_config(inputs, out2, theta_max=3))
        files1 = sorted(p.relative_to(out1) for p in Path(out1).rglob("*") if p.is_file())
        files2 = sorted(p.relative_to(out2) for p in Path(out2).rglob("*") if p.is_file())
        assert files1 == files2
        for rel in files1:
            assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel

    def test_cached_stages_are_reused(self, inputs, tmp_path_factory, caplog):
        out = tmp_path_factory.mktemp("cache")
        config = make_config(inputs, out, theta_max=2)
        run_pipeline(config)
        stamp = (out / "bicm" / "fitness.csv").stat().st_mtime_ns
        import logging

        with caplog.at_level(logging.INFO):
            run_pipeline(config)
        assert (out / "bicm" / "fitness.csv").stat().st_mtime_ns == stamp
        assert any("reusing cached" in m for m in caplog.messages)

    def test_changing_alpha_invalidates_projection_only(self, inputs, tmp_path_factory):
        out = tmp_path_factory.mktemp("inval")
        config = make_config(inputs, out, theta_max=2)
        run_pipeline(config)
        bicm_stamp = (out / "bicm" / "fitness.csv").stat().st_mtime_ns
        proj_stamp = (out / "projection" / "validated_edges.csv").stat().st_mtime_ns
        config2 = make_config(inputs, out, theta_max=2, alpha=0.01)
        run_pipeline(config2)
        assert (out / "bicm" / "fitness.csv").stat().st_mtime_ns == bicm_stamp
        assert (out / "projection" / "validated_edges.csv").stat().st_mtime_ns != proj_stamp


class TestModelPersistence:
    def test_round_trip_preserves_forced_links_and_fitness(self, tmp_path):
        import numpy as np

        from trustnet import bicm

        # u1 has full degree, so the model carries pinned links and inf fitness
        g = bicm.BipartiteGraph.from_links(
            [("u1", "a1"), ("u1", "a2"), ("u1", "a3"), ("u2", "a1"), ("u3", "a2")]
        )
        model = bicm.solve(g)
        stage_dir = tmp_path / "bicm"
        rows = [
            (uid, "user", int(g.user_degrees[i]), float(model.x[i]))
            for i, uid in enumerate(g.user_ids)
        ] + [
            (aid, "url", int(g.url_degrees[j]), float(model.y[j]))
            for j, aid in enumerate(g.url_ids)
        ]
        pipeline.write_csv(
            stage_dir / "fitness.csv", ["node_id", "layer", "degree", "fitness"], rows
        )
        pipeline.write_json(
            stage_dir / "meta.json",
            {
                "config_hash": "x",
                "tol": model.tol,
                "iterations": model.iterations,
                "residual": model.residual,
                "forced_links": sorted([i, a] for i, a in model.forced_links),
            },
        )
        loaded = pipeline.load_model(stage_dir, g)
        assert loaded.forced_links == model.forced_links
        assert np.array_equal(loaded.x, model.x)
        assert np.array_equal(loaded.y, model.y)
        assert np.array_equal(
            bicm.probability_matrix(loaded), bicm.probability_matrix(model)
        )


class TestStageErrors:
    def test_missing_knowledge_base_fails_at_ingest(self, inputs, tmp_path):
        config = make_config(inputs, tmp_path / "out")
        config.knowledge_base = str(tmp_path / "missing.csv")
        with pytest.raises(StageError) as err:
            run_pipeline(config)
        assert err.value.stage == "ingest"

    def test_bad_posts_fail_with_stage_name(self, inputs, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("not json at all\n")
        config = make_config(inputs, tmp_path / "out", posts=str(bad))
        with pytest.raises(StageError) as err:
            run_pipeline(config)
        assert err.value.stage == "ingest"

    def test_emit_figures_lists_missing_stages(self, inputs, tmp_path):
        config = make_config(inputs, tmp_path / "empty-run")
        (tmp_path / "empty-run").mkdir()
        with pytest.raises(ValueError, match="missing stages"):
            emit_figures(config)


class TestFigureTables:
    def read_rows(self, path):
        import csv

        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            return list(reader)

    def test_nec_knowledge_constant_for_nec_strategy(self, run):
        result, _ = run
        rows = self.read_rows(result.out_dir / "figures" / "fig_knowledge_vs_theta.csv")
        values = {r["knowledge"] for r in rows if r["strategy"] == "DS-URL-NEC"}
        assert len(values) == 1

    def test_theta_zero_coverage_equals_unfiltered(self, run):
        from trustnet import classify

        result, config = run
        rows = self.read_rows(result.out_dir / "figures" / "fig_coverage_vs_theta.csv")
        for kind, profiles in result.profiles.items():
            cov = classify.coverage(profiles, result.corpus, result.kb)
            for level in ("T", "N", "UNC"):
                row = next(
                    r
                    for r in rows
                    if r["strategy"] == kind.value
                    and r["theta"] == "0"
                    and r["level"] == level
                )
                assert int(row["covered"]) == cov.covered[classify.Label(level)]

    def test_voter_counts_nonincreasing_in_theta(self, run):
        result, _ = run
        rows = self.read_rows(result.out_dir / "figures" / "fig_voters_vs_theta.csv")
        by_strategy = {}
        for r in rows:
            by_strategy.setdefault(r["strategy"], []).append(
                (int(r["theta"]), int(r["n_voters"]))
            )
        for series in by_strategy.values():
            series.sort()
            counts = [c for _, c in series]
            assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_coverage_identical_across_ds_strategies(self, run):
        from trustnet import classify

        result, _ = run
        from trustnet.voters import StrategyKind

        cov_all = classify.coverage(
            result.profiles[StrategyKind.DS_ALL], result.corpus, result.kb
        )
        cov_nec = classify.coverage(
            result.profiles[StrategyKind.DS_URL_NEC], result.corpus, result.kb
        )
        assert cov_all.covered == cov_nec.covered

    def test_emit_figures_matches_run_output(self, run, inputs, tmp_path_factory):
        result, config = run
        before = {
            name: (result.out_dir / "figures" / name).read_bytes()
            for name in pipeline.FIGURE_FILES
        }
        emit_figures(config)
        for name, blob in before.items():
            assert (result.out_dir / "figures" / name).read_bytes() == blob


class TestReportDocument:
    def test_report_contains_every_section(self, run):
        result, _ = run
        report = json.loads((result.out_dir / "report.json").read_text())
        for key in ("config", "ingest", "bicm", "projection", "nec", "classify"):
            assert key in report
        assert report["projection"]["n_edges"] == result.network.n_edges

    def test_nec_summary_table_matches_report(self, run):
        import csv

        result, _ = run
        with open(result.out_dir / "nec" / "nec_summary.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        report = json.loads((result.out_dir / "report.json").read_text())
        assert len(rows) == len(report["nec"]["summary"])
        for row, entry in zip(rows, report["nec"]["summary"]):
            assert int(row["n_users"]) == entry["n_users"]
