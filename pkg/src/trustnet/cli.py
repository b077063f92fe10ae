"""Command line entry point.

Subcommands mirror the pipeline stages; ``run`` executes all of them.
Options can come from a JSON config file (--config) with any flag given on
the command line taking precedence. Each stage failure maps to its own exit
code so callers can tell where a run died.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import pipeline
from .pipeline import PipelineConfig, StageError
from .synth import SyntheticSpec, generate_synthetic

EXIT_CODES = {
    "ingest": 10,
    "bicm": 11,
    "projection": 12,
    "nec": 13,
    "voters": 14,
    "classify": 15,
    "synth": 16,
    "figures": 17,
}

# stages each subcommand executes (cached upstream stages are reused)
STAGE_COMMANDS = {
    "ingest": ("ingest",),
    "solve": ("ingest", "bicm"),
    "validate": ("ingest", "bicm", "projection"),
    "communities": ("ingest", "bicm", "projection", "nec"),
    "voters": ("ingest", "bicm", "projection", "voters"),
    "classify": ("ingest", "bicm", "projection", "voters", "classify"),
}


def _add_config_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--posts", help="posts JSONL file")
    p.add_argument("--knowledge-base", dest="knowledge_base", help="domain,score CSV")
    p.add_argument("--out", dest="out_dir", help="run directory for all artifacts")
    p.add_argument("--alpha", type=float, help="FDR significance level (default 0.05)")
    p.add_argument("--tol", dest="solver_tol", type=float, help="solver tolerance")
    p.add_argument("--max-iter", dest="solver_max_iter", type=int)
    p.add_argument("--louvain-seed", dest="louvain_seed", type=int)
    p.add_argument("--theta-min", dest="theta_min", type=int)
    p.add_argument("--theta-max", dest="theta_max", type=int)
    p.add_argument("--cv-folds", dest="cv_folds", type=int)
    p.add_argument("--cv-seed", dest="cv_seed", type=int)
    p.add_argument(
        "--strategy",
        action="append",
        dest="strategies",
        help="restrict to a strategy (repeatable)",
    )
    p.add_argument(
        "--pvalue-method",
        dest="pvalue_method",
        choices=("exact", "poisson"),
        help="co-occurrence tail computation",
    )
    p.add_argument(
        "--etld1",
        dest="reduce_to_etld1",
        action="store_const",
        const=True,
        help="reduce publisher domains to their registrable part",
    )
    p.add_argument(
        "--weighted-louvain",
        dest="weighted_louvain",
        action="store_const",
        const=True,
        help="weight validated edges by -log10 p",
    )


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    overrides = {}
    for f in fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    if "strategies" in overrides:
        overrides["strategies"] = tuple(overrides["strategies"])
    if args.config:
        return PipelineConfig.from_file(args.config, **overrides)
    return PipelineConfig(**overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trustnet",
        description="Classify news publisher trustworthiness from sharing networks",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in [
        ("ingest", "parse posts and the knowledge base into a corpus"),
        ("solve", "fit the bipartite null model"),
        ("validate", "compute co-occurrence p-values and the FDR projection"),
        ("communities", "detect news engagement communities"),
        ("voters", "build voter tables for every strategy and threshold"),
        ("classify", "score and classify publishers"),
        ("run", "run the full pipeline"),
        ("figures", "emit figure data tables for a completed run"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_config_options(p)

    p = sub.add_parser("synth", help="generate a planted synthetic corpus")
    p.add_argument("--out-posts", required=True)
    p.add_argument("--out-kb", required=True)
    p.add_argument("--seed", type=int, default=SyntheticSpec.seed)
    p.add_argument("--users-per-block", type=int, default=SyntheticSpec.users_per_block)
    p.add_argument(
        "--publishers-per-pool", type=int, default=SyntheticSpec.publishers_per_pool
    )
    p.add_argument(
        "--urls-per-publisher", type=int, default=SyntheticSpec.urls_per_publisher
    )
    p.add_argument("--p-in", type=float, default=SyntheticSpec.p_in)
    p.add_argument("--p-out", type=float, default=SyntheticSpec.p_out)
    p.add_argument("--unc-fraction", type=float, default=SyntheticSpec.unc_fraction)
    p.add_argument(
        "--publisher-focus", type=float, default=SyntheticSpec.publisher_focus
    )
    return parser


def _run_stages(config: PipelineConfig, upto: tuple[str, ...]) -> int:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stage = "ingest"
    try:
        hashes = pipeline.stage_hashes(config)
        corpus, kb, _ = pipeline.stage_ingest(config, out, hashes["ingest"])
        if "bicm" not in upto:
            return 0
        stage = "bicm"
        graph, model = pipeline.stage_bicm(config, corpus, out, hashes["bicm"])
        if "projection" not in upto:
            return 0
        stage = "projection"
        network = pipeline.stage_projection(
            config, graph, model, out, hashes["projection"]
        )
        if "nec" in upto:
            stage = "nec"
            pipeline.stage_nec(config, network, corpus, kb, out, hashes["nec"])
        if "voters" not in upto:
            return 0
        stage = "voters"
        profiles = pipeline.stage_voters(
            config, corpus, network, kb, out, hashes["voters"]
        )
        if "classify" not in upto:
            return 0
        stage = "classify"
        pipeline.stage_classify(
            config, corpus, network, kb, profiles, out, hashes["classify"]
        )
        return 0
    except StageError as err:
        print(str(err), file=sys.stderr)
        return EXIT_CODES.get(err.stage, 1)
    except Exception as exc:
        print(f"stage {stage} failed: {exc}", file=sys.stderr)
        return EXIT_CODES.get(stage, 1)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "synth":
        try:
            spec = SyntheticSpec(
                users_per_block=args.users_per_block,
                publishers_per_pool=args.publishers_per_pool,
                urls_per_publisher=args.urls_per_publisher,
                p_in=args.p_in,
                p_out=args.p_out,
                unc_fraction=args.unc_fraction,
                seed=args.seed,
                publisher_focus=args.publisher_focus,
            )
            generate_synthetic(spec, args.out_posts, args.out_kb)
            return 0
        except Exception as exc:
            print(f"stage synth failed: {exc}", file=sys.stderr)
            return EXIT_CODES["synth"]

    config = _build_config(args)
    if not config.posts or not config.knowledge_base:
        print("error: --posts and --knowledge-base are required", file=sys.stderr)
        return 1

    if args.command == "run":
        try:
            pipeline.run_pipeline(config)
            return 0
        except StageError as err:
            print(str(err), file=sys.stderr)
            return EXIT_CODES.get(err.stage, 1)
    if args.command == "figures":
        try:
            pipeline.emit_figures(config)
            return 0
        except Exception as exc:
            print(f"stage figures failed: {exc}", file=sys.stderr)
            return EXIT_CODES["figures"]
    return _run_stages(config, STAGE_COMMANDS[args.command])


if __name__ == "__main__":
    sys.exit(main())
