"""Command-line interface: run experiments, generate synthetic pairs, aggregate."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .embeddings import DEFAULT_MAX_VOCAB
from .errors import ConfigError, DegenerateSeedError, FormatError
from .evaluation import DEFAULT_CSLS_K
from .harness import (
    CONFIG_NAMES,
    ModelConfig,
    SeedSource,
    aggregate_reports,
    generate_synthetic_pair,
    run_experiment,
)
from .seed import DEFAULT_SEED_VOCAB
from .self_learning import DEFAULT_VOCAB_CUT


def _env(name: str, cast, default):
    """Default for a flag, overridable through the CLWE_<NAME> variable."""
    raw = os.environ.get(f"CLWE_{name}")
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot parse CLWE_{name}={raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clwe",
        description="Align two monolingual embedding spaces and score lexicon induction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named configuration on a language pair")
    run.add_argument("--config", required=True, choices=CONFIG_NAMES)
    run.add_argument("--src", required=True, help="source .vec file")
    run.add_argument("--tgt", required=True, help="target .vec file")
    run.add_argument("--train-dict", help="seed dictionary (word pair per line)")
    run.add_argument("--test-dict", required=True, help="evaluation dictionary")
    run.add_argument("--dict-size", type=int, default=_env("DICT_SIZE", int, None),
                     help="use only the first N training pairs")
    run.add_argument("--seed", type=int, default=_env("SEED", int, 0))
    run.add_argument("--restarts", type=int, default=_env("RESTARTS", int, None))
    run.add_argument("--retrieval", choices=("nn", "csls"),
                     default=_env("RETRIEVAL", str, "csls"))
    run.add_argument("--csls-k", type=int, default=_env("CSLS_K", int, DEFAULT_CSLS_K))
    run.add_argument("--out", help="directory for report.json (and aligned spaces)")
    run.add_argument("--max-vocab", type=int,
                     default=_env("MAX_VOCAB", int, DEFAULT_MAX_VOCAB))
    run.add_argument("--vocab-cut", type=int, default=_env("VOCAB_CUT", int, None),
                     help="self-learning vocabulary size (default %d)" % DEFAULT_VOCAB_CUT)
    run.add_argument("--seed-vocab", type=int,
                     default=_env("SEED_VOCAB", int, DEFAULT_SEED_VOCAB),
                     help="words per side for unsupervised seed induction")
    run.add_argument("--keep", type=float, default=_env("KEEP", float, None),
                     help="dropout keep probability for self-learning")
    run.add_argument("--max-iters", type=int, default=_env("MAX_ITERS", int, None))
    run.add_argument("--seed-source", choices=("config", "file", "identical", "unsupervised"),
                     default="config", help="override where the seed dictionary comes from")
    run.add_argument("--select-best", action="store_true",
                     help="try all three self-learning flavours and keep the best")
    run.add_argument("--save-aligned", action="store_true",
                     help="also write the mapped spaces of the best restart")
    run.set_defaults(func=_cmd_run)

    synth = sub.add_parser("synth", help="write a synthetic language pair with gold dict")
    synth.add_argument("--n", type=int, required=True, help="number of source words")
    synth.add_argument("--d", type=int, required=True, help="embedding dimension")
    synth.add_argument("--noise", type=float, default=0.0)
    synth.add_argument("--overlap", type=float, default=1.0,
                       help="fraction of target rows kept")
    synth.add_argument("--seed", type=int, default=_env("SEED", int, 0))
    synth.add_argument("--out", required=True, help="output directory")
    synth.set_defaults(func=_cmd_synth)

    agg = sub.add_parser("aggregate", help="summarize report.json files")
    agg.add_argument("reports", nargs="+", help="report.json paths")
    agg.add_argument("--group-by", choices=("config", "source_language"), default="config")
    agg.add_argument("--out", help="prefix for <out>.tsv and <out>.json")
    agg.set_defaults(func=_cmd_aggregate)
    return parser


def _resolve_config(args) -> ModelConfig:
    cfg = ModelConfig.for_name(args.config, dict_size=args.dict_size, restarts=args.restarts)
    if args.seed_source != "config":
        kinds = {"file": SeedSource("file", args.dict_size),
                 "identical": SeedSource("identical_strings"),
                 "unsupervised": SeedSource("unsupervised")}
        cfg = replace(cfg, seed_source=kinds[args.seed_source])
    if cfg.c2 is not None:
        c2 = cfg.c2
        if args.vocab_cut is not None:
            c2 = replace(c2, vocab_cut=args.vocab_cut)
        if args.keep is not None:
            c2 = replace(c2, dropout_keep=args.keep)
        if args.max_iters is not None:
            c2 = replace(c2, max_iters=args.max_iters)
        cfg = replace(cfg, c2=c2)
    elif any(v is not None for v in (args.vocab_cut, args.keep, args.max_iters)):
        print("note: --vocab-cut/--keep/--max-iters ignored without self-learning",
              file=sys.stderr)
    return cfg


def _cmd_run(args) -> int:
    cfg = _resolve_config(args)
    report = run_experiment(
        cfg,
        args.src,
        args.tgt,
        args.train_dict,
        args.test_dict,
        args.out,
        retrieval=args.retrieval,
        csls_k=args.csls_k,
        seed=args.seed,
        max_vocab=args.max_vocab,
        seed_vocab=args.seed_vocab,
        select_best=args.select_best,
        save_mapped=args.save_aligned,
    )
    for run in report.runs:
        status = "degenerate seed" if run.degenerate else run.bli.success_class
        print(f"restart {run.restart}: mrr={run.mrr:.4f} ({status})")
    if report.selected_variant is not None:
        print(f"selected variant: {report.selected_variant}")
    print(f"mean mrr over {len(report.runs)} restart(s): {report.mean_mrr:.4f}")
    if args.out:
        print(f"report: {Path(args.out) / 'report.json'}")
    if report.unsuccessful:
        print("unsuccessful: every restart is a hard failure", file=sys.stderr)
        return 2
    return 0


def _cmd_synth(args) -> int:
    paths = generate_synthetic_pair(args.n, args.d, noise_sigma=args.noise,
                                    overlap=args.overlap, rng_seed=args.seed,
                                    out_dir=args.out)
    for path in paths:
        print(path)
    return 0


def _cmd_aggregate(args) -> int:
    reports = [json.loads(Path(p).read_text(encoding="utf-8")) for p in args.reports]
    table = aggregate_reports(reports, group_by=args.group_by)
    sys.stdout.write(table.to_tsv())
    if args.out:
        Path(args.out + ".tsv").write_text(table.to_tsv(), encoding="utf-8")
        Path(args.out + ".json").write_text(
            json.dumps(table.to_json_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8")
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except DegenerateSeedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
