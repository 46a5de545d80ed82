"""End-to-end experiment harness: named configurations, restarts, reports."""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .embeddings import DEFAULT_MAX_VOCAB, EmbeddingSpace, load_embeddings, save_aligned
from .errors import ConfigError, DegenerateSeedError
from .evaluation import (
    DEFAULT_CSLS_K,
    HARD_FAIL_MRR,
    WEAK_FAIL_MRR,
    BliReport,
    evaluate_bli,
    group_test_pairs,
)
from .seed import (
    DEFAULT_SEED_VOCAB,
    Dictionary,
    identical_strings_seed,
    induce_unsupervised_seed,
    load_dictionary,
    read_word_pairs,
)
from .self_learning import SelfLearnConfig, self_learn
from .transforms import (
    ProjectionModel,
    full_projection_step,
    length_normalize,
    s1_normalize,
    solve_orthogonal,
)

CONFIG_NAMES = (
    "unsupervised",
    "orthg-super",
    "orthg+sl+sym",
    "full-super",
    "full+sl",
    "full+sl+nod",
    "full+sl+sym",
)

# Self-learning flavours the unsupervised run may choose between
# (--select-best tries all three and keeps the best test score).
SL_VARIANTS = ("+sl", "+sl+nod", "+sl+sym")


def _sl_config(variant: str, step_kind: str) -> SelfLearnConfig:
    if variant == "+sl":
        return SelfLearnConfig(induction_mode="all_nn", dropout_keep=0.1, step_kind=step_kind)
    if variant == "+sl+nod":
        return SelfLearnConfig(induction_mode="all_nn", dropout_keep=1.0, step_kind=step_kind)
    if variant == "+sl+sym":
        return SelfLearnConfig(induction_mode="mutual_nn", dropout_keep=1.0, step_kind=step_kind)
    raise ConfigError(f"unknown self-learning variant: {variant}")


@dataclass
class SeedSource:
    """Where the initial dictionary comes from."""

    kind: str  # "file", "unsupervised" or "identical_strings"
    size: int | None = None  # keep only the first `size` file entries

    def __post_init__(self):
        if self.kind not in ("file", "unsupervised", "identical_strings"):
            raise ConfigError(f"unknown seed source: {self.kind}")
        if self.size is not None and self.size < 1:
            raise ConfigError(f"seed size must be positive, got {self.size}")

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "size": self.size}


@dataclass
class ModelConfig:
    """A named alignment recipe: seed source, self-learning, normalization."""

    name: str
    seed_source: SeedSource
    c2: SelfLearnConfig | None
    c3: str  # "length_norm_only" or "full_s1_s4"
    step_kind: str  # projection solve used with and without self-learning
    restarts: int = 1

    def __post_init__(self):
        if self.c3 not in ("length_norm_only", "full_s1_s4"):
            raise ConfigError(f"unknown normalization: {self.c3}")
        if self.step_kind not in ("orthogonal_only", "full_s2_s4"):
            raise ConfigError(f"unknown step kind: {self.step_kind}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be positive, got {self.restarts}")
        if self.c2 is not None and self.c2.step_kind != self.step_kind:
            raise ConfigError("self-learning step kind must match the config's step kind")

    @classmethod
    def for_name(
        cls,
        name: str,
        dict_size: int | None = None,
        restarts: int | None = None,
    ) -> ModelConfig:
        """Resolve one of the seven published configuration names."""
        if name not in CONFIG_NAMES:
            raise ConfigError(f"unknown config name: {name!r} (expected one of {', '.join(CONFIG_NAMES)})")
        provided = SeedSource("file", dict_size)
        if name == "unsupervised":
            cfg = cls(name, SeedSource("unsupervised"), _sl_config("+sl", "full_s2_s4"),
                      "full_s1_s4", "full_s2_s4", restarts=5)
        elif name == "orthg-super":
            cfg = cls(name, provided, None, "length_norm_only", "orthogonal_only")
        elif name == "orthg+sl+sym":
            cfg = cls(name, provided, _sl_config("+sl+sym", "orthogonal_only"),
                      "length_norm_only", "orthogonal_only")
        elif name == "full-super":
            cfg = cls(name, provided, None, "full_s1_s4", "full_s2_s4")
        elif name == "full+sl":
            cfg = cls(name, provided, _sl_config("+sl", "full_s2_s4"), "full_s1_s4", "full_s2_s4")
        elif name == "full+sl+nod":
            cfg = cls(name, provided, _sl_config("+sl+nod", "full_s2_s4"),
                      "full_s1_s4", "full_s2_s4")
        else:  # full+sl+sym
            cfg = cls(name, provided, _sl_config("+sl+sym", "full_s2_s4"),
                      "full_s1_s4", "full_s2_s4")
        if restarts is not None:
            cfg = replace(cfg, restarts=restarts)
        return cfg

    def to_json_dict(self) -> dict:
        c2 = None
        if self.c2 is not None:
            c2 = {
                "induction_mode": self.c2.induction_mode,
                "dropout_keep": self.c2.dropout_keep,
                "vocab_cut": self.c2.vocab_cut,
                "max_iters": self.c2.max_iters,
                "convergence_tol": self.c2.convergence_tol,
                "step_kind": self.c2.step_kind,
                "scoring": self.c2.scoring,
                "csls_k": self.c2.csls_k,
            }
        return {
            "name": self.name,
            "seed_source": self.seed_source.to_json_dict(),
            "c2": c2,
            "c3": self.c3,
            "step_kind": self.step_kind,
            "restarts": self.restarts,
        }


@dataclass
class RestartResult:
    """Outcome of one seeded run of a configuration."""

    restart: int
    rng_seed: int
    bli: BliReport | None
    seed_dict_size: int = 0
    final_dict_size: int = 0
    iterations: int = 0
    objective: float | None = None
    degenerate: bool = False
    wall_clock_sec: float = 0.0

    @property
    def mrr(self) -> float:
        return self.bli.mrr if self.bli is not None else 0.0

    def to_json_dict(self) -> dict:
        if self.bli is not None:
            scores = self.bli.to_json_dict()
        else:
            scores = {"mrr": 0.0, "p_at_1": 0.0, "coverage": 0.0, "n_queries": 0,
                      "success_class": "hard_fail"}
        return {
            "restart": self.restart,
            "rng_seed": self.rng_seed,
            "degenerate": self.degenerate,
            "seed_dict_size": self.seed_dict_size,
            "final_dict_size": self.final_dict_size,
            "iterations": self.iterations,
            "objective": self.objective,
            "wall_clock_sec": self.wall_clock_sec,
            **scores,
        }


@dataclass
class ExperimentReport:
    """All restarts of one configuration on one language pair."""

    config: dict
    settings: dict
    inputs: dict
    runs: list[RestartResult]
    selected_variant: str | None = None
    variant_mean_mrrs: dict[str, float] | None = None
    wall_clock_sec: float = 0.0

    @property
    def mean_mrr(self) -> float:
        return float(np.mean([r.mrr for r in self.runs]))

    @property
    def best_restart(self) -> int:
        return max(self.runs, key=lambda r: r.mrr).restart

    @property
    def unsuccessful(self) -> bool:
        """True only when every restart is a hard failure."""
        return all(r.mrr <= HARD_FAIL_MRR for r in self.runs)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "settings": self.settings,
            "inputs": self.inputs,
            "runs": [r.to_json_dict() for r in self.runs],
            "mean_mrr": self.mean_mrr,
            "best_restart": self.best_restart,
            "unsuccessful": self.unsuccessful,
            "selected_variant": self.selected_variant,
            "variant_mean_mrrs": self.variant_mean_mrrs,
            "wall_clock_sec": self.wall_clock_sec,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def _preprocess(space: EmbeddingSpace, c3: str) -> EmbeddingSpace:
    if c3 == "length_norm_only":
        return length_normalize(space)
    return s1_normalize(space)


def _initial_dictionary(
    cfg: ModelConfig,
    X: EmbeddingSpace,
    Z: EmbeddingSpace,
    train_dict_path,
    seed_vocab: int,
) -> Dictionary:
    kind = cfg.seed_source.kind
    if kind == "unsupervised":
        return induce_unsupervised_seed(X, Z, m=seed_vocab)
    if kind == "identical_strings":
        return identical_strings_seed(X, Z)
    return load_dictionary(train_dict_path, X, Z, limit=cfg.seed_source.size)


def _restrict_to_cut(seed: Dictionary, cut: int) -> Dictionary:
    """Drop seed pairs outside the self-learning sub-vocabularies."""
    kept = [(s, t) for s, t in seed.pairs if s < cut and t < cut]
    dropped = len(seed) - len(kept)
    if dropped:
        warnings.warn(f"dropped {dropped} seed pair(s) outside the top-{cut} vocabulary",
                      stacklevel=3)
    if not kept:
        raise DegenerateSeedError("no seed pairs survive the self-learning vocabulary cut")
    return Dictionary(kept, seed.src_size, seed.tgt_size)


def _run_restarts(
    cfg: ModelConfig,
    X: EmbeddingSpace,
    Z: EmbeddingSpace,
    train_dict_path,
    test,
    *,
    retrieval: str,
    csls_k: int,
    seed: int,
    seed_vocab: int,
) -> tuple[list[RestartResult], ProjectionModel | None]:
    results: list[RestartResult] = []
    best_model: ProjectionModel | None = None
    best_mrr = float("-inf")
    for i in range(cfg.restarts):
        started = time.perf_counter()
        rng_seed = seed + i
        try:
            seed_dict = _initial_dictionary(cfg, X, Z, train_dict_path, seed_vocab)
            if cfg.c2 is not None:
                c2 = replace(cfg.c2, rng_seed=rng_seed, csls_k=csls_k)
                cut = min(c2.vocab_cut, len(X), len(Z))
                seed_dict = _restrict_to_cut(seed_dict, cut)
                model, final_dict, trace = self_learn(X, Z, seed_dict, c2)
                iterations = len(trace)
                objective = trace.best_objective if trace.records else None
            else:
                model = (solve_orthogonal(X.vectors, Z.vectors, seed_dict)
                         if cfg.step_kind == "orthogonal_only"
                         else full_projection_step(X.vectors, Z.vectors, seed_dict))
                final_dict, iterations, objective = seed_dict, 0, None
            bli = evaluate_bli(model, X, Z, test, method=retrieval, k=csls_k)
            result = RestartResult(
                restart=i,
                rng_seed=rng_seed,
                bli=bli,
                seed_dict_size=len(seed_dict),
                final_dict_size=len(final_dict),
                iterations=iterations,
                objective=objective,
                wall_clock_sec=time.perf_counter() - started,
            )
            if bli.mrr > best_mrr:
                best_mrr, best_model = bli.mrr, model
        except DegenerateSeedError as exc:
            warnings.warn(f"restart {i}: {exc}", stacklevel=2)
            result = RestartResult(restart=i, rng_seed=rng_seed, bli=None, degenerate=True,
                                   wall_clock_sec=time.perf_counter() - started)
        results.append(result)
    return results, best_model


def run_experiment(
    cfg: ModelConfig,
    src_path,
    tgt_path,
    train_dict_path,
    test_dict_path,
    out_dir=None,
    *,
    retrieval: str = "csls",
    csls_k: int = DEFAULT_CSLS_K,
    seed: int = 0,
    max_vocab: int = DEFAULT_MAX_VOCAB,
    seed_vocab: int = DEFAULT_SEED_VOCAB,
    select_best: bool = False,
    save_mapped: bool = False,
) -> ExperimentReport:
    """Run one configuration end-to-end and (optionally) write its report.

    Loads both spaces, applies the configuration's normalization, obtains
    a seed dictionary per restart, self-learns when the configuration says
    so, and scores bilingual lexicon induction on the test dictionary.
    Restart i uses rng seed `seed + i`. With select_best the three
    self-learning flavours are all run and the best mean test MRR wins.
    Writes out_dir/report.json and, with save_mapped, the two mapped
    spaces of the best restart.
    """
    if cfg.seed_source.kind == "file" and train_dict_path is None:
        raise ConfigError(f"config {cfg.name!r} needs a training dictionary")
    if retrieval not in ("nn", "csls"):
        raise ConfigError(f"unknown retrieval method: {retrieval}")
    started = time.perf_counter()

    X = _preprocess(load_embeddings(src_path, max_vocab), cfg.c3)
    Z = _preprocess(load_embeddings(tgt_path, max_vocab), cfg.c3)
    test = group_test_pairs(read_word_pairs(test_dict_path))

    common = dict(retrieval=retrieval, csls_k=csls_k, seed=seed, seed_vocab=seed_vocab)
    selected = None
    variant_means = None
    if select_best:
        if cfg.c2 is None:
            raise ConfigError("select_best only applies to self-learning configs")
        variant_means = {}
        runs, best_model = [], None
        for variant in SL_VARIANTS:
            vcfg = replace(cfg, c2=_sl_config(variant, cfg.step_kind))
            vruns, vmodel = _run_restarts(vcfg, X, Z, train_dict_path, test, **common)
            vmean = float(np.mean([r.mrr for r in vruns]))
            variant_means[variant] = vmean
            if selected is None or vmean > variant_means[selected]:
                selected, runs, best_model = variant, vruns, vmodel
    else:
        runs, best_model = _run_restarts(cfg, X, Z, train_dict_path, test, **common)

    report = ExperimentReport(
        config=cfg.to_json_dict(),
        settings={**common, "max_vocab": max_vocab, "select_best": select_best},
        inputs={
            "src": str(src_path),
            "tgt": str(tgt_path),
            "train_dict": None if train_dict_path is None else str(train_dict_path),
            "test_dict": str(test_dict_path),
            "source_language": Path(src_path).stem,
            "target_language": Path(tgt_path).stem,
        },
        runs=runs,
        selected_variant=selected,
        variant_mean_mrrs=variant_means,
        wall_clock_sec=time.perf_counter() - started,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")
        if save_mapped and best_model is not None:
            save_aligned(EmbeddingSpace(X.words, best_model.map_source(X.vectors)),
                         out / "src.aligned.vec")
            save_aligned(EmbeddingSpace(Z.words, best_model.map_target(Z.vectors)),
                         out / "tgt.aligned.vec")
    return report


def generate_synthetic_pair(
    n: int,
    d: int,
    noise_sigma: float = 0.0,
    overlap: float = 1.0,
    rng_seed: int = 0,
    out_dir=".",
) -> tuple[Path, Path, Path]:
    """Write a toy language pair with a known gold dictionary.

    The source space has n Gaussian rows; the target is the source rotated
    by a seeded random orthogonal matrix plus optional Gaussian noise,
    with rows renamed. overlap < 1 keeps only that fraction of the target
    rows, so part of the source vocabulary has no translation. Returns the
    paths of src.vec, tgt.vec and gold.tsv.
    """
    if n < 10:
        raise ValueError(f"need at least 10 rows, got {n}")
    if d < 2:
        raise ValueError(f"need at least 2 dimensions, got {d}")
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be non-negative, got {noise_sigma}")
    if not 0.0 < overlap <= 1.0:
        raise ValueError(f"overlap must be in (0, 1], got {overlap}")
    rng = np.random.default_rng(rng_seed)
    X = rng.normal(size=(n, d))
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    rotation = q * np.sign(np.diag(r))
    Z = X @ rotation
    if noise_sigma > 0:
        Z = Z + rng.normal(scale=noise_sigma, size=Z.shape)
    kept = np.arange(n)
    if overlap < 1.0:
        kept = np.sort(rng.choice(n, size=max(1, round(overlap * n)), replace=False))

    src_words = [f"s{i:06d}" for i in range(n)]
    tgt_words = [f"t{i:06d}" for i in kept]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    src_path, tgt_path, gold_path = out / "src.vec", out / "tgt.vec", out / "gold.tsv"
    save_aligned(EmbeddingSpace(src_words, X), src_path)
    save_aligned(EmbeddingSpace(tgt_words, Z[kept]), tgt_path)
    gold_path.write_text(
        "".join(f"s{i:06d}\tt{i:06d}\n" for i in kept), encoding="utf-8"
    )
    return src_path, tgt_path, gold_path


AGGREGATE_TSV_HEADER = "group\tn_reports\tmean_mrr\tunsuccessful_at_0.01\tunsuccessful_at_0.05"


@dataclass
class AggregateTable:
    """Mean scores and failure counts per group of reports."""

    group_by: str
    rows: list[dict] = field(default_factory=list)

    def to_tsv(self) -> str:
        lines = [AGGREGATE_TSV_HEADER]
        for row in self.rows:
            lines.append(
                f"{row['group']}\t{row['n_reports']}\t{row['mean_mrr']:.6f}"
                f"\t{row['unsuccessful_at_0.01']}\t{row['unsuccessful_at_0.05']}"
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {"group_by": self.group_by, "rows": self.rows}


def aggregate_reports(reports: list, group_by: str = "config") -> AggregateTable:
    """Average report MRRs per group and count failed setups.

    Accepts ExperimentReport objects or parsed report.json dicts. A report
    counts as unsuccessful at a threshold when every one of its restarts
    has MRR at or below that threshold.
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    if group_by not in ("config", "source_language"):
        raise ValueError(f"unknown group_by: {group_by}")
    groups: dict[str, list[dict]] = {}
    for report in reports:
        data = report.to_json_dict() if isinstance(report, ExperimentReport) else report
        key = data["config"]["name"] if group_by == "config" else data["inputs"]["source_language"]
        groups.setdefault(key, []).append(data)

    def all_below(data: dict, threshold: float) -> bool:
        return all(run["mrr"] <= threshold for run in data["runs"])

    table = AggregateTable(group_by=group_by)
    for key in sorted(groups):
        members = groups[key]
        table.rows.append({
            "group": key,
            "n_reports": len(members),
            "mean_mrr": float(np.mean([m["mean_mrr"] for m in members])),
            "unsuccessful_at_0.01": sum(all_below(m, HARD_FAIL_MRR) for m in members),
            "unsuccessful_at_0.05": sum(all_below(m, WEAK_FAIL_MRR) for m in members),
        })
    return table
