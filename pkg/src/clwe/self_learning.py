"""Iterative self-learning: alternate projection solves with dictionary induction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingSpace
from .errors import ConfigError
from .evaluation import DEFAULT_CSLS_K, csls_scores
from .seed import Dictionary
from .transforms import (
    ProjectionModel,
    full_projection_step,
    normalize_rows,
    solve_orthogonal,
)

DEFAULT_VOCAB_CUT = 20_000  # induction candidates per side
DROPOUT_PATIENCE = 50  # stale iterations before the keep probability doubles


@dataclass
class SelfLearnConfig:
    """Switches and hyperparameters of one self-learning run."""

    induction_mode: str = "mutual_nn"  # or "all_nn"
    dropout_keep: float = 1.0
    vocab_cut: int = DEFAULT_VOCAB_CUT
    max_iters: int = 500
    convergence_tol: float = 1e-6
    rng_seed: int = 0
    step_kind: str = "full_s2_s4"  # or "orthogonal_only"
    scoring: str = "csls"  # or "cos", for ablation
    csls_k: int = DEFAULT_CSLS_K

    def __post_init__(self):
        if not 0.0 < self.dropout_keep <= 1.0:
            raise ConfigError(f"dropout_keep must be in (0, 1], got {self.dropout_keep}")
        if self.vocab_cut < 2:
            raise ConfigError("vocab_cut must be at least 2")
        if self.induction_mode not in ("all_nn", "mutual_nn"):
            raise ConfigError(f"unknown induction mode: {self.induction_mode}")
        if self.step_kind not in ("orthogonal_only", "full_s2_s4"):
            raise ConfigError(f"unknown step kind: {self.step_kind}")
        if self.scoring not in ("csls", "cos"):
            raise ConfigError(f"unknown scoring: {self.scoring}")


@dataclass
class IterationRecord:
    iteration: int
    objective: float
    dict_size: int
    dropout_keep: float


@dataclass
class LearningTrace:
    """Per-iteration diagnostics of a self-learning run."""

    records: list[IterationRecord] = field(default_factory=list)
    best_objective: float = float("-inf")
    best_iteration: int = 0
    failed: bool = False
    stop_reason: str = ""

    def __len__(self) -> int:
        return len(self.records)


def induce_dictionary(
    X_mapped: np.ndarray,
    Z_mapped: np.ndarray,
    mode: str,
    keep: float,
    rng: np.random.Generator,
    scoring: str = "csls",
    csls_k: int = DEFAULT_CSLS_K,
) -> Dictionary:
    """Extract translation pairs from two mapped, row-normalized matrices.

    Scores are CSLS-adjusted cosines (or plain cosines with scoring="cos").
    Each score is independently zeroed with probability 1 - keep before
    the search. mode="all_nn" pairs every source row with its best target;
    mode="mutual_nn" keeps only pairs that are the best in both their row
    and their column. Ties break toward the lower index.
    """
    if keep <= 0.0:
        raise ConfigError(f"keep probability must be positive, got {keep}")
    if keep > 1.0:
        raise ConfigError(f"keep probability must be at most 1, got {keep}")
    if mode not in ("all_nn", "mutual_nn"):
        raise ConfigError(f"unknown induction mode: {mode}")
    if scoring == "csls":
        scores = csls_scores(X_mapped, Z_mapped, csls_k)
    elif scoring == "cos":
        scores = np.asarray(X_mapped, dtype=np.float64) @ np.asarray(Z_mapped, dtype=np.float64).T
    else:
        raise ConfigError(f"unknown scoring: {scoring}")
    if keep < 1.0:
        scores = np.where(rng.random(scores.shape) < keep, scores, 0.0)
    if mode == "all_nn":
        pairs = list(enumerate(scores.argmax(axis=1)))
    else:
        fwd = scores.argmax(axis=1)
        bwd = scores.argmax(axis=0)
        pairs = [(i, j) for i, j in enumerate(fwd) if bwd[j] == i]
    return Dictionary([(int(i), int(j)) for i, j in pairs], X_mapped.shape[0], Z_mapped.shape[0])


def _solve(step_kind, X, Z, dictionary):
    if step_kind == "orthogonal_only":
        return solve_orthogonal(X, Z, dictionary)
    return full_projection_step(X, Z, dictionary)


def self_learn(
    X: EmbeddingSpace,
    Z: EmbeddingSpace,
    D1: Dictionary,
    cfg: SelfLearnConfig,
) -> tuple[ProjectionModel, Dictionary, LearningTrace]:
    """Bootstrap a projection from a seed dictionary.

    Each iteration solves a projection from the current dictionary over
    the vocab_cut sub-spaces, maps them, and induces the next dictionary;
    the objective is the mean cosine of the induced pairs. When the best
    objective goes stale for a full patience window the keep probability
    doubles (capped at 1); at keep 1 a stale window stops the run. The
    model, dictionary and trace of the best-objective iteration are
    returned. An empty induced dictionary aborts the run with the trace
    flagged as failed.
    """
    cut_x = min(cfg.vocab_cut, len(X))
    cut_z = min(cfg.vocab_cut, len(Z))
    xc = np.asarray(X.vectors[:cut_x], dtype=np.float64)
    zc = np.asarray(Z.vectors[:cut_z], dtype=np.float64)
    for s, t in D1.pairs:
        if s >= cut_x or t >= cut_z:
            raise ValueError(f"seed pair ({s}, {t}) outside the vocab_cut sub-spaces")
    dictionary = Dictionary(list(D1.pairs), cut_x, cut_z)

    rng = np.random.default_rng(cfg.rng_seed)
    patience = DROPOUT_PATIENCE if cfg.dropout_keep < 1.0 else 1
    keep = cfg.dropout_keep
    trace = LearningTrace()
    best_model = None
    best_dict = dictionary
    last_improvement = 0

    for it in range(1, cfg.max_iters + 1):
        model = _solve(cfg.step_kind, xc, zc, dictionary)
        xm, _ = normalize_rows(model.map_source(xc))
        zm, _ = normalize_rows(model.map_target(zc))
        induced = induce_dictionary(
            xm, zm, cfg.induction_mode, keep, rng, scoring=cfg.scoring, csls_k=cfg.csls_k
        )
        if len(induced) == 0:
            trace.failed = True
            trace.stop_reason = "self-learning collapsed: empty induced dictionary"
            if best_model is None:
                best_model = model
            break
        src, tgt = induced.as_arrays()
        objective = float(np.einsum("ij,ij->i", xm[src], zm[tgt]).mean())
        trace.records.append(IterationRecord(it, objective, len(induced), keep))

        if objective - trace.best_objective >= cfg.convergence_tol:
            trace.best_objective = objective
            trace.best_iteration = it
            best_model = model
            best_dict = induced
            last_improvement = it
        elif it - last_improvement >= patience:
            if keep >= 1.0:
                trace.stop_reason = "converged"
                break
            keep = min(1.0, 2.0 * keep)
            last_improvement = it
        dictionary = induced
    else:
        trace.stop_reason = "max iterations reached"

    if best_model is None:  # collapse on the very first iteration
        best_model = _solve(cfg.step_kind, xc, zc, dictionary)
    return best_model, best_dict, trace
