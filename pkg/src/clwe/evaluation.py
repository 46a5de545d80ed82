"""BLI evaluation: CSLS/NN retrieval, MRR and P@1, and success classification."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingSpace
from .transforms import ProjectionModel, normalize_rows

DEFAULT_CSLS_K = 10

HARD_FAIL_MRR = 0.01
WEAK_FAIL_MRR = 0.05


def classify_success(mrr: float) -> str:
    """Map an MRR score to {ok, weak_fail, hard_fail}; thresholds are inclusive."""
    if not 0.0 <= mrr <= 1.0:
        raise ValueError(f"mrr out of range: {mrr}")
    if mrr <= HARD_FAIL_MRR:
        return "hard_fail"
    if mrr <= WEAK_FAIL_MRR:
        return "weak_fail"
    return "ok"


def _topk_mean(scores: np.ndarray, k: int, axis: int) -> np.ndarray:
    """Mean of the k largest entries along an axis."""
    part = np.partition(scores, scores.shape[axis] - k, axis=axis)
    sl = [slice(None)] * scores.ndim
    sl[axis] = slice(scores.shape[axis] - k, None)
    return part[tuple(sl)].mean(axis=axis)


def csls_scores(Q: np.ndarray, T: np.ndarray, k: int = DEFAULT_CSLS_K) -> np.ndarray:
    """Hubness-corrected retrieval scores between query and target rows.

    score(q, t) = 2 cos(q, t) - r_T(q) - r_S(t), where r_T(q) is the mean
    cosine of q to its k nearest targets and r_S(t) the mean cosine of t
    to its k nearest queries. Rows must be unit-normalized; k larger than
    either side is clamped with a warning.
    """
    if k < 1:
        raise ValueError("k must be positive")
    Q = np.asarray(Q, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    if k > T.shape[0] or k > Q.shape[0]:
        warnings.warn(f"csls k={k} exceeds matrix size; clamping", stacklevel=2)
    k_t = min(k, T.shape[0])
    k_q = min(k, Q.shape[0])
    cos = Q @ T.T
    r_t = _topk_mean(cos, k_t, axis=1)
    r_s = _topk_mean(cos, k_q, axis=0)
    return 2.0 * cos - r_t[:, None] - r_s[None, :]


@dataclass
class BliReport:
    """Result of one bilingual lexicon induction evaluation."""

    mrr: float
    p_at_1: float
    n_queries: int
    coverage: float
    per_query_ranks: list[tuple[str, int]]
    success_class: str

    def to_json_dict(self) -> dict:
        return {
            "mrr": self.mrr,
            "p_at_1": self.p_at_1,
            "coverage": self.coverage,
            "n_queries": self.n_queries,
            "success_class": self.success_class,
        }

    TSV_HEADER = "mrr\tp_at_1\tcoverage\tn_queries\tsuccess_class"

    def to_tsv_line(self) -> str:
        return f"{self.mrr:.6f}\t{self.p_at_1:.6f}\t{self.coverage:.6f}\t{self.n_queries}\t{self.success_class}"


def group_test_pairs(pairs: list[tuple[str, str]]) -> list[tuple[str, set[str]]]:
    """Merge repeated test lines into one gold set per source word."""
    golds: dict[str, set[str]] = {}
    for s, t in pairs:
        golds.setdefault(s, set()).add(t)
    return sorted(golds.items())


def evaluate_bli(
    model: ProjectionModel,
    X: EmbeddingSpace,
    Z: EmbeddingSpace,
    test: list[tuple[str, set[str]]],
    method: str = "csls",
    k: int = DEFAULT_CSLS_K,
) -> BliReport:
    """Rank every target for each test source word and score the retrieval.

    A query is scored when its source word is in X and at least one gold
    target is in Z; everything else is skipped and reflected in coverage.
    A query's rank is the best rank over its gold targets (competition
    ranking: 1 + number of strictly better-scoring targets).
    """
    if method not in ("nn", "csls"):
        raise ValueError(f"unknown retrieval method: {method}")
    if not test:
        raise ValueError("empty test set")
    xi, zi = X.word_index, Z.word_index
    merged: dict[str, set[str]] = {}
    for s, ts in test:
        merged.setdefault(s, set()).update(ts)
    queries: list[tuple[str, int, list[int]]] = []
    for src, tgts in sorted(merged.items()):
        if src not in xi:
            continue
        gold = sorted(zi[t] for t in tgts if t in zi)
        if gold:
            queries.append((src, xi[src], gold))
    if not queries:
        raise ValueError("all test sources are out of vocabulary")

    xm, _ = normalize_rows(model.map_source(X.vectors))
    zm, _ = normalize_rows(model.map_target(Z.vectors))
    q = xm[[row for _, row, _ in queries]]
    scores = csls_scores(q, zm, k) if method == "csls" else q @ zm.T

    ranks = []
    for (src, _, gold), row in zip(queries, scores):
        best = row[gold].max()
        ranks.append((src, int((row > best).sum()) + 1))
    rank_arr = np.array([r for _, r in ranks], dtype=np.float64)
    mrr = float((1.0 / rank_arr).mean())
    return BliReport(
        mrr=mrr,
        p_at_1=float((rank_arr == 1).mean()),
        n_queries=len(ranks),
        coverage=len(ranks) / len(merged),
        per_query_ranks=ranks,
        success_class=classify_success(mrr),
    )
