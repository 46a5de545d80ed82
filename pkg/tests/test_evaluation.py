"""Tests for CSLS scoring, BLI evaluation and success classification.

csls_scores is checked against a loop-based implementation of the defining
formula; evaluate_bli against fixtures whose ranks are chosen by hand.
"""

import numpy as np
import pytest

from clwe import (
    BliReport,
    Dictionary,
    EmbeddingSpace,
    ProjectionModel,
    classify_success,
    csls_scores,
    evaluate_bli,
    group_test_pairs,
)


def brute_force_csls(Q, T, k):
    """score(q, t) = 2 cos(q,t) - r_T(q) - r_S(t), straight from the definition."""
    Q = Q / np.linalg.norm(Q, axis=1, keepdims=True)
    T = T / np.linalg.norm(T, axis=1, keepdims=True)
    cos = Q @ T.T
    out = np.empty_like(cos)
    for i in range(Q.shape[0]):
        r_t = np.mean(sorted(cos[i, :])[-k:])
        for j in range(T.shape[0]):
            r_s = np.mean(sorted(cos[:, j])[-k:])
            out[i, j] = 2 * cos[i, j] - r_t - r_s
    return out


def identity_model(d: int) -> ProjectionModel:
    return ProjectionModel(mode="orthogonal", W_x=np.eye(d), W_z=np.eye(d))


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def unit_rows(m) -> np.ndarray:
    return m / np.linalg.norm(m, axis=1, keepdims=True)


class TestClassifySuccess:
    @pytest.mark.parametrize(
        "mrr,expected",
        [
            (0.0, "hard_fail"),
            (0.005, "hard_fail"),
            (0.01, "hard_fail"),  # boundary is inclusive
            (0.0101, "weak_fail"),
            (0.05, "weak_fail"),
            (0.0501, "ok"),
            (0.279, "ok"),
            (1.0, "ok"),
        ],
    )
    def test_thresholds(self, mrr, expected):
        assert classify_success(mrr) == expected

    @pytest.mark.parametrize("bad", [-0.001, 1.001])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(ValueError):
            classify_success(bad)


class TestCslsScores:
    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_matches_brute_force_8x8(self, k):
        rng = np.random.default_rng(0)
        for trial in range(10):
            Q = unit_rows(rng.normal(size=(8, 5)))
            T = unit_rows(rng.normal(size=(8, 5)))
            got = csls_scores(Q, T, k=k)
            want = brute_force_csls(Q, T, k)
            assert np.abs(got - want).max() < 1e-10

    def test_rectangular_inputs(self):
        rng = np.random.default_rng(1)
        Q = unit_rows(rng.normal(size=(6, 4)))
        T = unit_rows(rng.normal(size=(11, 4)))
        np.testing.assert_allclose(csls_scores(Q, T, k=3), brute_force_csls(Q, T, 3),
                                   atol=1e-12)

    def test_transpose_symmetry(self):
        """Swapping queries and targets transposes the score matrix."""
        rng = np.random.default_rng(2)
        Q = unit_rows(rng.normal(size=(7, 4)))
        T = unit_rows(rng.normal(size=(9, 4)))
        np.testing.assert_allclose(csls_scores(Q, T, k=3), csls_scores(T, Q, k=3).T,
                                   atol=1e-12)

    def test_k_equal_to_size(self):
        """k covering every neighbour subtracts plain row/column means."""
        rng = np.random.default_rng(3)
        Q = unit_rows(rng.normal(size=(5, 3)))
        T = unit_rows(rng.normal(size=(5, 3)))
        got = csls_scores(Q, T, k=5)
        cos = Q @ T.T
        want = 2 * cos - cos.mean(axis=1, keepdims=True) - cos.mean(axis=0, keepdims=True)
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_oversized_k_clamps_with_warning(self):
        rng = np.random.default_rng(4)
        Q = rng.normal(size=(4, 3))
        T = rng.normal(size=(4, 3))
        with pytest.warns(UserWarning, match="clamp"):
            got = csls_scores(Q, T, k=100)
        np.testing.assert_allclose(got, csls_scores(Q, T, k=4), atol=1e-12)

    def test_rejects_non_positive_k(self):
        with pytest.raises(ValueError):
            csls_scores(np.eye(3), np.eye(3), k=0)

    def test_hub_demotion(self):
        """A target that narrowly wins every query on plain cosine loses
        the borderline queries once its crowded neighbourhood is subtracted."""
        T = np.eye(3)  # t0 is the hub
        Q = np.array([
            [1.0, 0.0, 0.0],  # points straight at the hub
            unit([0.72, 0.70, 0.0]),  # barely prefers the hub to t1
            unit([0.72, 0.0, 0.70]),  # barely prefers the hub to t2
        ])
        plain = Q @ T.T
        assert (plain.argmax(axis=1) == 0).all()
        adjusted = csls_scores(Q, T, k=2)
        np.testing.assert_array_equal(adjusted.argmax(axis=1), [0, 1, 2])


class TestGroupTestPairs:
    def test_merges_duplicates(self):
        pairs = [("a", "x"), ("a", "y"), ("b", "x"), ("a", "x")]
        assert group_test_pairs(pairs) == [("a", {"x", "y"}), ("b", {"x"})]


def rank_fixture():
    """Three queries engineered to rank their gold target 1st, 2nd and 4th.

    Targets are the standard basis of R^5, so each query's cosine order is
    just the order of its components.
    """
    targets = EmbeddingSpace([f"t{i}" for i in range(5)], np.eye(5))
    queries = EmbeddingSpace(
        ["q1", "q2", "q3"],
        np.array(
            [
                [0.9, 0.1, 0.05, 0.02, 0.01],  # gold t0 ranks 1st
                [0.8, 0.9, 0.05, 0.02, 0.01],  # gold t0 ranks 2nd
                [0.5, 0.9, 0.8, 0.7, 0.01],  # gold t0 ranks 4th
            ]
        ),
    )
    test = [("q1", {"t0"}), ("q2", {"t0"}), ("q3", {"t0"})]
    return queries, targets, test


class TestEvaluateBli:
    def test_mrr_fixture_ranks_1_2_4(self):
        X, Z, test = rank_fixture()
        report = evaluate_bli(identity_model(5), X, Z, test, method="nn")
        assert abs(report.mrr - 7.0 / 12.0) < 1e-9
        assert report.p_at_1 == pytest.approx(1.0 / 3.0)
        assert report.n_queries == 3
        assert report.coverage == 1.0
        assert dict(report.per_query_ranks) == {"q1": 1, "q2": 2, "q3": 4}

    def test_classification_follows_mrr(self):
        X, Z, test = rank_fixture()
        report = evaluate_bli(identity_model(5), X, Z, test, method="nn")
        assert report.success_class == "ok"

    def test_perfect_alignment(self):
        rng = np.random.default_rng(5)
        vecs = rng.normal(size=(20, 6))
        X = EmbeddingSpace([f"s{i}" for i in range(20)], vecs)
        Z = EmbeddingSpace([f"t{i}" for i in range(20)], vecs.copy())
        test = [(f"s{i}", {f"t{i}"}) for i in range(20)]
        report = evaluate_bli(identity_model(6), X, Z, test, method="nn")
        assert report.mrr == 1.0 and report.p_at_1 == 1.0

    def test_multiple_golds_use_best_rank(self):
        X, Z, _ = rank_fixture()
        test = [("q3", {"t0", "t1"})]  # t1 is q3's top target
        report = evaluate_bli(identity_model(5), X, Z, test, method="nn")
        assert report.mrr == 1.0

    def test_ties_do_not_hurt(self):
        """Competition ranking counts only strictly better targets."""
        Z = EmbeddingSpace(["t0", "t1"], np.array([[1.0, 0.0], [1.0, 0.0]]))
        X = EmbeddingSpace(["q"], np.array([[1.0, 0.0]]))
        report = evaluate_bli(identity_model(2), X, Z, [("q", {"t1"})], method="nn")
        assert report.per_query_ranks == [("q", 1)]

    def test_oov_handling_and_coverage(self):
        X, Z, _ = rank_fixture()
        test = [("q1", {"t0"}), ("ghost", {"t0"}), ("q2", {"spettro"})]
        report = evaluate_bli(identity_model(5), X, Z, test, method="nn")
        # ghost: source OOV; q2: no in-vocabulary gold; only q1 scored
        assert report.n_queries == 1
        assert report.coverage == pytest.approx(1.0 / 3.0)

    def test_duplicated_lines_do_not_change_scores(self):
        X, Z, test = rank_fixture()
        doubled = test + test
        a = evaluate_bli(identity_model(5), X, Z, test, method="nn")
        b = evaluate_bli(identity_model(5), X, Z, doubled, method="nn")
        assert a.mrr == b.mrr and a.n_queries == b.n_queries

    def test_order_invariance(self):
        X, Z, test = rank_fixture()
        a = evaluate_bli(identity_model(5), X, Z, test, method="nn")
        b = evaluate_bli(identity_model(5), X, Z, list(reversed(test)), method="nn")
        assert a.mrr == b.mrr

    def test_csls_and_nn_agree_on_perfect_data(self):
        rng = np.random.default_rng(6)
        vecs = rng.normal(size=(30, 8))
        X = EmbeddingSpace([f"s{i}" for i in range(30)], vecs)
        Z = EmbeddingSpace([f"t{i}" for i in range(30)], vecs.copy())
        test = [(f"s{i}", {f"t{i}"}) for i in range(30)]
        nn = evaluate_bli(identity_model(8), X, Z, test, method="nn")
        cs = evaluate_bli(identity_model(8), X, Z, test, method="csls", k=10)
        assert nn.mrr == cs.mrr == 1.0

    def test_all_oov_is_an_error(self):
        X, Z, _ = rank_fixture()
        with pytest.raises(ValueError, match="out of vocabulary"):
            evaluate_bli(identity_model(5), X, Z, [("ghost", {"t0"})], method="nn")

    def test_empty_test_is_an_error(self):
        X, Z, _ = rank_fixture()
        with pytest.raises(ValueError, match="empty"):
            evaluate_bli(identity_model(5), X, Z, [], method="nn")

    def test_unknown_method_rejected(self):
        X, Z, test = rank_fixture()
        with pytest.raises(ValueError, match="method"):
            evaluate_bli(identity_model(5), X, Z, test, method="euclidean")


class TestBliReport:
    def test_json_keys(self):
        report = BliReport(mrr=0.5, p_at_1=0.25, n_queries=4, coverage=1.0,
                           per_query_ranks=[("a", 1)], success_class="ok")
        assert set(report.to_json_dict()) == {
            "mrr", "p_at_1", "coverage", "n_queries", "success_class"
        }

    def test_tsv_line_matches_header(self):
        report = BliReport(mrr=0.5, p_at_1=0.25, n_queries=4, coverage=1.0,
                           per_query_ranks=[("a", 1)], success_class="ok")
        assert len(report.to_tsv_line().split("\t")) == len(BliReport.TSV_HEADER.split("\t"))
