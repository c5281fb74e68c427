"""Pronunciation distance tests.

Expected values marked as derived are computed by independent oracles in
this file (direct summation for the divergence, hand-evaluated matrix
products for the similarity mapping) rather than by the code under test.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from ppgkit import (
    ClassWeights,
    DistanceConfig,
    FrameLabels,
    PhonemeSet,
    Ppg,
    SimilarityMatrix,
    ValidationError,
    class_weights_from_counts,
    compute_class_weights,
    compute_similarity,
    frame_distance,
    js_divergence,
    map_frame,
    pooled_distance,
    tune_gamma,
    utterance_distance,
)


def js_oracle(p, q):
    """Direct summation of 0.5*KL(p||m) + 0.5*KL(q||m) in base 2."""
    m = [(a + b) / 2.0 for a, b in zip(p, q)]

    def kl(x):
        return sum(xi * math.log2(xi / mi) for xi, mi in zip(x, m) if xi > 0)

    return 0.5 * kl(p) + 0.5 * kl(q)


def random_distributions(rng, count, size):
    raw = rng.random((count, size))
    return raw / raw.sum(axis=1, keepdims=True)


class TestClassWeights:
    def test_direct_formula(self):
        pset = PhonemeSet(("a", "b", "c"))
        weights = class_weights_from_counts([10, 5, 5], pset)
        assert weights.weights == (Fraction(1, 2), Fraction(1), Fraction(1))

    def test_equal_counts_all_one(self):
        pset = PhonemeSet(("a", "b", "c"))
        weights = class_weights_from_counts([7, 7, 7], pset)
        assert all(w == 1 for w in weights.weights)

    def test_zero_count_phoneme_gets_neutral_weight(self):
        pset = PhonemeSet(("a", "b", "c"))
        weights = class_weights_from_counts([8, 2, 0], pset)
        assert weights.weights == (Fraction(1, 4), Fraction(1), Fraction(1))

    def test_weight_times_count_is_constant(self):
        pset = PhonemeSet(tuple("abcdef"))
        rng = np.random.default_rng(11)
        for _ in range(50):
            counts = rng.integers(1, 1000, size=6).tolist()
            weights = class_weights_from_counts(counts, pset)
            products = {w * c for w, c in zip(weights.weights, counts)}
            assert len(products) == 1  # exact rational arithmetic
            assert max(weights.weights) == 1

    def test_from_frame_labels(self):
        pset = PhonemeSet(("a", "b", "c"))
        weights = compute_class_weights(
            [FrameLabels([0, 0, 1]), FrameLabels([0, 0, 2])], pset
        )
        assert weights.counts == (4, 1, 1)
        assert weights.weights == (Fraction(1, 4), Fraction(1), Fraction(1))

    def test_empty_input_rejected(self):
        pset = PhonemeSet(("a", "b"))
        with pytest.raises(ValidationError):
            compute_class_weights(FrameLabels([]), pset)


class TestComputeSimilarity:
    def test_one_hot_corpus_gives_diagonal_weights(self):
        # Hand-checked on 3 phonemes: every frame contributes lambda_x at
        # (x, x) and zero elsewhere, so row means are lambda_x * e_x.
        pset = PhonemeSet(("a", "b", "c"))
        labels = [0] * 6 + [1] * 3 + [2] * 2
        frames = np.eye(3)[np.array(labels)]
        weights = compute_class_weights(FrameLabels(labels), pset)
        sim = compute_similarity([Ppg(pset, frames)], weights)
        expected = np.diag(weights.as_array())
        assert np.max(np.abs(sim.matrix - expected)) < 1e-12

    def test_single_soft_frame_rows(self):
        # Frame (0.6, 0.4) with unit weights: phoneme 0 owns the frame, so
        # row 0 is the frame itself; row 1 is empty and defaults to one-hot.
        pset = PhonemeSet(("a", "b"))
        weights = class_weights_from_counts([1, 1], pset)
        sim = compute_similarity([Ppg(pset, [[0.6, 0.4]])], weights)
        assert np.allclose(sim.matrix[0], [0.6, 0.4], atol=1e-15)
        assert np.allclose(sim.matrix[1], [0.0, 1.0], atol=1e-15)
        assert sim.provenance == (1, 0)

    def test_provenance_sums_to_total_frames(self):
        pset = PhonemeSet(("a", "b", "c"))
        rng = np.random.default_rng(5)
        ppgs = [
            Ppg(pset, random_distributions(rng, n, 3)) for n in (4, 9, 1)
        ]
        weights = class_weights_from_counts([5, 3, 2], pset)
        sim = compute_similarity(ppgs, weights)
        assert sum(sim.provenance) == 14

    def test_weighted_argmax_decides_ownership(self):
        # Weighting flips the winner: raw argmax is phoneme 0 but the
        # class-weighted vector (0.6*0.25, 0.4*1) peaks at phoneme 1.
        pset = PhonemeSet(("a", "b"))
        weights = class_weights_from_counts([4, 1], pset)
        sim = compute_similarity([Ppg(pset, [[0.6, 0.4]])], weights)
        assert sim.provenance == (0, 1)
        assert np.allclose(sim.matrix[1], [0.15, 0.4], atol=1e-15)

    def test_empty_corpus_rejected(self):
        pset = PhonemeSet(("a", "b"))
        weights = class_weights_from_counts([1, 1], pset)
        with pytest.raises(ValidationError):
            compute_similarity([], weights)
        with pytest.raises(ValidationError):
            compute_similarity([Ppg(pset, np.zeros((0, 2)))], weights)


class TestMapFrame:
    def test_identity_matrix_returns_input(self):
        pset = PhonemeSet(("a", "b", "c"))
        config = DistanceConfig(gamma=1.2, similarity=SimilarityMatrix.identity(pset))
        g = np.array([0.25, 0.5, 0.25])
        assert np.max(np.abs(map_frame(g, config) - g)) < 1e-12

    def test_none_similarity_is_exact_identity(self):
        g = np.array([0.3, 0.7])
        out = map_frame(g, DistanceConfig(gamma=2.0))
        assert np.array_equal(out, g)

    def test_all_ones_smooths_to_uniform(self):
        pset = PhonemeSet(("a", "b"))
        sim = SimilarityMatrix(pset, np.ones((2, 2)), (0, 0))
        out = map_frame([0.9, 0.1], DistanceConfig(gamma=1.7, similarity=sim))
        assert np.allclose(out, [0.5, 0.5], atol=1e-15)

    def test_elementwise_power_then_product(self):
        # Hand evaluation: S**2 = ((1, 0.0625), (0.0625, 1)); S**2 @ (1,0)
        # = (1, 0.0625) -> normalized (16/17, 1/17).
        pset = PhonemeSet(("a", "b"))
        sim = SimilarityMatrix(pset, [[1.0, 0.25], [0.25, 1.0]], (0, 0))
        out = map_frame([1.0, 0.0], DistanceConfig(gamma=2.0, similarity=sim))
        assert out[0] == pytest.approx(16.0 / 17.0, abs=1e-12)
        assert out[1] == pytest.approx(1.0 / 17.0, abs=1e-12)

    def test_output_sums_to_one(self):
        pset = PhonemeSet(tuple("abcd"))
        rng = np.random.default_rng(6)
        sim = SimilarityMatrix(pset, rng.random((4, 4)), (0,) * 4)
        for g in random_distributions(rng, 50, 4):
            out = map_frame(g, DistanceConfig(gamma=0.7, similarity=sim))
            assert abs(out.sum() - 1.0) < 1e-9

    def test_zero_row_interaction_rejected(self):
        pset = PhonemeSet(("a", "b"))
        sim = SimilarityMatrix(pset, [[0.0, 0.0], [0.0, 1.0]], (0, 0))
        with pytest.raises(ValidationError, match="zero"):
            map_frame([1.0, 0.0], DistanceConfig(gamma=1.0, similarity=sim))


class TestJsDivergence:
    def test_equal_inputs_give_zero(self):
        rng = np.random.default_rng(7)
        for p in random_distributions(rng, 20, 40):
            assert js_divergence(p, p) == 0.0

    def test_disjoint_one_hots_give_one(self):
        assert js_divergence([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0, abs=1e-15)

    def test_half_vs_one_hot(self):
        expected = js_oracle([0.5, 0.5], [1.0, 0.0])  # = 0.311278...
        assert js_divergence([0.5, 0.5], [1.0, 0.0]) == pytest.approx(
            expected, abs=1e-12
        )
        assert expected == pytest.approx(0.3113, abs=5e-5)

    def test_matches_oracle_on_random_pairs(self):
        rng = np.random.default_rng(8)
        ps = random_distributions(rng, 200, 40)
        qs = random_distributions(rng, 200, 40)
        for p, q in zip(ps, qs):
            assert abs(js_divergence(p, q) - js_oracle(p, q)) < 1e-9

    def test_symmetry_bounds_nonnegativity(self):
        rng = np.random.default_rng(9)
        ps = random_distributions(rng, 200, 40)
        qs = random_distributions(rng, 200, 40)
        for p, q in zip(ps, qs):
            d = js_divergence(p, q)
            assert 0.0 <= d <= 1.0 + 1e-9
            assert abs(d - js_divergence(q, p)) < 1e-12

    def test_sparse_supports(self):
        p = [0.5, 0.5, 0.0, 0.0]
        q = [0.0, 0.0, 0.5, 0.5]
        assert js_divergence(p, q) == pytest.approx(1.0, abs=1e-15)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError, match="mismatch"):
            js_divergence([1.0], [0.5, 0.5])

    def test_non_distribution_rejected(self):
        with pytest.raises(ValidationError):
            js_divergence([0.9, 0.3], [0.5, 0.5])
        with pytest.raises(ValidationError):
            js_divergence([1.5, -0.5], [0.5, 0.5])


class TestFrameDistance:
    def test_equal_frames_zero_for_any_config(self):
        pset = PhonemeSet(("a", "b", "c"))
        sim = SimilarityMatrix(pset, [[1, 0.2, 0.1], [0.2, 1, 0.3], [0.1, 0.3, 1]], (0, 0, 0))
        g = [0.2, 0.5, 0.3]
        for gamma in (0.5, 1.0, 1.2, 3.0):
            assert frame_distance(g, g, DistanceConfig(gamma=gamma, similarity=sim)) == 0.0

    def test_identity_similarity_reduces_to_js(self):
        rng = np.random.default_rng(10)
        ps = random_distributions(rng, 30, 40)
        qs = random_distributions(rng, 30, 40)
        for gamma in (0.5, 1.0, 1.2, 2.0):
            config = DistanceConfig(gamma=gamma)
            for p, q in zip(ps, qs):
                assert frame_distance(p, q, config) == js_divergence(p, q)

    def test_mapped_one_hots_match_oracle(self):
        # Mapping sends (1,0) -> (0.8, 0.2) and (0,1) -> (0.2, 0.8); the
        # direct-summation oracle puts their divergence at 0.278072 bits.
        pset = PhonemeSet(("a", "b"))
        sim = SimilarityMatrix(pset, [[1.0, 0.25], [0.25, 1.0]], (0, 0))
        config = DistanceConfig(gamma=1.0, similarity=sim)
        expected = js_oracle([0.8, 0.2], [0.2, 0.8])
        assert frame_distance([1.0, 0.0], [0.0, 1.0], config) == pytest.approx(
            expected, abs=1e-12
        )


class TestUtteranceDistance:
    def test_equal_ppgs_give_zero_curve(self):
        pset = PhonemeSet(("a", "b"))
        rng = np.random.default_rng(12)
        ppg = Ppg(pset, random_distributions(rng, 10, 2))
        result = utterance_distance(ppg, ppg)
        assert result.mean == 0.0
        assert np.array_equal(result.curve, np.zeros(10))

    def test_mean_is_average_of_frame_distances(self):
        pset = PhonemeSet(("a", "b"))
        a = Ppg(pset, [[1.0, 0.0], [0.5, 0.5]])
        b = Ppg(pset, [[0.0, 1.0], [0.5, 0.5]])
        result = utterance_distance(a, b)
        d1 = js_oracle([1.0, 0.0], [0.0, 1.0])
        d2 = 0.0
        assert result.mean == pytest.approx((d1 + d2) / 2.0, abs=1e-12)

    def test_curve_matches_per_frame_oracle(self):
        pset = PhonemeSet(tuple("abcde"))
        rng = np.random.default_rng(13)
        sim = SimilarityMatrix(pset, rng.random((5, 5)) + 0.05, (0,) * 5)
        config = DistanceConfig(gamma=1.3, similarity=sim)
        a = Ppg(pset, random_distributions(rng, 10, 5))
        b = Ppg(pset, random_distributions(rng, 10, 5))
        result = utterance_distance(a, b, config)
        for t in range(10):
            per_frame = frame_distance(a.frames[t], b.frames[t], config)
            assert abs(result.curve[t] - per_frame) < 1e-9
        assert result.mean == pytest.approx(result.curve.mean(), abs=1e-15)

    def test_frame_count_mismatch_names_both_lengths(self):
        pset = PhonemeSet(("a", "b"))
        a = Ppg(pset, [[0.5, 0.5]] * 3)
        b = Ppg(pset, [[0.5, 0.5]] * 5)
        with pytest.raises(ValidationError, match="3 vs 5"):
            utterance_distance(a, b)

    def test_empty_ppgs_rejected(self):
        pset = PhonemeSet(("a", "b"))
        empty = Ppg(pset, np.zeros((0, 2)))
        with pytest.raises(ValidationError):
            utterance_distance(empty, empty)

    def test_permutation_invariance_of_mean(self):
        pset = PhonemeSet(("a", "b", "c"))
        rng = np.random.default_rng(14)
        a_frames = random_distributions(rng, 12, 3)
        b_frames = random_distributions(rng, 12, 3)
        order = rng.permutation(12)
        base = utterance_distance(Ppg(pset, a_frames), Ppg(pset, b_frames))
        shuffled = utterance_distance(
            Ppg(pset, a_frames[order]), Ppg(pset, b_frames[order])
        )
        assert shuffled.mean == pytest.approx(base.mean, abs=1e-12)
        assert np.allclose(np.sort(shuffled.curve), np.sort(base.curve), atol=1e-15)

    def test_pooled_distance_is_frame_weighted(self):
        pset = PhonemeSet(("a", "b"))
        one = (Ppg(pset, [[1.0, 0.0]]), Ppg(pset, [[0.0, 1.0]]))
        three = (Ppg(pset, [[0.5, 0.5]] * 3), Ppg(pset, [[0.5, 0.5]] * 3))
        pooled = pooled_distance([one, three])
        assert pooled.mean == pytest.approx(1.0 / 4.0, abs=1e-12)
        assert len(pooled.curve) == 4


class TestTuneGamma:
    def test_single_element_grid(self):
        pset = PhonemeSet(("a", "b"))
        items = [
            (Ppg(pset, [[0.9, 0.1]]), Ppg(pset, [[0.1, 0.9]]), 0.8),
            (Ppg(pset, [[0.8, 0.2]]), Ppg(pset, [[0.2, 0.8]]), 0.5),
            (Ppg(pset, [[0.6, 0.4]]), Ppg(pset, [[0.4, 0.6]]), 0.1),
        ]
        gamma, correlation = tune_gamma(items, [1.5])
        assert gamma == 1.5
        assert correlation > 0.9

    def test_all_equal_wer_rejected(self):
        pset = PhonemeSet(("a", "b"))
        items = [
            (Ppg(pset, [[0.9, 0.1]]), Ppg(pset, [[0.1, 0.9]]), 0.5),
            (Ppg(pset, [[0.8, 0.2]]), Ppg(pset, [[0.2, 0.8]]), 0.5),
            (Ppg(pset, [[0.6, 0.4]]), Ppg(pset, [[0.4, 0.6]]), 0.5),
        ]
        with pytest.raises(ValidationError, match="constant"):
            tune_gamma(items, [1.0, 1.2])

    def test_too_few_items_rejected(self):
        pset = PhonemeSet(("a", "b"))
        items = [(Ppg(pset, [[0.9, 0.1]]), Ppg(pset, [[0.1, 0.9]]), 0.5)]
        with pytest.raises(ValidationError, match="3"):
            tune_gamma(items, [1.0])

    def test_empty_grid_rejected(self):
        pset = PhonemeSet(("a", "b"))
        items = [
            (Ppg(pset, [[0.9, 0.1]]), Ppg(pset, [[0.1, 0.9]]), 0.1),
            (Ppg(pset, [[0.8, 0.2]]), Ppg(pset, [[0.2, 0.8]]), 0.2),
            (Ppg(pset, [[0.6, 0.4]]), Ppg(pset, [[0.4, 0.6]]), 0.3),
        ]
        with pytest.raises(ValidationError, match="empty"):
            tune_gamma(items, [])

    def test_constant_distance_rejected(self):
        pset = PhonemeSet(("a", "b"))
        same = Ppg(pset, [[0.5, 0.5]])
        items = [(same, same, 0.1), (same, same, 0.2), (same, same, 0.3)]
        with pytest.raises(ValidationError, match="gamma"):
            tune_gamma(items, [1.0])
