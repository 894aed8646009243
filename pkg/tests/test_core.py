import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duelbandit.core import (
    ActionDistribution,
    JointActionDistribution,
    PreferenceMatrix,
    RoundRecord,
    marginals,
    product_joint,
    sample_joint,
    sample_outcome,
    sample_pair,
    skew_complete,
    validate_preference_matrix,
)
from duelbandit.errors import (
    DiagonalViolation,
    RangeViolation,
    SkewSymmetryViolation,
)
from duelbandit.rng import RngHandle

RPS = [[0, 1, -1], [-1, 0, 1], [1, -1, 0]]


class TestValidatePreferenceMatrix:
    def test_zero_matrix_accepted(self):
        m = validate_preference_matrix(np.zeros((4, 4)))
        assert m.k == 4
        assert (m.entries == 0).all()

    def test_rps_accepted(self):
        m = validate_preference_matrix(RPS)
        assert np.array_equal(m.entries, np.array(RPS, dtype=float))

    def test_symmetric_rejected_with_index(self):
        with pytest.raises(SkewSymmetryViolation) as exc:
            validate_preference_matrix([[0, 1], [1, 0]])
        assert exc.value.pair == (0, 1)

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(DiagonalViolation):
            validate_preference_matrix([[0.5, 0], [0, 0]])

    def test_out_of_range_rejected(self):
        with pytest.raises(RangeViolation):
            validate_preference_matrix([[0, 1.5], [-1.5, 0]])

    def test_single_arm_rejected(self):
        with pytest.raises(ValueError):
            validate_preference_matrix([[0.0]])

    def test_storage_exactly_antisymmetric(self):
        # tiny asymmetry below tolerance is absorbed exactly
        eps = 1e-13
        m = validate_preference_matrix([[0, 0.5], [-0.5 + eps, 0]])
        assert m.entries[0, 1] == -m.entries[1, 0]

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    def test_random_skew_completion_always_validates(self, k, seed):
        gen = np.random.default_rng(seed)
        vals = gen.uniform(-1, 1, k * (k - 1) // 2)
        m = skew_complete(vals, k)
        again = validate_preference_matrix(m.entries)
        assert np.array_equal(again.entries, m.entries)


class TestSkewComplete:
    def test_two_arm_direct(self):
        m = skew_complete([0.3])
        assert np.array_equal(m.entries, [[0, 0.3], [-0.3, 0]])

    def test_zero_values_give_zero_matrix(self):
        m = skew_complete([0, 0, 0], k=3)
        assert (m.entries == 0).all()

    def test_out_of_range_clamped_and_logged(self, caplog):
        with caplog.at_level(logging.DEBUG, logger="duelbandit.core"):
            m = skew_complete([1.7])
        assert np.array_equal(m.entries, [[0, 1], [-1, 0]])
        assert any("clamped" in r.message for r in caplog.records)

    def test_wrong_count_rejected(self):
        with pytest.raises(ValueError):
            skew_complete([0.1, 0.2], k=3)


class TestMarginals:
    def test_uniform_joint(self):
        j = JointActionDistribution(np.full((2, 2), 0.25))
        left, right = marginals(j)
        assert np.allclose(left.weights, [0.5, 0.5])
        assert np.allclose(right.weights, [0.5, 0.5])

    def test_point_mass(self):
        w = np.zeros((2, 2))
        w[0, 1] = 1.0
        left, right = marginals(JointActionDistribution(w))
        assert np.array_equal(left.weights, [1, 0])
        assert np.array_equal(right.weights, [0, 1])

    def test_hand_computed_sums(self):
        j = JointActionDistribution([[0.1, 0.2], [0.3, 0.4]])
        left, right = marginals(j)
        assert np.allclose(left.weights, [0.3, 0.7])
        assert np.allclose(right.weights, [0.4, 0.6])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_marginals_are_simplex_points(self, k, seed):
        gen = np.random.default_rng(seed)
        w = gen.uniform(0, 1, (k, k))
        j = JointActionDistribution(w / w.sum())
        left, right = marginals(j)
        assert abs(left.weights.sum() - 1) <= 1e-9
        assert abs(right.weights.sum() - 1) <= 1e-9


class TestDistributions:
    def test_small_drift_renormalized(self):
        d = ActionDistribution([0.5, 0.5 + 3e-8])
        assert abs(d.weights.sum() - 1.0) <= 1e-9

    def test_large_drift_rejected(self):
        with pytest.raises(ValueError):
            ActionDistribution([0.5, 0.6])

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            ActionDistribution([1.1, -0.1])

    def test_product_joint_is_exact_outer(self):
        d = ActionDistribution([0.3, 0.7])
        j = product_joint(d)
        assert np.array_equal(j.weights, np.outer([0.3, 0.7], [0.3, 0.7]))


class TestSampling:
    def test_outcome_sure_win(self, rng):
        assert all(sample_outcome(1.0, rng) == 1 for _ in range(200))

    def test_outcome_sure_loss(self, rng):
        assert all(sample_outcome(-1.0, rng) == -1 for _ in range(200))

    def test_outcome_fair_frequency(self, rng):
        draws = [sample_outcome(0.0, rng) for _ in range(10_000)]
        freq = sum(1 for d in draws if d == 1) / len(draws)
        assert abs(freq - 0.5) <= 0.02

    def test_outcome_out_of_range(self, rng):
        with pytest.raises(RangeViolation):
            sample_outcome(1.2, rng)

    @pytest.mark.parametrize("p_value", [-0.8, 0.0, 0.5])
    def test_outcome_mean_converges(self, p_value):
        n = 40_000
        rng = RngHandle(99).substream(f"mc-{p_value}")
        mean = np.mean([sample_outcome(p_value, rng) for _ in range(n)])
        assert abs(mean - p_value) <= 3.0 * np.sqrt(1.0 / n) * 2.0

    def test_pair_point_mass(self, rng):
        d = ActionDistribution([0, 0, 1.0])
        assert all(sample_pair(d, rng) == (2, 2) for _ in range(50))

    def test_pair_product_frequencies(self, rng):
        d = ActionDistribution([0.5, 0.5])
        counts = np.zeros((2, 2))
        n = 10_000
        for _ in range(n):
            a, b = sample_pair(d, rng)
            counts[a, b] += 1
        assert (np.abs(counts / n - 0.25) <= 0.02).all()

    def test_joint_point_mass(self, rng):
        w = np.zeros((2, 2))
        w[0, 1] = 1.0
        j = JointActionDistribution(w)
        assert all(sample_joint(j, rng) == (0, 1) for _ in range(50))


class TestRoundRecord:
    def test_valid_record(self):
        j = JointActionDistribution(np.full((2, 2), 0.25))
        r = RoundRecord(1, 0, (0, 1), -1, j)
        assert r.duel == (0, 1)

    def test_bad_round_index(self):
        j = JointActionDistribution(np.full((2, 2), 0.25))
        with pytest.raises(ValueError):
            RoundRecord(0, 0, (0, 1), 1, j)

    def test_bad_duel(self):
        j = JointActionDistribution(np.full((2, 2), 0.25))
        with pytest.raises(ValueError):
            RoundRecord(1, 0, (0, 2), 1, j)

    def test_bad_outcome(self):
        j = JointActionDistribution(np.full((2, 2), 0.25))
        with pytest.raises(ValueError):
            RoundRecord(1, 0, (0, 1), 0, j)


class TestDeterminism:
    def test_same_seed_same_draws(self):
        a = RngHandle(7)
        b = RngHandle(7)
        assert [a.random() for _ in range(100)] == [b.random() for _ in range(100)]

    def test_substreams_independent_of_creation_order(self):
        r1 = RngHandle(7)
        x = r1.substream("x").random()
        r2 = RngHandle(7)
        _ = r2.substream("y").random()
        assert r2.substream("x").random() == x

    def test_named_substreams_differ(self):
        r = RngHandle(7)
        assert r.substream("a").random() != r.substream("b").random()
