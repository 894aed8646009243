import numpy as np
import pytest

from duelbandit.algorithms import CceDb, CceLinDb, MinMaxDb, default_gamma
from duelbandit.core import PreferenceMatrix
from duelbandit.errors import GammaTooSmall, HorizonTooShort
from duelbandit.games import cce_deviation_matrix, cce_violation, minmax_violation
from duelbandit.oracles import (
    FiniteClassAggregator,
    OracleInput,
    RegretBudget,
    VawForecaster,
)
from duelbandit.rng import RngHandle


class TestCceDb:
    def test_first_round_statistics(self, rng):
        k, delta = 3, 0.1
        learner = CceDb(k, delta)
        joint, duel = learner.select(None, rng)
        assert (learner.last_mean == 0).all()
        default = min(2.0, np.sqrt(0.5 * np.log(k * k / delta)))
        off = ~np.eye(k, dtype=bool)
        assert np.allclose(learner.last_confidence[off], default)
        assert (np.diagonal(learner.last_upper) == 0).all()
        assert cce_violation(learner.last_upper, joint) <= 1e-8
        assert 0 <= duel[0] < k and 0 <= duel[1] < k

    def test_formula_example(self, rng):
        # W[0,1]=3, N[0,1]=4, t=10, K=5, delta=0.1
        learner = CceDb(5, 0.1)
        learner.wins[0, 1] = 3
        learner.wins[1, 0] = 1
        learner.t = 10
        learner.select(None, rng)
        assert learner.last_mean[0, 1] == pytest.approx(0.5)
        expected_c = np.sqrt(np.log(25 * 100 / 0.1) / 4)
        assert expected_c == pytest.approx(1.5912, abs=5e-4)
        assert learner.last_confidence[0, 1] == pytest.approx(expected_c)
        assert learner.last_upper[0, 1] == pytest.approx(0.5 + expected_c)

    def test_resolved_matrix_concentrates_on_winner(self, rng):
        # huge counts, clear gap: the CCE must put almost all duel mass on
        # arm 0; cross-checked against a brute-force grid on the limit matrix
        learner = CceDb(2, 0.01)
        n = 10**6
        learner.wins[0, 1] = 0.8 * n
        learner.wins[1, 0] = 0.2 * n
        learner.t = n
        joint, _ = learner.select(None, rng)
        left, right = joint.left_marginal(), joint.right_marginal()
        assert left.weights[0] >= 0.99
        assert right.weights[0] >= 0.99
        limit = np.array([[0.0, 0.6], [-0.6, 0.0]])  # C -> 0 limit of U
        dev = cce_deviation_matrix(limit)
        best_loser_mass = -1.0
        grid = 100
        for i in range(grid + 1):
            for j in range(grid + 1 - i):
                for l in range(grid + 1 - i - j):
                    p = np.array([i, j, l, grid - i - j - l]) / grid
                    if (dev @ p).max() <= 1e-12:
                        best_loser_mass = max(best_loser_mass, p[1] + p[2] + 2 * p[3])
        assert 0.0 <= best_loser_mass <= 1e-9  # only pure (0,0) survives

    def test_observe_updates(self):
        learner = CceDb(3, 0.1)
        learner.observe(None, (0, 1), +1)
        assert learner.wins[0, 1] == 1 and learner.wins[1, 0] == 0
        learner.observe(None, (0, 1), -1)
        assert learner.wins[0, 1] == 1 and learner.wins[1, 0] == 1
        learner.observe(None, (2, 2), +1)
        assert learner.wins[2, 2] == 1
        assert learner.t == 4
        assert learner.counts()[0, 1] == 2

    def test_upper_matrix_identity(self, rng):
        # U[a,b] + U[b,a] == 2 C[a,b] exactly for explored off-diagonal pairs
        learner = CceDb(4, 0.05)
        gen = np.random.default_rng(0)
        for _ in range(200):
            a, b = gen.integers(0, 4, 2)
            learner.observe(None, (int(a), int(b)), int(gen.choice([-1, 1])))
        learner.select(None, rng)
        n = learner.counts()
        u, c = learner.last_upper, learner.last_confidence
        for a in range(4):
            for b in range(4):
                if a != b and n[a, b] > 0:
                    assert u[a, b] + u[b, a] == pytest.approx(2 * c[a, b], abs=1e-12)

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            CceDb(3, 1.5)

    def test_bad_outcome(self):
        learner = CceDb(3, 0.1)
        with pytest.raises(ValueError):
            learner.observe(None, (0, 1), 0)


class TestCceLinDb:
    def test_no_history_unit_features(self, rng):
        learner = CceLinDb(3, horizon=100, delta=0.1, width_multiplier=1.0)
        gen = np.random.default_rng(1)
        x = gen.normal(size=(2, 2, 3))
        x -= x.transpose(1, 0, 2)
        norms = np.linalg.norm(x, axis=2, keepdims=True)
        x = np.divide(x, norms, out=np.zeros_like(x), where=norms > 0)
        learner.select(x, rng)
        assert np.allclose(learner.last_mean, 0.0)
        off = ~np.eye(2, dtype=bool)
        assert np.allclose(learner.last_confidence[off], 1.0)

    def test_one_observation_ridge_arithmetic(self, rng):
        # d=1: one observation (x=1, y=1), ridge=1 -> w_hat = 0.5
        learner = CceLinDb(1, horizon=100, delta=0.1, width_multiplier=2.0)
        x = np.zeros((2, 2, 1))
        x[0, 1, 0] = 1.0
        x[1, 0, 0] = -1.0
        learner.observe(x, (0, 1), +1)
        assert learner.weight_estimate()[0] == pytest.approx(0.5)
        learner.select(x, rng)
        assert learner.last_mean[0, 1] == pytest.approx(0.5)
        assert learner.last_confidence[0, 1] == pytest.approx(np.sqrt(0.5))
        assert learner.last_upper[0, 1] == pytest.approx(0.5 + 2 * np.sqrt(0.5))

    def test_width_shrinks_along_observed_direction(self, rng):
        learner = CceLinDb(2, horizon=10**4, delta=0.1, width_multiplier=1.0)
        x = np.zeros((2, 2, 2))
        x[0, 1] = [1.0, 0.0]
        x[1, 0] = [-1.0, 0.0]
        for _ in range(10**4):
            learner.gram += np.outer(x[0, 1], x[0, 1])
        learner.select(x, rng)
        assert learner.last_confidence[0, 1] <= np.sqrt(1.0 / (1.0 + 10**4)) + 1e-12

    def test_gram_identity(self):
        gen = np.random.default_rng(2)
        learner = CceLinDb(3, horizon=100, delta=0.1)
        expected = np.eye(3)
        for _ in range(50):
            x = gen.uniform(-1, 1, (2, 2, 3))
            x = (x - x.transpose(1, 0, 2)) / 2
            learner.observe(x, (0, 1), int(gen.choice([-1, 1])))
            expected += np.outer(x[0, 1], x[0, 1])
        assert np.array_equal(learner.gram, expected)

    def test_exploration_length_ignored_with_warning(self):
        with pytest.warns(UserWarning, match="ignored"):
            CceLinDb(2, horizon=10, delta=0.1, exploration_length=5)


class TestMinMaxDb:
    def _zero_oracle(self, k):
        tabs = np.zeros((1, 1, k, k))
        return FiniteClassAggregator(tabs)

    def test_zero_predictions_product_joint(self, rng):
        k = 4
        learner = MinMaxDb(k, 16.0, self._zero_oracle(k))
        joint, duel = learner.select(0, rng)
        p = learner.last_marginal
        assert np.array_equal(joint.weights, np.outer(p, p))
        assert minmax_violation(learner.last_prediction, 16.0, joint.left_marginal()) \
            <= k / 16.0
        assert np.abs(joint.weights - np.outer(p, p)).max() <= 1e-12

    def test_unit_gap_predictions_satisfy_program(self, rng):
        tabs = np.zeros((1, 1, 2, 2))
        tabs[0, 0, 0, 1] = 1.0
        tabs[0, 0, 1, 0] = -1.0
        learner = MinMaxDb(2, 10.0, FiniteClassAggregator(tabs))
        learner.select(0, rng)
        p = learner.last_marginal
        y = learner.last_prediction.entries
        g = y @ p + (2.0 / 10.0) / p
        assert (g <= 5 * 2 / 10.0 + 2 / 10.0 + 1e-9).all()

    def test_gamma_floor(self):
        with pytest.raises(GammaTooSmall):
            MinMaxDb(3, 3.0, self._zero_oracle(3))

    def test_observe_feeds_oracle_canonically(self):
        class Recorder:
            def __init__(self):
                self.calls = []

            def update(self, z, y):
                self.calls.append((z.a, z.b, y))

            def predict(self, z):
                return 0.0

        rec = Recorder()
        learner = MinMaxDb(3, 10.0, rec)
        learner.observe(0, (0, 1), +1)
        learner.observe(0, (1, 0), +1)  # same pair, flipped label
        learner.observe(0, (2, 2), +1)  # diagonal: no oracle update
        assert rec.calls == [(0, 1, 1.0), (0, 1, -1.0)]
        assert learner.t == 4

    def test_flipped_duel_drives_same_posterior(self):
        tabs = np.zeros((2, 1, 2, 2))
        tabs[0, 0, 0, 1], tabs[0, 0, 1, 0] = 0.5, -0.5
        tabs[1, 0, 0, 1], tabs[1, 0, 1, 0] = -0.5, 0.5
        a = MinMaxDb(2, 10.0, FiniteClassAggregator(tabs))
        b = MinMaxDb(2, 10.0, FiniteClassAggregator(tabs))
        a.observe(0, (0, 1), +1)
        b.observe(0, (1, 0), -1)
        assert np.allclose(a.oracle.weights, b.oracle.weights)

    def test_select_with_vaw_oracle(self, rng):
        gen = np.random.default_rng(3)
        k, d = 3, 2
        x = gen.uniform(-1, 1, (k, k, d))
        x = (x - x.transpose(1, 0, 2)) / 2
        learner = MinMaxDb(k, 12.0, VawForecaster(d))
        joint, duel = learner.select(x, rng)
        assert joint.k == k
        learner.observe(x, duel, +1 if duel[0] != duel[1] else 1)


class TestDefaultGamma:
    def test_formula(self):
        budget = RegretBudget(lambda t: 10.0)
        assert default_gamma(2, 8000, budget) == pytest.approx(np.sqrt(32000))

    def test_degenerate_budget(self):
        with pytest.raises(ValueError):
            default_gamma(2, 100, RegretBudget(lambda t: 0.0))

    def test_horizon_too_short(self):
        with pytest.raises(HorizonTooShort):
            default_gamma(5, 100, RegretBudget(lambda t: 10.0))
