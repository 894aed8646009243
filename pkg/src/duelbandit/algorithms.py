"""The three learners as explicit step machines.

Each exposes select(context, rng) -> (joint distribution, sampled duel) and
observe(context, duel, outcome) -> state update. Production select/observe
never see the ground truth; the harness runs its diagnostics from read-only
snapshots the learners publish (last confidence matrix, last marginal, ...).
"""

from __future__ import annotations

import warnings

import numpy as np

from .core import (
    GeneralMatrix,
    pair_index,
    product_joint,
    sample_joint,
    sample_pair,
    skew_complete,
)
from .errors import GammaTooSmall, HorizonTooShort
from .games import SolverConfig, solve_cce, solve_minmax_feasibility
from .oracles import OracleInput, RegretBudget
from .rng import RngHandle

UNEXPLORED_WIDTH_CAP = 2.0  # diameter of the payoff range [-1, 1]


def default_gamma(k: int, horizon: int, budget: RegretBudget) -> float:
    """Exploration rate sqrt(20 K T / RegSq(T)).

    Valid only for T >= 4K RegSq(T); below that the main guarantee is
    silent and HorizonTooShort is raised.
    """
    reg = budget(horizon)
    if reg <= 0:
        raise ValueError(f"degenerate regret budget {reg!r}")
    if horizon < 4.0 * k * reg:
        raise HorizonTooShort(
            f"T={horizon} below 4K*RegSq(T)={4.0 * k * reg:.1f}"
        )
    return float(np.sqrt(20.0 * k * horizon / reg))


class CceDb:
    """Count-based learner: empirical preference estimates, per-pair
    confidence widths, and a coarse correlated equilibrium of the upper
    confidence matrix each round."""

    kind = "ccedb"
    gamma = None

    def __init__(self, k: int, delta: float,
                 solver_config: SolverConfig | None = None):
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must be in (0, 1)")
        self.k = int(k)
        self.delta = float(delta)
        self.solver_config = solver_config or SolverConfig()
        self.wins = np.zeros((k, k))
        self.t = 1
        self.last_mean: np.ndarray | None = None
        self.last_confidence: np.ndarray | None = None
        self.last_upper: np.ndarray | None = None
        self.last_iterations = 0

    def counts(self) -> np.ndarray:
        return self.wins + self.wins.T

    def _statistics(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        k = self.k
        n = self.counts()
        explored = n > 0
        safe_n = np.where(explored, n, 1.0)
        mean = np.where(explored, 2.0 * (self.wins / safe_n) - 1.0, 0.0)
        log_term = np.log(k * k * self.t * self.t / self.delta)
        width = np.where(
            explored,
            np.sqrt(log_term / safe_n),
            min(UNEXPLORED_WIDTH_CAP, np.sqrt(0.5 * log_term)),
        )
        upper = mean + width
        np.fill_diagonal(upper, 0.0)
        return mean, width, upper

    def select(self, context, rng: RngHandle):
        """Solve the CCE of the current upper matrix and sample a duel."""
        mean, width, upper = self._statistics()
        report = solve_cce(GeneralMatrix(upper), self.solver_config)
        joint = report.point
        self.last_mean = mean
        self.last_confidence = width
        self.last_upper = upper
        self.last_iterations = report.iterations
        return joint, sample_joint(joint, rng)

    def observe(self, context, duel: tuple[int, int], outcome: int) -> None:
        if outcome not in (-1, 1):
            raise ValueError(f"outcome must be -1 or +1, got {outcome}")
        a, b = duel
        win = (outcome + 1) / 2.0
        self.wins[a, b] += win
        self.wins[b, a] += 1.0 - win
        self.t += 1


class CceLinDb:
    """Ridge-regression learner for feature-tensor contexts: linear point
    estimates, ellipsoidal confidence widths, CCE of the upper matrix."""

    kind = "ccelindb"
    gamma = None

    def __init__(self, dim: int, horizon: int, delta: float,
                 ridge: float = 1.0, width_multiplier: float | None = None,
                 exploration_length: int | None = None,
                 solver_config: SolverConfig | None = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if exploration_length is not None:
            # declared by the source pseudocode but never used by it
            warnings.warn("exploration_length is accepted but ignored",
                          stacklevel=2)
        self.dim = int(dim)
        self.ridge = float(ridge)
        if width_multiplier is None:
            width_multiplier = float(
                np.sqrt(dim * np.log((1.0 + horizon / ridge) / delta))
                + np.sqrt(ridge)
            )
        self.width_multiplier = float(width_multiplier)
        self.solver_config = solver_config or SolverConfig()
        self.gram = np.eye(dim) * ridge
        self.moment = np.zeros(dim)
        self.t = 1
        self.last_mean: np.ndarray | None = None
        self.last_confidence: np.ndarray | None = None
        self.last_upper: np.ndarray | None = None
        self.last_iterations = 0

    def weight_estimate(self) -> np.ndarray:
        return np.linalg.solve(self.gram, self.moment)

    def select(self, context, rng: RngHandle):
        x = np.asarray(context, dtype=np.float64)
        k = x.shape[0]
        if x.ndim != 3 or x.shape[2] != self.dim:
            raise ValueError(f"context must be (K, K, {self.dim}) features")
        w_hat = self.weight_estimate()
        mean = x @ w_hat
        flat = x.reshape(k * k, self.dim)
        solved = np.linalg.solve(self.gram, flat.T)          # (d, K^2)
        width = np.sqrt(np.maximum(np.sum(flat.T * solved, axis=0), 0.0))
        width = width.reshape(k, k)
        upper = mean + self.width_multiplier * width
        np.fill_diagonal(upper, 0.0)
        report = solve_cce(GeneralMatrix(upper), self.solver_config)
        joint = report.point
        self.last_mean = mean
        self.last_confidence = width
        self.last_upper = upper
        self.last_iterations = report.iterations
        return joint, sample_joint(joint, rng)

    def observe(self, context, duel: tuple[int, int], outcome: int) -> None:
        if outcome not in (-1, 1):
            raise ValueError(f"outcome must be -1 or +1, got {outcome}")
        x = np.asarray(context, dtype=np.float64)[duel[0], duel[1]]
        self.gram += np.outer(x, x)
        self.moment += float(outcome) * x
        self.t += 1


class MinMaxDb:
    """Oracle-based learner: query all-pairs predictions, assemble them into
    a skew matrix, solve the inverse-gap feasibility program, and duel two
    iid draws from the resulting marginal."""

    kind = "minmaxdb"

    def __init__(self, k: int, gamma: float, oracle,
                 solver_config: SolverConfig | None = None):
        if gamma < 2.0 * k:
            raise GammaTooSmall(f"gamma={gamma} below 2K={2 * k}")
        self.k = int(k)
        self.gamma = float(gamma)
        self.oracle = oracle
        self.solver_config = solver_config or SolverConfig()
        self.t = 1
        self.pairs = pair_index(k)
        self._triu = np.triu_indices(k, 1)  # same ordering as self.pairs
        self.last_prediction = None
        self.last_marginal: np.ndarray | None = None
        self.last_violation = 0.0
        self.last_iterations = 0

    def _predict_pairs(self, context) -> np.ndarray:
        oracle = self.oracle
        if hasattr(oracle, "predict_matrix"):
            return oracle.predict_matrix(context)[self._triu]
        if hasattr(oracle, "predict_features"):
            x = np.asarray(context, dtype=np.float64)
            return oracle.predict_features(x[self._triu])
        return np.array(
            [oracle.predict(OracleInput(context, a, b)) for a, b in self.pairs]
        )

    def select(self, context, rng: RngHandle):
        predictions = self._predict_pairs(context)
        y_hat = skew_complete(predictions, self.k)
        report = solve_minmax_feasibility(
            y_hat, self.gamma, self.solver_config,
            warm_start=self.last_marginal,
        )
        p = report.point
        self.last_prediction = y_hat
        self.last_marginal = p.weights
        self.last_violation = report.max_violation
        self.last_iterations = report.iterations
        joint = product_joint(p)
        return joint, sample_pair(p, rng)

    def observe(self, context, duel: tuple[int, int], outcome: int) -> None:
        if outcome not in (-1, 1):
            raise ValueError(f"outcome must be -1 or +1, got {outcome}")
        a, b = duel
        if a != b:
            # canonical pair order; the target is skew, so flip the label
            if a > b:
                a, b, outcome = b, a, -outcome
            self.oracle.update(OracleInput(context, a, b), float(outcome))
        self.t += 1
