"""Online square-loss regression oracles with predict-then-update semantics.

Inputs are (context, a, b) triples; labels are the raw duel outcomes in
{-1, +1}, whose conditional mean is exactly the ground-truth preference
entry, so no recentering is applied. `predict` is pure (no state change);
`update` mutates the single-owner state.

Implemented: weighted-average exponential aggregation over a finite class,
the ridge forecaster that folds the current input into its design before
predicting, and projected online gradient descent. Generalized-linear,
kernel and Banach-space oracles are declared unsupported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, UnsupportedOracle

EXP_WEIGHTS_ETA = 0.125  # square loss on [-1,1] predictions is 1/8-exp-concave

_UNSUPPORTED_KINDS = ("glm", "glmtron", "rkhs", "kernel", "banach")


@dataclass(frozen=True)
class OracleInput:
    """One regression input: a context (id or feature tensor) and an arm pair."""

    context: object
    a: int
    b: int


@dataclass(frozen=True)
class RegretBudget:
    """Known upper bound T -> RegSq(T) on an oracle's square-loss regret."""

    bound_fn: Callable[[float], float]
    description: str = ""

    def __call__(self, horizon: float) -> float:
        return float(self.bound_fn(horizon))


def regret_budget(
    oracle_kind: str,
    *,
    class_size: int | None = None,
    dim: int | None = None,
    ridge: float = 1.0,
    radius: float = 1.0,
    feature_bound: float = 1.0,
) -> RegretBudget:
    """The regret bound the harness uses to tune the exploration rate.

    finite: 8 ln|F| (the 1/8-exp-concavity constant for the [-1,1] loss
    range; a tighter constant holds only for [0,1]-range conventions).
    vaw: d ln(1 + T/d) + ridge * radius^2. ogd: radius * L * sqrt(T).
    """
    kind = oracle_kind.lower()
    if kind in _UNSUPPORTED_KINDS:
        raise UnsupportedOracle(f"oracle kind {oracle_kind!r} is out of scope")
    if kind == "finite":
        if not class_size or class_size < 1:
            raise ValueError("finite-class budget needs class_size >= 1")
        const = 8.0 * np.log(max(class_size, 2))
        return RegretBudget(lambda t: const, f"8 ln|F|, |F|={class_size}")
    if kind == "vaw":
        if not dim or dim < 1:
            raise ValueError("vaw budget needs dim >= 1")
        c0 = ridge * radius * radius
        return RegretBudget(
            lambda t: dim * np.log(1.0 + t / dim) + c0,
            f"d ln(1+T/d) + {c0:g}, d={dim}",
        )
    if kind == "ogd":
        if not dim or dim < 1:
            raise ValueError("ogd budget needs dim >= 1")
        lip = 2.0 * (radius * feature_bound + 1.0) * feature_bound
        scale = radius * lip
        return RegretBudget(lambda t: scale * np.sqrt(t), f"{scale:g} sqrt(T)")
    raise UnsupportedOracle(f"unknown oracle kind {oracle_kind!r}")


class FiniteClassAggregator:
    """Exponentially weighted average over a finite set of hypotheses.

    Hypotheses are precomputed prediction tables of shape
    (|F|, n_contexts, K, K); contexts are integer ids. The forecast is the
    weight-weighted mean of hypothesis predictions.
    """

    kind = "finite"

    def __init__(self, tables: np.ndarray, eta: float = EXP_WEIGHTS_ETA):
        tables = np.asarray(tables, dtype=np.float64)
        if tables.ndim != 4:
            raise ValueError("tables must have shape (|F|, n_contexts, K, K)")
        self.tables = tables
        self.eta = float(eta)
        self.log_weights = np.zeros(tables.shape[0])
        self._n_updates = 0

    @property
    def class_size(self) -> int:
        return self.tables.shape[0]

    @property
    def weights(self) -> np.ndarray:
        w = np.exp(self.log_weights - self.log_weights.max())
        return w / w.sum()

    def _cell(self, z: OracleInput) -> np.ndarray:
        x = int(z.context)
        if not 0 <= x < self.tables.shape[1]:
            raise DimensionMismatch(f"context id {x} outside table")
        return self.tables[:, x, z.a, z.b]

    def predict(self, z: OracleInput) -> float:
        return float(self.weights @ self._cell(z))

    def predict_matrix(self, context) -> np.ndarray:
        """All-pairs forecast for one context (used by the pair-querying loop)."""
        x = int(context)
        return np.einsum("f,fij->ij", self.weights, self.tables[:, x])

    def update(self, z: OracleInput, y: float) -> None:
        preds = self._cell(z)
        self.log_weights = self.log_weights - self.eta * (preds - y) ** 2
        self._n_updates += 1
        if self._n_updates % 512 == 0:
            self.log_weights -= self.log_weights.max()  # drift guard

    def regret_budget(self) -> RegretBudget:
        return regret_budget("finite", class_size=self.class_size)


def _pair_feature(z: OracleInput) -> np.ndarray:
    """Feature vector for a pair: either z.context is it, or a (K,K,d) tensor."""
    x = np.asarray(z.context, dtype=np.float64)
    if x.ndim == 3:
        x = x[z.a, z.b]
    return x


class VawForecaster:
    """Ridge forecaster whose design includes the input being predicted.

    State is the regularized gram matrix A = ridge*I + sum x x^T and the
    moment vector b = sum y x; the forecast at x is b^T (A + x x^T)^{-1} x.
    """

    kind = "vaw"

    def __init__(self, dim: int, ridge: float = 1.0):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = int(dim)
        self.ridge = float(ridge)
        self.gram = np.eye(dim) * ridge
        self.moment = np.zeros(dim)
        self._inv = np.eye(dim) / ridge
        self._updates_since_sync = 0

    def _check(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"feature shape {x.shape}, expected ({self.dim},)")
        return x

    def predict(self, z: OracleInput) -> float:
        return float(self.predict_features(self._check(_pair_feature(z))[None, :])[0])

    def predict_features(self, feats: np.ndarray) -> np.ndarray:
        """Batched forecasts; rank-one identity avoids per-row solves."""
        feats = np.asarray(feats, dtype=np.float64)
        if feats.shape[1] != self.dim:
            raise DimensionMismatch(f"features have dim {feats.shape[1]}")
        v = self._inv @ feats.T                      # (d, n)
        denom = 1.0 + np.sum(feats.T * v, axis=0)
        return (self.moment @ v) / denom

    def update(self, z: OracleInput, y: float) -> None:
        x = self._check(_pair_feature(z))
        self.gram += np.outer(x, x)
        self.moment += y * x
        v = self._inv @ x
        self._inv -= np.outer(v, v) / (1.0 + x @ v)
        self._updates_since_sync += 1
        if self._updates_since_sync >= 1024:
            self._inv = np.linalg.inv(self.gram)  # shed rank-one drift
            self._updates_since_sync = 0

    def regret_budget(self) -> RegretBudget:
        return regret_budget("vaw", dim=self.dim, ridge=self.ridge)


class OgdForecaster:
    """Projected online gradient descent on the square loss.

    Step size radius / (L sqrt(T)) with gradient bound
    L = 2 (radius * feature_bound + 1) * feature_bound; iterates projected
    onto the L2 ball of the given radius.
    """

    kind = "ogd"

    def __init__(self, dim: int, horizon: int, radius: float = 1.0,
                 feature_bound: float = 1.0):
        if dim < 1 or horizon < 1:
            raise ValueError("dim and horizon must be >= 1")
        self.dim = int(dim)
        self.radius = float(radius)
        self.feature_bound = float(feature_bound)
        lip = 2.0 * (radius * feature_bound + 1.0) * feature_bound
        self.step = radius / (lip * np.sqrt(horizon))
        self.theta = np.zeros(dim)

    def _check(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"feature shape {x.shape}, expected ({self.dim},)")
        return x

    def predict(self, z: OracleInput) -> float:
        return float(self.theta @ self._check(_pair_feature(z)))

    def predict_features(self, feats: np.ndarray) -> np.ndarray:
        feats = np.asarray(feats, dtype=np.float64)
        if feats.shape[1] != self.dim:
            raise DimensionMismatch(f"features have dim {feats.shape[1]}")
        return feats @ self.theta

    def update(self, z: OracleInput, y: float) -> None:
        x = self._check(_pair_feature(z))
        grad = 2.0 * (self.theta @ x - y) * x
        theta = self.theta - self.step * grad
        norm = np.linalg.norm(theta)
        if norm > self.radius:
            theta *= self.radius / norm
        self.theta = theta

    def regret_budget(self) -> RegretBudget:
        return regret_budget("ogd", dim=self.dim, radius=self.radius,
                             feature_bound=self.feature_bound)
