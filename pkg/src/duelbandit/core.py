"""Domain types and sampling primitives shared by every other module.

The zero-sum convention used throughout: a preference matrix P is
skew-symmetric with entries in [-1, 1], zero diagonal, and P[a, b] is the
expected win-signal of arm a over arm b, so Pr(a beats b) = (P[a, b] + 1) / 2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    DiagonalViolation,
    RangeViolation,
    SkewSymmetryViolation,
)
from .rng import RngHandle

log = logging.getLogger(__name__)

SKEW_TOLERANCE = 1e-12
SIMPLEX_TOLERANCE = 1e-9
RENORMALIZE_LIMIT = 1e-6


def _as_square(entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


class PreferenceMatrix:
    """K x K skew-symmetric matrix in [-1, 1], validated and immutable.

    Stored entries are exactly antisymmetrized (lower triangle is the
    negated upper triangle) so downstream skew checks can be exact.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        arr = _as_square(entries)
        k = arr.shape[0]
        if k < 2:
            raise ValueError(f"arm count must be >= 2, got {k}")
        if not np.isfinite(arr).all():
            raise RangeViolation("non-finite entry in preference matrix")
        diag = np.diagonal(arr)
        bad = np.nonzero(diag != 0.0)[0]
        if bad.size:
            raise DiagonalViolation(int(bad[0]), float(diag[bad[0]]))
        asym = arr + arr.T
        worst = np.unravel_index(np.argmax(np.abs(asym)), asym.shape)
        if abs(asym[worst]) > SKEW_TOLERANCE:
            i, j = int(worst[0]), int(worst[1])
            i, j = min(i, j), max(i, j)
            raise SkewSymmetryViolation(i, j, float(arr[i, j]), float(arr[j, i]))
        if np.abs(arr).max() > 1.0:
            worst = np.unravel_index(np.argmax(np.abs(arr)), arr.shape)
            raise RangeViolation(
                f"entry {arr[worst]!r} at {tuple(int(x) for x in worst)} "
                "outside [-1, 1]"
            )
        upper = np.triu(arr, 1)
        exact = upper - upper.T
        exact.setflags(write=False)
        self.entries = exact

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"PreferenceMatrix(k={self.k})"


class GeneralMatrix:
    """K x K real matrix with finite entries; no symmetry requirement.

    Houses upper-confidence matrices, which are generally not skew.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        arr = _as_square(entries)
        if not np.isfinite(arr).all():
            raise RangeViolation("non-finite entry in matrix")
        arr = arr.copy()
        arr.setflags(write=False)
        self.entries = arr

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"GeneralMatrix(k={self.k})"


def _clean_weights(raw, shape_name: str) -> np.ndarray:
    w = np.asarray(raw, dtype=np.float64).copy()
    if not np.isfinite(w).all():
        raise ValueError(f"non-finite weight in {shape_name}")
    if w.min() < -SKEW_TOLERANCE:
        raise ValueError(f"negative weight {w.min()!r} in {shape_name}")
    np.clip(w, 0.0, None, out=w)
    total = w.sum()
    dev = abs(total - 1.0)
    if dev > RENORMALIZE_LIMIT:
        raise ValueError(f"{shape_name} mass {total!r} too far from 1")
    if dev > SIMPLEX_TOLERANCE:
        w /= total
    w.setflags(write=False)
    return w


class ActionDistribution:
    """Point of the K-simplex (arm marginal or adversary response)."""

    __slots__ = ("weights",)

    def __init__(self, weights):
        w = _clean_weights(weights, "distribution")
        if w.ndim != 1 or w.shape[0] < 1:
            raise ValueError(f"expected a weight vector, got shape {w.shape}")
        self.weights = w

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    def __repr__(self) -> str:
        return f"ActionDistribution(k={self.k})"


class JointActionDistribution:
    """Distribution over ordered arm pairs (a, b) in [K] x [K]."""

    __slots__ = ("weights",)

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"expected K x K weights, got shape {w.shape}")
        self.weights = _clean_weights(w, "joint distribution")

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    def left_marginal(self) -> ActionDistribution:
        return ActionDistribution(self.weights.sum(axis=1))

    def right_marginal(self) -> ActionDistribution:
        return ActionDistribution(self.weights.sum(axis=0))

    def __repr__(self) -> str:
        return f"JointActionDistribution(k={self.k})"


@dataclass(frozen=True)
class RoundRecord:
    """One interaction: context, duel, binary outcome, learner snapshot."""

    round_index: int
    context_id: object
    duel: tuple[int, int]
    outcome: int
    learner_joint: JointActionDistribution

    def __post_init__(self):
        if self.round_index < 1:
            raise ValueError("round_index starts at 1")
        a, b = self.duel
        k = self.learner_joint.k
        if not (0 <= a < k and 0 <= b < k):
            raise ValueError(f"duel {self.duel} out of range for k={k}")
        if self.outcome not in (-1, 1):
            raise ValueError(f"outcome must be -1 or +1, got {self.outcome}")


def validate_preference_matrix(entries) -> PreferenceMatrix:
    """Check skew-symmetry (tolerance 1e-12), zero diagonal and range.

    Raises SkewSymmetryViolation / DiagonalViolation / RangeViolation with
    the offending index; on success returns the exactly antisymmetrized
    matrix.
    """
    return PreferenceMatrix(entries)


def pair_index(k: int) -> list[tuple[int, int]]:
    """Canonical ordering of unordered arm pairs: (0,1), (0,2), ..., (k-2,k-1)."""
    return [(a, b) for a in range(k) for b in range(a + 1, k)]


def skew_complete(upper_values, k: int | None = None) -> PreferenceMatrix:
    """Build a preference matrix from one value per pair a < b.

    Values are taken in the `pair_index` order. Values outside [-1, 1]
    (online regressors may overshoot) are clamped and the clamp is logged;
    the diagonal is zero by construction.
    """
    vals = np.asarray(upper_values, dtype=np.float64).ravel()
    if k is None:
        # n = k(k-1)/2  =>  k = (1 + sqrt(1 + 8n)) / 2
        k = int(round((1.0 + np.sqrt(1.0 + 8.0 * vals.size)) / 2.0))
    if vals.size != k * (k - 1) // 2:
        raise ValueError(
            f"need {k * (k - 1) // 2} pair values for k={k}, got {vals.size}"
        )
    clamped = np.clip(vals, -1.0, 1.0)
    n_clamped = int(np.count_nonzero(clamped != vals))
    if n_clamped:
        log.debug("skew_complete clamped %d of %d predictions into [-1, 1]",
                  n_clamped, vals.size)
    m = np.zeros((k, k))
    rows, cols = np.triu_indices(k, 1)
    m[rows, cols] = clamped
    m -= m.T
    return PreferenceMatrix(m)


def marginals(joint: JointActionDistribution) -> tuple[ActionDistribution, ActionDistribution]:
    """Left and right marginals of a joint duel distribution."""
    return joint.left_marginal(), joint.right_marginal()


def sample_outcome(p_value: float, rng: RngHandle) -> int:
    """Draw +1 with probability (p_value + 1) / 2, else -1."""
    if not np.isfinite(p_value) or abs(p_value) > 1.0:
        raise RangeViolation(f"win-signal {p_value!r} outside [-1, 1]")
    return 1 if rng.random() < (p_value + 1.0) / 2.0 else -1


def _draw_categorical(cumulative: np.ndarray, rng: RngHandle) -> int:
    # inverse-CDF draw; independent of numpy's choice() internals
    u = rng.random() * cumulative[-1]
    return int(np.searchsorted(cumulative, u, side="right").clip(0, cumulative.size - 1))


def sample_pair(dist: ActionDistribution, rng: RngHandle) -> tuple[int, int]:
    """Two iid draws from the same marginal (product measure p x p)."""
    cum = np.cumsum(dist.weights)
    return _draw_categorical(cum, rng), _draw_categorical(cum, rng)


def sample_joint(joint: JointActionDistribution, rng: RngHandle) -> tuple[int, int]:
    """One draw of an ordered pair from the joint."""
    k = joint.k
    cum = np.cumsum(joint.weights.ravel())
    idx = _draw_categorical(cum, rng)
    return idx // k, idx % k


def product_joint(dist: ActionDistribution) -> JointActionDistribution:
    """The exact product measure p x p as a joint distribution."""
    return JointActionDistribution(np.outer(dist.weights, dist.weights))
