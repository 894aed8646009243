"""Synthetic contextual dueling environments and the named matrix fixtures.

Environments draw (context, realized preference matrix) pairs and expose the
ground-truth conditional mean for evaluation only; learners see contexts and
binary outcomes, never the matrix. Realizability holds by construction: the
generating function is a member of the hypothesis class handed to the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PreferenceMatrix, validate_preference_matrix
from .errors import UnknownContext
from .rng import RngHandle

FINITE_CLASS_MARGIN_CAP = 0.8   # keeps win probabilities away from {0, 1}


def rps3() -> PreferenceMatrix:
    """The 3-arm cyclic matrix with no pure equilibrium."""
    return PreferenceMatrix([[0, 1, -1], [-1, 0, 1], [1, -1, 0]])


def condorcet(k: int, margin: float) -> PreferenceMatrix:
    """Arm 0 beats every other arm by `margin`; remaining pairs tie."""
    if not 0 < margin <= 1:
        raise ValueError("margin must be in (0, 1]")
    m = np.zeros((k, k))
    m[0, 1:] = margin
    m[1:, 0] = -margin
    return PreferenceMatrix(m)


def hardness(eps: float) -> PreferenceMatrix:
    """3-arm instance where estimating the near-optimal arm forces mistakes."""
    if not 0 <= eps <= 1:
        raise ValueError("eps must be in [0, 1]")
    return PreferenceMatrix([[0, 1, 0], [-1, 0, eps], [0, -eps, 0]])


@dataclass(frozen=True)
class NamedFixture:
    name: str
    matrix: PreferenceMatrix


def named_fixture(name: str, **params) -> NamedFixture:
    builders = {"rps3": rps3, "condorcet": condorcet, "hardness": hardness}
    if name not in builders:
        raise ValueError(f"unknown fixture {name!r}; have {sorted(builders)}")
    return NamedFixture(name, builders[name](**params))


def _skew_perturbation(k: int, amplitude: float, base: np.ndarray,
                       rng: RngHandle) -> np.ndarray:
    """Zero-mean skew noise, clipped per entry so base + noise stays in [-1, 1].

    The symmetric per-entry support keeps the conditional mean exactly at
    `base`.
    """
    room = np.minimum(amplitude, 1.0 - np.abs(np.triu(base, 1)))
    raw = rng.generator.uniform(-1.0, 1.0, (k, k))
    upper = np.triu(raw, 1) * room
    return upper - upper.T


class Environment:
    """Contract: sample_round draws (context, realized matrix); ground_truth
    maps a context back to its conditional-mean matrix."""

    kind = "abstract"

    @property
    def k(self) -> int:
        raise NotImplementedError

    def sample_round(self, rng: RngHandle):
        raise NotImplementedError

    def ground_truth(self, x) -> PreferenceMatrix:
        raise NotImplementedError


class FixedMatrixEnvironment(Environment):
    """Singleton context; every round realizes the same matrix."""

    kind = "fixed"

    def __init__(self, matrix: PreferenceMatrix, perturbation: float = 0.0):
        self.matrix = matrix
        self.perturbation = float(perturbation)

    @property
    def k(self) -> int:
        return self.matrix.k

    def sample_round(self, rng: RngHandle):
        if self.perturbation > 0.0:
            noise = _skew_perturbation(self.k, self.perturbation,
                                       self.matrix.entries, rng)
            return 0, validate_preference_matrix(self.matrix.entries + noise)
        return 0, self.matrix

    def ground_truth(self, x) -> PreferenceMatrix:
        if x != 0:
            raise UnknownContext(f"fixed environment has only context 0, got {x!r}")
        return self.matrix


class FiniteClassEnvironment(Environment):
    """Uniform contexts over a finite grid; truth is one table of a known class."""

    kind = "finite_class"

    def __init__(self, tables: np.ndarray, truth_index: int,
                 perturbation: float = 0.0):
        tables = np.asarray(tables, dtype=np.float64)
        if tables.ndim != 4:
            raise ValueError("tables must have shape (|F|, n_contexts, K, K)")
        if not 0 <= truth_index < tables.shape[0]:
            raise ValueError("truth_index outside the class")
        self.tables = tables
        self.truth_index = int(truth_index)
        self.perturbation = float(perturbation)
        self._truth = [validate_preference_matrix(tables[truth_index, c])
                       for c in range(tables.shape[1])]

    @property
    def k(self) -> int:
        return self.tables.shape[2]

    @property
    def n_contexts(self) -> int:
        return self.tables.shape[1]

    def sample_round(self, rng: RngHandle):
        x = rng.integers(0, self.n_contexts)
        truth = self._truth[x]
        if self.perturbation > 0.0:
            noise = _skew_perturbation(self.k, self.perturbation,
                                       truth.entries, rng)
            return x, validate_preference_matrix(truth.entries + noise)
        return x, truth

    def ground_truth(self, x) -> PreferenceMatrix:
        xi = int(x)
        if not 0 <= xi < self.n_contexts:
            raise UnknownContext(f"context {x!r} outside grid of {self.n_contexts}")
        return self._truth[xi]


class LinearRealizableEnvironment(Environment):
    """Contexts are (K, K, d) feature tensors; truth is linear in them.

    Feature tensors are antisymmetric across the pair axes, so predictions of
    any linear model are skew by linearity; each draw is rescaled so the
    ground-truth entries land in [-1, 1].
    """

    kind = "linear"

    def __init__(self, k: int, weight: np.ndarray):
        weight = np.asarray(weight, dtype=np.float64)
        if weight.ndim != 1:
            raise ValueError("weight must be a vector")
        if np.abs(weight).max() > 1.0:
            raise ValueError("weight entries must lie in [-1, 1]")
        self._k = int(k)
        self.weight = weight
        self.dim = weight.shape[0]

    @property
    def k(self) -> int:
        return self._k

    def sample_round(self, rng: RngHandle):
        k, d = self._k, self.dim
        raw = rng.generator.uniform(-1.0, 1.0, (k, k, d))
        feats = (raw - raw.transpose(1, 0, 2)) / 2.0
        vals = feats @ self.weight
        peak = np.abs(vals).max()
        if peak > 1.0 - 1e-9:
            # headroom absorbs re-summation error when truth is recomputed
            feats *= (1.0 - 1e-9) / peak
        return feats, self.ground_truth(feats)

    def ground_truth(self, x) -> PreferenceMatrix:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 3 or x.shape != (self._k, self._k, self.dim):
            raise UnknownContext(
                f"expected a ({self._k}, {self._k}, {self.dim}) feature tensor"
            )
        return validate_preference_matrix(x @ self.weight)


def make_finite_class(
    n_contexts: int, k: int, class_size: int, rng: RngHandle,
    margin_cap: float = FINITE_CLASS_MARGIN_CAP, perturbation: float = 0.0,
) -> tuple[FiniteClassEnvironment, np.ndarray]:
    """Random finite hypothesis class with the truth designated inside it.

    Entries are uniform in [-margin_cap, margin_cap], antisymmetrized.
    Returns the environment and the full table stack for the oracle.
    """
    if class_size < 1:
        raise ValueError("class_size must be >= 1")
    gen = rng.generator
    raw = gen.uniform(-margin_cap, margin_cap, (class_size, n_contexts, k, k))
    upper = np.triu(raw, 1)
    tables = upper - upper.transpose(0, 1, 3, 2)
    truth_index = int(gen.integers(0, class_size))
    env = FiniteClassEnvironment(tables, truth_index, perturbation=perturbation)
    return env, tables


def make_linear_environment(
    k: int, dim: int, rng: RngHandle
) -> LinearRealizableEnvironment:
    """Linear environment with a random weight vector in [-1, 1]^d."""
    w = rng.generator.uniform(-1.0, 1.0, dim)
    return LinearRealizableEnvironment(k, w)
