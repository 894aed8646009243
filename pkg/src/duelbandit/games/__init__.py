"""Equilibrium and feasibility solvers.

Three entry points, all pure functions of (input, config):

  * solve_cce               -- coarse correlated equilibrium of a general-sum
                               K x K matrix, as a joint distribution over pairs;
  * solve_zero_sum_nash     -- maximin strategy of a skew-symmetric game
                               (diagnostic benchmark; the game value is 0);
  * solve_minmax_feasibility -- the smoothed inverse-gap program selecting a
                               marginal whose predicted exposure plus
                               exploration penalty stays within budget.

CCE and Nash reduce to one linear program: minimize the maximum constraint
violation over a simplex. The inverse-gap program is convex (linear exposure
plus 1/p_i penalty) and is solved by entropic mirror descent on a floored
simplex. Hot kernels live in a compiled extension with a numpy fallback; see
`backend_name()`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import (
    ActionDistribution,
    GeneralMatrix,
    JointActionDistribution,
    PreferenceMatrix,
)
from ..errors import GammaTooSmall, NotConverged
from ._backend import backend_name, get_kernels

__all__ = [
    "SolverConfig",
    "FeasibilityReport",
    "solve_cce",
    "solve_zero_sum_nash",
    "solve_minmax_feasibility",
    "cce_deviation_matrix",
    "cce_violation",
    "backend_name",
    "get_kernels",
]

DEFAULT_MAX_ITERATIONS = 50_000
DEFAULT_VIOLATION_TOLERANCE = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    """Iteration budget, feasibility tolerance and simplex floor.

    floor_epsilon=None means "choose per solve": the inverse-gap program
    uses 1/(4 gamma), below which no feasible point can be excluded (the
    feasibility proof's smoothed point has every coordinate >= 1/gamma).
    """

    max_iterations: int = DEFAULT_MAX_ITERATIONS
    violation_tolerance: float = DEFAULT_VIOLATION_TOLERANCE
    floor_epsilon: float | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.violation_tolerance <= 0:
            raise ValueError("violation_tolerance must be positive")
        if self.floor_epsilon is not None and not (0.0 < self.floor_epsilon):
            raise ValueError("floor_epsilon must be positive")


@dataclass(frozen=True)
class FeasibilityReport:
    """Solver output: the point, its worst signed constraint violation
    (<= 0 means strictly feasible), iterations used, and convergence flag."""

    point: object
    max_violation: float
    iterations: int
    converged: bool


def _entries(m) -> np.ndarray:
    if isinstance(m, (PreferenceMatrix, GeneralMatrix)):
        return m.entries
    return np.asarray(m, dtype=np.float64)


def cce_deviation_matrix(u: np.ndarray) -> np.ndarray:
    """Deviation-gain rows for both CCE inequality families.

    Row a* (first K rows) holds, per joint cell (a, b), the gain of the row
    player deviating to pure a* against the right marginal; row K + b* the
    mirrored gain for the other player. A joint p is a CCE iff D p <= 0.
    """
    k = u.shape[0]
    d1 = u[:, None, :] - u[None, :, :]            # [a*, a, b]
    d2 = u[:, :, None] - u.T[None, :, :]          # [b*, a, b]
    return np.concatenate(
        [d1.reshape(k, k * k), d2.reshape(k, k * k)], axis=0
    )


def cce_violation(u, joint) -> float:
    """Worst deviation gain of `joint` in the matrix game `u`.

    Independent arithmetic check (no solver internals): computes both
    inequality families directly from marginals.
    """
    ue = _entries(u)
    w = joint.weights if isinstance(joint, JointActionDistribution) else np.asarray(joint)
    value_row = float(np.sum(w * ue))
    value_col = float(np.sum(w * ue.T))
    right = w.sum(axis=0)
    left = w.sum(axis=1)
    dev_row = float((ue @ right).max())
    dev_col = float((ue @ left).max())
    return max(dev_row - value_row, dev_col - value_col)


def solve_cce(u, config: SolverConfig | None = None) -> FeasibilityReport:
    """Find a coarse correlated equilibrium of the general-sum matrix `u`.

    Solved as a linear feasibility problem over the joint simplex (minimize
    the max violation of the 2K deviation constraints). A CCE always exists
    for a finite matrix, so NotConverged signals solver misconfiguration.
    """
    cfg = config or SolverConfig()
    ue = _entries(u)
    if not np.isfinite(ue).all():
        raise ValueError("matrix entries must be finite")
    k = ue.shape[0]
    dev = cce_deviation_matrix(ue)
    x, viol, iters, status = get_kernels().epigraph_simplex(
        dev, 0.0, cfg.max_iterations
    )
    if status != 0 or viol > cfg.violation_tolerance:
        raise NotConverged(
            f"CCE solve stopped at violation {viol:.3e} "
            f"(tolerance {cfg.violation_tolerance:.1e})",
            max_violation=viol,
            iterations=iters,
        )
    joint = JointActionDistribution(x.reshape(k, k))
    return FeasibilityReport(joint, viol, iters, True)


def solve_zero_sum_nash(p, config: SolverConfig | None = None) -> FeasibilityReport:
    """Maximin strategy q of a skew-symmetric game: min_j (q^T P)_j >= -tol.

    The symmetric zero-sum game has value 0, so the maximin strategy makes
    every column payoff nonnegative.
    """
    cfg = config or SolverConfig()
    pe = _entries(p)
    if isinstance(p, np.ndarray) or not isinstance(p, PreferenceMatrix):
        pe = PreferenceMatrix(pe).entries  # validates skew-symmetry
    # (q^T P)_j >= 0 for all j  <=>  (P q)_j <= 0 for all j, by skew-symmetry
    q, viol, iters, status = get_kernels().epigraph_simplex(
        pe.copy(), 0.0, cfg.max_iterations
    )
    if status != 0 or viol > cfg.violation_tolerance:
        raise NotConverged(
            f"zero-sum Nash solve stopped at violation {viol:.3e}",
            max_violation=viol,
            iterations=iters,
        )
    return FeasibilityReport(ActionDistribution(q), viol, iters, True)


def minmax_rhs(k: int, gamma: float) -> float:
    """Per-constraint budget of the inverse-gap program."""
    return 5.0 * k / gamma


def minmax_slack(k: int, gamma: float) -> float:
    """Numerical-slack allowance beyond the budget (affects constants only)."""
    return k / gamma


def minmax_violation(y_hat, gamma: float, point) -> float:
    """Signed worst violation of the inverse-gap constraints at `point`."""
    ye = _entries(y_hat)
    pw = point.weights if isinstance(point, ActionDistribution) else np.asarray(point)
    k = ye.shape[0]
    g = ye @ pw + (2.0 / gamma) / pw
    return float(g.max() - minmax_rhs(k, gamma))


def solve_minmax_feasibility(
    y_hat,
    gamma: float,
    config: SolverConfig | None = None,
    warm_start: np.ndarray | None = None,
) -> FeasibilityReport:
    """Find p on the floored simplex with, for every arm i,

        (Y p)_i + (2/gamma) / p_i  <=  5K/gamma  (+ slack K/gamma).

    Requires gamma >= 2K, under which a feasible point always exists; the
    solver targets half the slack and reports the violation it achieved.
    """
    cfg = config or SolverConfig()
    ye = _entries(y_hat)
    if not isinstance(y_hat, PreferenceMatrix):
        ye = PreferenceMatrix(ye).entries
    k = ye.shape[0]
    if gamma < 2.0 * k:
        raise GammaTooSmall(f"gamma={gamma} below 2K={2 * k}")
    floor = cfg.floor_epsilon if cfg.floor_epsilon is not None else 1.0 / (4.0 * gamma)
    if not floor < 1.0 / k:
        raise ValueError(f"floor_epsilon {floor} must be below 1/K")
    rhs = minmax_rhs(k, gamma)
    slack = minmax_slack(k, gamma)
    eta0 = 1.0 / (gamma * k)
    p, viol, iters, status = get_kernels().minmax_descent(
        np.ascontiguousarray(ye),
        float(gamma),
        float(floor),
        float(rhs),
        slack / 2.0,
        eta0,
        cfg.max_iterations,
        None if warm_start is None else np.asarray(warm_start, dtype=np.float64),
    )
    if viol > slack:
        raise NotConverged(
            f"inverse-gap solve stopped at violation {viol:.3e} "
            f"(slack {slack:.3e}); feasibility is guaranteed, so this is a bug",
            max_violation=viol,
            iterations=iters,
        )
    return FeasibilityReport(ActionDistribution(p), float(viol), iters, True)
