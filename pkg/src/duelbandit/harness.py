"""Experiment runner: seeded (algorithm x environment x horizon) runs.

Every seed owns its learner, environment substreams and ledger; seeds fan
out across processes when DUELBANDIT_THREADS > 1 and results merge in seed
order, so output is deterministic either way. Round CSVs carry full-precision
floats and reproduce byte-identically for a fixed config.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .algorithms import CceDb, CceLinDb, MinMaxDb, default_gamma
from .core import PreferenceMatrix, RoundRecord, sample_outcome
from .environments import (
    Environment,
    FiniteClassEnvironment,
    FixedMatrixEnvironment,
    LinearRealizableEnvironment,
    make_finite_class,
    named_fixture,
)
from .errors import DuelBanditError
from .evaluation import RegretLedger, exposure
from .games import SolverConfig, minmax_rhs, solve_zero_sum_nash
from .oracles import FiniteClassAggregator, OgdForecaster, VawForecaster
from .rng import RngHandle

CSV_HEADER = ("seed,t,arm_a,arm_b,outcome,br_step,br_cum,"
              "fb_step,fb_cum,policy_cum,gamma,solver_iters")
SUMMARY_HEADER = ("seed,horizon,final_br,final_fb,final_policy,"
                  "normalized_br,solver_iterations,confidence_violations,status")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


class DiagnosticFailure(AssertionError):
    """A per-round inequality that should always hold was violated."""


@dataclass
class ExperimentConfig:
    """Resolved experiment description; `from_dict` fills defaults."""

    algorithm: dict
    environment: dict
    horizon: int
    seeds: list[int]
    output_dir: str | None = None
    diagnostic: bool = False
    benchmark: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        self.algorithm = dict(self.algorithm)
        self.environment = dict(self.environment)
        self.benchmark = {"q_star": "nash", "policy_count": 0,
                          **dict(self.benchmark)}

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {"algorithm", "environment", "horizon", "seeds",
                 "output_dir", "diagnostic", "benchmark"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "algorithm" not in raw or "environment" not in raw:
            raise ValueError("config needs 'algorithm' and 'environment'")
        return cls(
            algorithm=raw["algorithm"],
            environment=raw["environment"],
            horizon=int(raw.get("horizon", 0)),
            seeds=[int(s) for s in raw.get("seeds", [])],
            output_dir=raw.get("output_dir"),
            diagnostic=bool(raw.get("diagnostic", False)),
            benchmark=raw.get("benchmark", {}),
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunSummary:
    seed: int
    horizon: int
    final_br: float = 0.0
    final_fb: float = 0.0
    final_policy: float = 0.0
    normalized_br: float = 0.0
    wall_clock_s: float = 0.0
    solver_iterations: int = 0
    confidence_violations: int | None = None
    gamma: float | None = None
    status: str = "ok"

    def csv_row(self) -> str:
        cv = "" if self.confidence_violations is None else str(self.confidence_violations)
        status = self.status.replace(",", ";").replace("\n", " ")
        return ",".join([
            str(self.seed), str(self.horizon), _fmt(self.final_br),
            _fmt(self.final_fb), _fmt(self.final_policy),
            _fmt(self.normalized_br), str(self.solver_iterations), cv,
            status,
        ])


def build_environment(spec: dict) -> Environment:
    kind = spec.get("kind", "fixed")
    perturbation = float(spec.get("perturbation", 0.0))
    if kind == "fixed":
        if "matrix" in spec:
            matrix = PreferenceMatrix(np.asarray(spec["matrix"], dtype=np.float64))
        else:
            params = {key: spec[key] for key in ("k", "margin", "eps")
                      if key in spec}
            matrix = named_fixture(spec["fixture"], **params).matrix
        return FixedMatrixEnvironment(matrix, perturbation=perturbation)
    if kind == "finite_class":
        class_rng = RngHandle(int(spec.get("class_seed", 0))).substream("class")
        env, _ = make_finite_class(
            n_contexts=int(spec.get("n_contexts", 1)),
            k=int(spec["k"]),
            class_size=int(spec.get("class_size", 16)),
            rng=class_rng,
            margin_cap=float(spec.get("margin_cap", 0.8)),
            perturbation=perturbation,
        )
        return env
    if kind == "linear":
        weight_rng = RngHandle(int(spec.get("weight_seed", 0))).substream("weight")
        w = weight_rng.generator.uniform(-1.0, 1.0, int(spec["dim"]))
        return LinearRealizableEnvironment(int(spec["k"]), w)
    raise ValueError(f"unknown environment kind {kind!r}")


def _finite_tables_for(env: Environment, spec: dict) -> tuple[np.ndarray, int]:
    """Hypothesis tables for a finite-class oracle, honoring realizability."""
    if isinstance(env, FiniteClassEnvironment):
        return env.tables, env.truth_index
    if isinstance(env, FixedMatrixEnvironment):
        class_size = int(spec.get("class_size", 16))
        rng = RngHandle(int(spec.get("class_seed", 0))).substream("oracle-class")
        gen = rng.generator
        k = env.k
        raw = gen.uniform(-0.8, 0.8, (class_size, 1, k, k))
        upper = np.triu(raw, 1)
        tables = upper - upper.transpose(0, 1, 3, 2)
        truth_index = int(gen.integers(0, class_size))
        tables[truth_index, 0] = env.matrix.entries
        return tables, truth_index
    raise ValueError("finite oracle needs a finite-class or fixed environment")


def build_learner(spec: dict, env: Environment, horizon: int):
    kind = spec.get("kind")
    solver_config = SolverConfig(
        max_iterations=int(spec.get("solver_max_iterations", 50_000)),
        violation_tolerance=float(spec.get("solver_tolerance", 1e-8)),
    )
    delta = spec.get("delta")
    delta = 1.0 / horizon if delta is None else float(delta)
    if kind == "ccedb":
        return CceDb(env.k, delta, solver_config)
    if kind == "ccelindb":
        if not isinstance(env, LinearRealizableEnvironment):
            raise ValueError("ccelindb needs a linear environment")
        return CceLinDb(
            env.dim, horizon, delta,
            ridge=float(spec.get("ridge", 1.0)),
            width_multiplier=spec.get("width_multiplier"),
            exploration_length=spec.get("exploration_length"),
            solver_config=solver_config,
        )
    if kind == "minmaxdb":
        oracle_spec = dict(spec.get("oracle", {"kind": "finite"}))
        okind = oracle_spec.get("kind", "finite")
        if okind == "finite":
            tables, _ = _finite_tables_for(env, oracle_spec)
            oracle = FiniteClassAggregator(tables)
        elif okind == "vaw":
            if not isinstance(env, LinearRealizableEnvironment):
                raise ValueError("vaw oracle needs a linear environment")
            oracle = VawForecaster(env.dim, ridge=float(oracle_spec.get("ridge", 1.0)))
        elif okind == "ogd":
            if not isinstance(env, LinearRealizableEnvironment):
                raise ValueError("ogd oracle needs a linear environment")
            oracle = OgdForecaster(env.dim, horizon,
                                   radius=float(oracle_spec.get("radius", 1.0)))
        else:
            raise ValueError(f"unknown oracle kind {okind!r}")
        gamma = spec.get("gamma", "auto")
        if gamma == "auto":
            gamma = default_gamma(env.k, horizon, oracle.regret_budget())
        return MinMaxDb(env.k, float(gamma), oracle, solver_config)
    raise ValueError(f"unknown algorithm kind {kind!r}")


def _truth_matrix_for_benchmark(env: Environment) -> PreferenceMatrix:
    if isinstance(env, FixedMatrixEnvironment):
        return env.matrix
    if isinstance(env, FiniteClassEnvironment) and env.n_contexts == 1:
        return env.ground_truth(0)
    raise ValueError(
        "condorcet/nash benchmarks need an effectively non-contextual "
        "environment; pass an explicit q_star vector instead"
    )


def resolve_q_star(benchmark: dict, env: Environment):
    from .core import ActionDistribution

    rule = benchmark.get("q_star", "nash")
    if isinstance(rule, (list, tuple, np.ndarray)):
        return ActionDistribution(np.asarray(rule, dtype=np.float64))
    if rule == "nash":
        truth = _truth_matrix_for_benchmark(env)
        return solve_zero_sum_nash(truth).point
    if rule == "condorcet":
        truth = _truth_matrix_for_benchmark(env)
        ent = truth.entries
        off = ent + np.eye(env.k)  # ignore the zero diagonal
        winners = np.nonzero((off > 0).all(axis=1))[0]
        if winners.size == 0:
            raise ValueError("no Condorcet winner in the benchmark matrix")
        q = np.zeros(env.k)
        q[winners[0]] = 1.0
        return ActionDistribution(q)
    raise ValueError(f"unknown q_star rule {rule!r}")


def _make_policies(count: int, k: int) -> list:
    return [(lambda x, arm=j % k: arm) for j in range(count)]


def _diag_check_ccedb(learner: CceDb, truth: PreferenceMatrix, joint) -> bool:
    """Coverage event + the instantaneous-regret inequality when covered."""
    mean, width = learner.last_mean, learner.last_confidence
    covered = bool((np.abs(truth.entries - mean) <= width + 1e-12).all())
    if covered:
        lhs = float((truth.entries @ exposure(joint)).max())
        c_eff = width.copy()
        np.fill_diagonal(c_eff, 0.0)
        rhs = 2.0 * float(np.sum(joint.weights * c_eff))
        if lhs > rhs + 1e-8:
            raise DiagnosticFailure(
                f"instantaneous-regret bound broken: {lhs:.6g} > {rhs:.6g}"
            )
    return covered


def _diag_check_minmaxdb(learner: MinMaxDb, truth: PreferenceMatrix) -> None:
    p = learner.last_marginal
    y_hat = learner.last_prediction.entries
    f = truth.entries
    gamma = learner.gamma
    lhs = float((f @ p).max())
    sq = float(p @ ((f - y_hat) ** 2) @ p)
    rhs = (0.5 * gamma * sq + minmax_rhs(learner.k, gamma)
           + max(learner.last_violation, 0.0))
    if lhs > rhs + 1e-9:
        raise DiagnosticFailure(
            f"per-round inequality broken: {lhs:.6g} > {rhs:.6g}"
        )


def run_single_seed(config: ExperimentConfig, seed: int):
    """One seeded run; returns (RunSummary, RegretLedger, csv lines)."""
    t_start = time.perf_counter()
    env = build_environment(config.environment)
    learner = build_learner(config.algorithm, env, config.horizon)
    q_star = resolve_q_star(config.benchmark, env) \
        if config.benchmark.get("q_star") is not None else None
    policies = _make_policies(int(config.benchmark.get("policy_count", 0)), env.k)
    ledger = RegretLedger(q_star=q_star, policies=policies)

    root = RngHandle(seed)
    env_rng = root.substream("environment")
    learner_rng = root.substream("learner")
    outcome_rng = root.substream("outcome")

    summary = RunSummary(seed=seed, horizon=config.horizon,
                         gamma=getattr(learner, "gamma", None))
    lines = []
    violations = 0
    solver_iters = 0
    try:
        for t in range(1, config.horizon + 1):
            x, realized = env.sample_round(env_rng)
            truth = env.ground_truth(x)
            joint, duel = learner.select(x, learner_rng)
            a, b = duel
            outcome = sample_outcome(realized.entries[a, b], outcome_rng)
            record = RoundRecord(t, x, duel, outcome, joint)
            if config.diagnostic:
                if isinstance(learner, CceDb):
                    if not _diag_check_ccedb(learner, truth, joint):
                        violations += 1
                elif isinstance(learner, MinMaxDb):
                    _diag_check_minmaxdb(learner, truth)
            learner.observe(x, duel, outcome)
            ledger.record(truth, record.context_id, record.learner_joint,
                          record.duel)
            solver_iters += learner.last_iterations
            if config.output_dir is not None:
                gamma = learner.gamma if learner.gamma is not None else 0.0
                lines.append(",".join([
                    str(seed), str(record.round_index), str(a), str(b),
                    str(outcome),
                    _fmt(ledger.br_steps[-1]), _fmt(ledger.br_cum[-1]),
                    _fmt(ledger.fb_steps[-1]), _fmt(ledger.fb_cum[-1]),
                    _fmt(ledger.final_policy), _fmt(gamma),
                    str(learner.last_iterations),
                ]))
    except (DuelBanditError, DiagnosticFailure) as exc:
        summary.status = f"failed: {type(exc).__name__}: {exc}"

    summary.final_br = ledger.final_br
    summary.final_fb = ledger.final_fb
    summary.final_policy = ledger.final_policy
    summary.solver_iterations = solver_iters
    summary.confidence_violations = violations if config.diagnostic else None
    summary.normalized_br = _normalized_br(config, env, learner, ledger)
    summary.wall_clock_s = time.perf_counter() - t_start
    return summary, ledger, lines


def _normalized_br(config, env, learner, ledger) -> float:
    t = max(ledger.rounds, 1)
    k = env.k
    if isinstance(learner, MinMaxDb) and hasattr(learner.oracle, "regret_budget"):
        reg = learner.oracle.regret_budget()(t)
        return float(ledger.final_br / np.sqrt(k * t * max(reg, 1e-12)))
    return float(ledger.final_br / (k * np.log(k * t) * np.sqrt(t)))


def _worker(args):
    raw, seed = args
    config = ExperimentConfig.from_dict(raw)
    summary, ledger, lines = run_single_seed(config, seed)
    _write_rounds(config, seed, lines)
    return seed, summary, {
        "br_steps": ledger.br_steps, "fb_steps": ledger.fb_steps,
        "br_cum": ledger.br_cum, "fb_cum": ledger.fb_cum,
        "final_policy": ledger.final_policy,
    }


def _write_rounds(config: ExperimentConfig, seed: int, lines: list[str]) -> None:
    if config.output_dir is None:
        return
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, f"rounds_seed{seed}.csv")
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        fh.write("\n".join(lines))
        if lines:
            fh.write("\n")


def worker_count() -> int:
    raw = os.environ.get("DUELBANDIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_experiment(config: ExperimentConfig, keep_ledgers: bool = False):
    """Execute every seed; returns (summaries, ledgers-or-None).

    Ledgers (when kept) are plain dicts of per-round arrays, merged in seed
    order regardless of worker completion order.
    """
    workers = worker_count()
    results: dict[int, tuple] = {}
    if workers > 1 and len(config.seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for seed, summary, ledger in pool.map(
                _worker, [(config.to_dict(), s) for s in config.seeds]
            ):
                results[seed] = (summary, ledger)
    else:
        for seed in config.seeds:
            summary, ledger, lines = run_single_seed(config, seed)
            _write_rounds(config, seed, lines)
            results[seed] = (summary, {
                "br_steps": ledger.br_steps, "fb_steps": ledger.fb_steps,
                "br_cum": ledger.br_cum, "fb_cum": ledger.fb_cum,
                "final_policy": ledger.final_policy,
            })
    summaries = [results[s][0] for s in config.seeds]
    ledgers = [results[s][1] for s in config.seeds] if keep_ledgers else None

    if config.output_dir is not None:
        os.makedirs(config.output_dir, exist_ok=True)
        with open(os.path.join(config.output_dir, "summary.csv"), "w") as fh:
            fh.write(SUMMARY_HEADER + "\n")
            for s in summaries:
                fh.write(s.csv_row() + "\n")
        with open(os.path.join(config.output_dir, "resolved_config.json"), "w") as fh:
            json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return summaries, ledgers


def aggregate(summaries: list[RunSummary]) -> dict:
    """Batch statistics plus the sqrt-scaling ratio for (T, 4T) horizon pairs."""
    if not summaries:
        raise ValueError("aggregate needs at least one summary")
    by_horizon: dict[int, list[RunSummary]] = {}
    for s in summaries:
        by_horizon.setdefault(s.horizon, []).append(s)
    report: dict = {"n_runs": len(summaries), "horizons": {}}
    for horizon, group in sorted(by_horizon.items()):
        br = np.array([g.final_br for g in group])
        report["horizons"][horizon] = {
            "n": len(group),
            "br_mean": float(br.mean()),
            "br_median": float(np.median(br)),
            "br_p95": float(np.percentile(br, 95)),
            "failed": sum(1 for g in group if g.status != "ok"),
        }
    report["scaling_ratios"] = {}
    rng = np.random.default_rng(0)
    for horizon in sorted(by_horizon):
        upper = 4 * horizon
        if upper not in by_horizon:
            continue
        lo = np.array([g.final_br for g in by_horizon[horizon]])
        hi = np.array([g.final_br for g in by_horizon[upper]])
        ratio = float(np.median(hi) / np.median(lo))
        boots = []
        for _ in range(1000):
            bl = rng.choice(lo, lo.size, replace=True)
            bh = rng.choice(hi, hi.size, replace=True)
            boots.append(np.median(bh) / np.median(bl))
        lo_ci, hi_ci = np.percentile(boots, [2.5, 97.5])
        report["scaling_ratios"][f"{horizon}->{upper}"] = {
            "ratio": ratio, "ci95": [float(lo_ci), float(hi_ci)],
        }
    return report
