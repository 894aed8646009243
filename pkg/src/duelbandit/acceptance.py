"""Named acceptance suites: scaled-down statistical checks plus exact
property suites, runnable from the CLI (`duelbandit accept`) and asserted
one-to-one by tests/test_acceptance.py.

Suites that share expensive simulation batches (the two scaling suites and
the dominance suite) draw them from a per-process cache so each batch runs
once regardless of invocation order.
"""

from __future__ import annotations

import filecmp
import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from .core import JointActionDistribution, PreferenceMatrix, product_joint
from .environments import hardness
from .evaluation import br_regret_step
from .games import (
    cce_violation,
    minmax_rhs,
    solve_cce,
    solve_minmax_feasibility,
    solve_zero_sum_nash,
)
from .games.grid_oracle import cce_grid_min_violation
from .harness import ExperimentConfig, run_experiment
from .oracles import FiniteClassAggregator, OracleInput, VawForecaster, regret_budget
from .rng import RngHandle


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float


def _random_skew(k: int, gen: np.random.Generator, cap: float = 1.0) -> np.ndarray:
    raw = gen.uniform(-cap, cap, (k, k))
    upper = np.triu(raw, 1)
    return upper - upper.T


_CACHE: dict = {}


def _scaling_runs(which: str):
    """Cached 50-seed scaling batches shared by criteria 5, 6 and 8."""
    if which in _CACHE:
        return _CACHE[which]
    if which == "ccedb":
        horizons = (2000, 8000)
        base = {
            "algorithm": {"kind": "ccedb"},
            "environment": {"kind": "fixed", "fixture": "condorcet",
                            "k": 5, "margin": 0.4},
            "benchmark": {"q_star": "condorcet", "policy_count": 0},
        }
    elif which == "minmaxdb":
        horizons = (2500, 10000)
        base = {
            "algorithm": {"kind": "minmaxdb", "gamma": "auto",
                          "oracle": {"kind": "finite"}},
            "environment": {"kind": "finite_class", "k": 3, "n_contexts": 1,
                            "class_size": 16, "class_seed": 11},
            "benchmark": {"q_star": "nash", "policy_count": 0},
        }
    else:
        raise ValueError(which)
    out = {}
    for horizon in horizons:
        config = ExperimentConfig.from_dict({
            **base, "horizon": horizon, "seeds": list(range(50)),
        })
        out[horizon] = run_experiment(config, keep_ledgers=True)
    _CACHE[which] = out
    return out


def criterion_1() -> tuple[bool, str]:
    """Inverse-gap feasibility: 1000 random targets, all K/gamma grids."""
    gen = np.random.default_rng(101)
    ks = (2, 3, 5, 10)
    factors = (2.0, 4.0, 10.0)
    solutions = []
    worst = -np.inf
    failures = 0
    for i in range(1000):
        k = ks[i % 4]
        gamma = factors[i % 3] * k
        y = _random_skew(k, gen)
        report = solve_minmax_feasibility(PreferenceMatrix(y), gamma)
        excess = report.max_violation - k / gamma
        worst = max(worst, excess)
        if not report.converged or excess > 1e-6:
            failures += 1
        solutions.append((y, gamma, report.point.weights))
    _CACHE["criterion1_solutions"] = solutions
    ok = failures == 0
    return ok, f"failures={failures}/1000, worst excess over K/gamma={worst:.3e}"


def criterion_2() -> tuple[bool, str]:
    """Per-round inequality for every feasible point from criterion 1."""
    if "criterion1_solutions" not in _CACHE:
        criterion_1()
    solutions = _CACHE["criterion1_solutions"]
    gen = np.random.default_rng(202)
    violations = 0
    worst = -np.inf
    for y, gamma, p in solutions:
        k = p.shape[0]
        f = np.stack([_random_skew(k, gen) for _ in range(100)])
        q = gen.dirichlet(np.ones(k), size=100)
        lhs = np.einsum("nij,ni,j->n", f, q, p)
        sq = np.einsum("i,nij,j->n", p, (f - y) ** 2, p)
        rhs = 0.5 * gamma * sq + minmax_rhs(k, gamma) + k / gamma + 1e-9
        gap = lhs - rhs
        worst = max(worst, float(gap.max()))
        violations += int((gap > 0).sum())
    ok = violations == 0
    return ok, f"violations={violations}/100000, worst margin={worst:.3e}"


def criterion_3() -> tuple[bool, str]:
    """CCE validity on 1000 general-sum matrices + K=2 grid cross-check."""
    gen = np.random.default_rng(303)
    worst = -np.inf
    failures = 0
    grid_mismatches = 0
    n_grid = 0
    # grid resolution 1e-3; constraint rows are 2 max|U| Lipschitz in L1 and
    # the nearest grid point is within 6h in L1, so a true CCE guarantees a
    # grid point within this violation:
    grid_threshold = 2.0 * 3.0 * 6.0 * 1e-3 + 1e-9
    for i in range(1000):
        k = 2 + (i % 9)
        u = gen.uniform(-3.0, 3.0, (k, k))
        report = solve_cce(u)
        viol = cce_violation(u, report.point)
        worst = max(worst, viol)
        if viol > 1e-8:
            failures += 1
        if k == 2:
            n_grid += 1
            grid_min = cce_grid_min_violation(u, 1e-3)
            if not (report.converged and grid_min <= grid_threshold):
                grid_mismatches += 1
    ok = failures == 0 and grid_mismatches == 0
    return ok, (f"violations>{1e-8:g}: {failures}/1000, worst={worst:.3e}; "
                f"grid verdict mismatches: {grid_mismatches}/{n_grid}")


def criterion_4() -> tuple[bool, str]:
    """Confidence coverage: violating seeds <= 5% of 200."""
    config = ExperimentConfig.from_dict({
        "algorithm": {"kind": "ccedb"},
        "environment": {"kind": "fixed", "fixture": "condorcet",
                        "k": 5, "margin": 0.4},
        "horizon": 2000, "seeds": list(range(200)), "diagnostic": True,
        "benchmark": {"q_star": "condorcet", "policy_count": 0},
    })
    summaries, _ = run_experiment(config)
    failed_runs = [s for s in summaries if s.status != "ok"]
    violating = sum(1 for s in summaries if (s.confidence_violations or 0) > 0)
    ok = violating <= 10 and not failed_runs
    return ok, (f"violating seeds: {violating}/200 (allowed 10); "
                f"failed runs: {len(failed_runs)}")


def criterion_5() -> tuple[bool, str]:
    """Count-based learner scaling: median bound and sqrt-T ratio window."""
    runs = _scaling_runs("ccedb")
    medians = {}
    k = 5
    bounds_ok = True
    detail = []
    for horizon, (summaries, _ledgers) in runs.items():
        med = float(np.median([s.final_br for s in summaries]))
        bound = 4.0 * k * np.log(k * horizon) * np.sqrt(horizon)
        medians[horizon] = med
        bounds_ok &= med <= bound
        detail.append(f"T={horizon}: median={med:.1f} bound={bound:.0f}")
    ratio = medians[8000] / medians[2000]
    ratio_ok = 1.4 <= ratio <= 2.8
    detail.append(f"ratio={ratio:.3f} target [1.4, 2.8]")
    return bounds_ok and ratio_ok, "; ".join(detail)


def criterion_6() -> tuple[bool, str]:
    """Oracle-based learner scaling: median bound and sqrt-T ratio window."""
    runs = _scaling_runs("minmaxdb")
    k, class_size = 3, 16
    reg = regret_budget("finite", class_size=class_size)(0)
    medians = {}
    bounds_ok = True
    detail = []
    for horizon, (summaries, _ledgers) in runs.items():
        med = float(np.median([s.final_br for s in summaries]))
        bound = 4.0 * np.sqrt(5.0 * k * horizon * reg)
        medians[horizon] = med
        bounds_ok &= med <= bound
        detail.append(f"T={horizon}: median={med:.1f} bound={bound:.0f}")
    ratio = medians[10000] / medians[2500]
    ratio_ok = 1.4 <= ratio <= 2.8
    detail.append(f"ratio={ratio:.3f} target [1.4, 2.8]")
    return bounds_ok and ratio_ok, "; ".join(detail)


def criterion_7() -> tuple[bool, str]:
    """Oracle estimation-error budgets on realizable streams."""
    worst_vaw = 0.0
    d, horizon = 4, 5000
    vaw_budget = 4.0 * d * np.log(1.0 + horizon / d)
    for seed in range(20):
        rng = RngHandle(seed).substream("vaw-stream")
        gen = rng.generator
        w = gen.uniform(-1.0, 1.0, d)
        w /= max(1.0, float(np.linalg.norm(w)))
        oracle = VawForecaster(d)
        err = 0.0
        for _ in range(horizon):
            x = gen.uniform(-1.0, 1.0, d)
            x /= max(1.0, abs(float(w @ x)))
            target = float(w @ x)
            z = OracleInput(x, 0, 1)
            err += (oracle.predict(z) - target) ** 2
            label = 1.0 if gen.random() < (target + 1.0) / 2.0 else -1.0
            oracle.update(z, label)
        worst_vaw = max(worst_vaw, err)
    vaw_ok = worst_vaw <= vaw_budget

    worst_fin = 0.0
    class_size, k = 16, 3
    fin_budget = 4.0 * 8.0 * np.log(class_size)
    pairs = [(0, 1), (0, 2), (1, 2)]
    for seed in range(20):
        rng = RngHandle(1000 + seed).substream("finite-stream")
        gen = rng.generator
        raw = gen.uniform(-0.8, 0.8, (class_size, 1, k, k))
        upper = np.triu(raw, 1)
        tables = upper - upper.transpose(0, 1, 3, 2)
        truth = int(gen.integers(0, class_size))
        oracle = FiniteClassAggregator(tables)
        err = 0.0
        for _ in range(horizon):
            a, b = pairs[int(gen.integers(0, 3))]
            z = OracleInput(0, a, b)
            target = tables[truth, 0, a, b]
            err += (oracle.predict(z) - target) ** 2
            label = 1.0 if gen.random() < (target + 1.0) / 2.0 else -1.0
            oracle.update(z, label)
        worst_fin = max(worst_fin, err)
    fin_ok = worst_fin <= fin_budget
    return vaw_ok and fin_ok, (
        f"vaw worst={worst_vaw:.1f} budget={vaw_budget:.1f}; "
        f"finite worst={worst_fin:.1f} budget={fin_budget:.1f}"
    )


def criterion_8() -> tuple[bool, str]:
    """Per-round dominance fb <= br across both scaling batches."""
    worst = -np.inf
    rounds = 0
    for which in ("ccedb", "minmaxdb"):
        for _horizon, (_summaries, ledgers) in _scaling_runs(which).items():
            for led in ledgers:
                fb = np.asarray(led["fb_steps"])
                br = np.asarray(led["br_steps"])
                rounds += fb.size
                worst = max(worst, float((fb - br).max()))
    ok = worst <= 1e-12
    return ok, f"worst fb-br gap={worst:.3e} over {rounds} rounds"


def criterion_9() -> tuple[bool, str]:
    """Nash product joints certify (near) zero best-response regret."""
    gen = np.random.default_rng(909)
    worst = -np.inf
    for i in range(100):
        k = 2 + (i % 9)
        p = PreferenceMatrix(_random_skew(k, gen))
        q = solve_zero_sum_nash(p).point
        step = br_regret_step(p, product_joint(q))
        worst = max(worst, step)
    ok = worst <= 1e-6
    return ok, f"worst nash-product br step={worst:.3e}"


def criterion_10() -> tuple[bool, str]:
    """Hardness fixture closed forms: (c,c) forever costs eps*T; (a,a) zero."""
    eps, horizon = 0.2, 2000
    f = hardness(eps)
    k = f.k
    cc = np.zeros((k, k))
    cc[2, 2] = 1.0
    aa = np.zeros((k, k))
    aa[0, 0] = 1.0
    from .evaluation import RegretLedger

    led_cc, led_aa = RegretLedger(), RegretLedger()
    j_cc, j_aa = JointActionDistribution(cc), JointActionDistribution(aa)
    for _ in range(horizon):
        led_cc.record(f, 0, j_cc, (2, 2))
        led_aa.record(f, 0, j_aa, (0, 0))
    cc_err = abs(led_cc.final_br - eps * horizon)
    ok = cc_err <= 1e-9 * horizon and led_aa.final_br == 0.0
    return ok, (f"(c,c) total={led_cc.final_br!r} vs eps*T={eps * horizon!r}; "
                f"(a,a) total={led_aa.final_br!r}")


def criterion_11() -> tuple[bool, str]:
    """Byte-identical CSV replay for each learner kind."""
    specs = {
        "ccedb": {
            "algorithm": {"kind": "ccedb"},
            "environment": {"kind": "fixed", "fixture": "condorcet",
                            "k": 5, "margin": 0.4},
            "horizon": 250, "seeds": [0, 1],
            "benchmark": {"q_star": "condorcet", "policy_count": 2},
        },
        "minmaxdb": {
            "algorithm": {"kind": "minmaxdb", "gamma": "auto",
                          "oracle": {"kind": "finite"}},
            "environment": {"kind": "finite_class", "k": 3, "n_contexts": 2,
                            "class_size": 8, "class_seed": 3},
            "horizon": 250, "seeds": [0, 1],
            "benchmark": {"q_star": None, "policy_count": 2},
        },
        "ccelindb": {
            "algorithm": {"kind": "ccelindb"},
            "environment": {"kind": "linear", "k": 4, "dim": 3,
                            "weight_seed": 5},
            "horizon": 150, "seeds": [0],
            "benchmark": {"q_star": None, "policy_count": 0},
        },
    }
    mismatches = []
    with tempfile.TemporaryDirectory() as tmp:
        for name, raw in specs.items():
            paths = []
            for rep in ("a", "b"):
                out = os.path.join(tmp, f"{name}_{rep}")
                config = ExperimentConfig.from_dict({**raw, "output_dir": out})
                run_experiment(config)
                paths.append(out)
            for fname in sorted(os.listdir(paths[0])):
                if not fname.endswith(".csv"):
                    continue
                if not filecmp.cmp(os.path.join(paths[0], fname),
                                   os.path.join(paths[1], fname),
                                   shallow=False):
                    mismatches.append(f"{name}/{fname}")
    ok = not mismatches
    return ok, ("all round and summary CSVs byte-identical"
                if ok else f"mismatched: {mismatches}")


CRITERIA = {
    1: ("feasibility-program-total", criterion_1),
    2: ("per-round-inequality", criterion_2),
    3: ("cce-validity", criterion_3),
    4: ("confidence-coverage", criterion_4),
    5: ("ccedb-scaling", criterion_5),
    6: ("minmaxdb-scaling", criterion_6),
    7: ("oracle-budgets", criterion_7),
    8: ("fact1-dominance", criterion_8),
    9: ("nash-zero-regret", criterion_9),
    10: ("hardness-sanity", criterion_10),
    11: ("determinism", criterion_11),
}

_BY_NAME = {name: num for num, (name, _fn) in CRITERIA.items()}


def run_criterion(key) -> CriterionResult:
    if isinstance(key, str) and not key.isdigit():
        number = _BY_NAME[key]
    else:
        number = int(key)
    name, fn = CRITERIA[number]
    start = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(number, name, passed, detail,
                           time.perf_counter() - start)


def run_suites(selector: str = "all") -> list[CriterionResult]:
    if selector == "all":
        keys = sorted(CRITERIA)
    else:
        keys = [selector]
    return [run_criterion(k) for k in keys]
