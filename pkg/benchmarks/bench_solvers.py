#!/usr/bin/env python3
"""Benchmark the compiled solver kernels against the numpy fallback.

Times the two hot kernels on representative instances, plus one end-to-end
learner loop per algorithm family. Run from the repo root:

    python3 benchmarks/bench_solvers.py [--rounds 400]
"""

import argparse
import time

import numpy as np

from duelbandit.games import cce_deviation_matrix, get_kernels, minmax_rhs
from duelbandit.harness import ExperimentConfig, run_single_seed


def random_skew(k, gen, cap=1.0):
    raw = gen.uniform(-cap, cap, (k, k))
    upper = np.triu(raw, 1)
    return upper - upper.T


def bench_kernel(kernels, fn_name, instances, repeats=3):
    fn = getattr(kernels, fn_name)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in instances:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best / len(instances)


def simplex_instances(n=300):
    gen = np.random.default_rng(0)
    out = []
    for i in range(n):
        k = (3, 5, 10)[i % 3]
        u = gen.uniform(-3, 3, (k, k))
        out.append((cce_deviation_matrix(u), 0.0, 50_000))
    return out


def descent_instances(n=300):
    gen = np.random.default_rng(1)
    out = []
    for i in range(n):
        k = (3, 5, 10)[i % 3]
        gamma = (4.0, 30.0)[i % 2] * k
        y = random_skew(k, gen)
        out.append((y, gamma, 1 / (4 * gamma), minmax_rhs(k, gamma),
                    0.5 * k / gamma, 1 / (gamma * k), 50_000, None))
    return out


def bench_loop(backend, rounds):
    # the backend is normally fixed at import time; swap the live kernel
    # module for the duration of the timed loop
    from duelbandit.games import _backend

    saved = _backend._impl
    _backend._impl = get_kernels(backend)
    configs = {
        "count-based": {
            "algorithm": {"kind": "ccedb"},
            "environment": {"kind": "fixed", "fixture": "condorcet",
                            "k": 5, "margin": 0.4},
            "horizon": rounds, "seeds": [0],
            "benchmark": {"q_star": "condorcet", "policy_count": 0},
        },
        "oracle-based": {
            "algorithm": {"kind": "minmaxdb", "gamma": "auto",
                          "oracle": {"kind": "finite"}},
            "environment": {"kind": "finite_class", "k": 3, "n_contexts": 1,
                            "class_size": 16, "class_seed": 0},
            "horizon": rounds, "seeds": [0],
            "benchmark": {"q_star": "nash", "policy_count": 0},
        },
    }
    out = {}
    try:
        for name, raw in configs.items():
            config = ExperimentConfig.from_dict(raw)
            warm = ExperimentConfig.from_dict({**raw, "horizon": 300})
            run_single_seed(warm, 0)
            t0 = time.perf_counter()
            run_single_seed(config, 0)
            out[name] = (time.perf_counter() - t0) / rounds
    finally:
        _backend._impl = saved
    return out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--rounds", type=int, default=400,
                        help="horizon for the end-to-end loops")
    args = parser.parse_args()

    backends = ["python"]
    try:
        get_kernels("c")
        backends.insert(0, "c")
    except ImportError:
        print("compiled backend not built; benchmarking the fallback only")

    rows = []
    simp = simplex_instances()
    desc = descent_instances()
    for backend in backends:
        kernels = get_kernels(backend)
        rows.append((backend, "epigraph_simplex",
                     bench_kernel(kernels, "epigraph_simplex", simp)))
        rows.append((backend, "minmax_descent",
                     bench_kernel(kernels, "minmax_descent", desc)))
    for backend in backends:
        for name, per_round in bench_loop(backend, args.rounds).items():
            rows.append((backend, f"loop/{name}", per_round))

    timings: dict = {}
    for backend, workload, seconds in rows:
        timings.setdefault(workload, {})[backend] = seconds
    print(f"\n{'workload':<22} {'compiled':>12} {'python':>12} {'speedup':>9}")
    print("-" * 58)
    for workload, per in timings.items():
        c_us = f"{per['c'] * 1e6:.1f} us" if "c" in per else "-"
        p_us = f"{per['python'] * 1e6:.1f} us" if "python" in per else "-"
        if "c" in per and "python" in per:
            ratio = f"{per['python'] / per['c']:.1f}x"
        else:
            ratio = "-"
        print(f"{workload:<22} {c_us:>12} {p_us:>12} {ratio:>9}")


if __name__ == "__main__":
    main()
