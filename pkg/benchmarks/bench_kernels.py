#!/usr/bin/env python3
"""Benchmark the compiled Q-learning kernels against the pure-Python twins.

Micro-benchmarks call both implementations directly; the end-to-end section
re-executes this script in a subprocess with TUTORENV_PURE_KERNELS set, so
each run goes through the normal import-time selection.

Usage:
    python benchmarks/bench_kernels.py            # full comparison
    python benchmarks/bench_kernels.py --episodes-only
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))


def micro_benchmarks():
    from tutorenv._kernels import qcore_py

    try:
        from tutorenv._kernels import _qcore
    except ImportError:
        _qcore = None

    rng = np.random.default_rng(0)
    row = rng.standard_normal(32)
    nxt = rng.standard_normal(32)
    out = np.zeros(40 * 33)
    hot = rng.integers(0, 33, size=40).astype(np.int64)

    cases = [
        ("best_action(32)", lambda impl: impl.best_action(row)),
        ("td_update(32)", lambda impl: impl.td_update(row, 3, 1.0, nxt, 0.2, 0.9, False)),
        ("fill_onehot(40x33)", lambda impl: impl.fill_onehot(out, 33, hot)),
    ]

    print(f"{'kernel':<20} {'pure (us)':>12} {'compiled (us)':>14} {'speedup':>9}")
    for name, call in cases:
        n = 20_000
        pure_s = timeit.timeit(lambda: call(qcore_py), number=n) / n * 1e6
        if _qcore is None:
            print(f"{name:<20} {pure_s:>12.3f} {'not built':>14} {'-':>9}")
            continue
        comp_s = timeit.timeit(lambda: call(_qcore), number=n) / n * 1e6
        print(f"{name:<20} {pure_s:>12.3f} {comp_s:>14.3f} {pure_s / comp_s:>8.1f}x")


def episode_benchmark(episodes: int) -> float:
    from tutorenv._kernels import IMPLEMENTATION
    from tutorenv.agents import QLearningAgent
    from tutorenv.generators import generate_pool
    from tutorenv.rl import TutorEnv

    pool = generate_pool("fraction_same_den", 10, 1000)
    env = TutorEnv(pool, seed=0)
    agent = QLearningAgent(env.n_actions, seed=0)
    start = time.perf_counter()
    steps = 0
    for _ in range(episodes):
        steps += agent.run_episode(env)["steps"]
    elapsed = time.perf_counter() - start
    print(
        f"  {IMPLEMENTATION}: {episodes} episodes, {steps} env steps "
        f"in {elapsed:.3f}s ({steps / elapsed:,.0f} steps/s)"
    )
    return elapsed


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--episodes", type=int, default=1500)
    parser.add_argument("--episodes-only", action="store_true")
    args = parser.parse_args()

    if args.episodes_only:
        episode_benchmark(args.episodes)
        return 0

    print("== kernel micro-benchmarks ==")
    micro_benchmarks()

    print(f"\n== end-to-end Q training ({args.episodes} episodes) ==")
    sys.stdout.flush()
    for pure in ("", "1"):
        env = dict(os.environ)
        env["TUTORENV_PURE_KERNELS"] = pure
        subprocess.run(
            [sys.executable, __file__, "--episodes-only",
             "--episodes", str(args.episodes)],
            env=env,
            check=True,
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
