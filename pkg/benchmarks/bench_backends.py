#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-NumPy fallbacks.

Runs each hot loop on representative sizes and prints a timing table.
The numba variants are compiled (and cached) on first call; a warmup run
is excluded from the timings.

Usage:
    python benchmarks/bench_backends.py [--repeat N]

The same selection can be forced package-wide via MEMDIFF_NUMBA=0/1.
"""

import argparse
import time

import numpy as np

from memdiff import _kernels
from memdiff._backend import NUMBA_ENABLED
from memdiff.kernels import TimeGrid, rl_weights


def timeit(fn, args, repeat):
    fn(*args)  # warmup / jit compile
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)

    grid = TimeGrid(tau=1e-4, steps=10_000)
    b10k = rl_weights(0.5, grid).b
    v10k = rng.standard_normal(10_000)
    yield "convolve (J=10k)", "convolve", (b10k, v10k)

    ones = np.ones(10_000)
    yield "volterra solve (J=10k)", "lower_volterra", (b10k, ones, 4.0)

    yield "deconvolve (J=10k)", "deconvolve", (b10k, 1e-4)

    grid2 = TimeGrid(tau=5e-4, steps=2_000)
    b2k = rl_weights(0.5, grid2).b
    du = rng.standard_normal((2_000, 400))
    yield "memory load (J=2k, n=400)", "memory_load_full", (b2k, du)

    grid3 = TimeGrid(tau=0.5, steps=20_000)
    b20k = rl_weights(0.5, grid3).b
    yield "ode march (J=20k)", "power_ode_march", (b20k, 0.5, 2.0, 0.5, 1.0)


def memory_load_sweep(memory_fn):
    def run(b, du):
        J = du.shape[0]
        for j in range(1, J + 1):
            memory_fn(b, du, j)

    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if not NUMBA_ENABLED:
        print("numba unavailable or disabled; nothing to compare")
        return

    pairs = {
        "convolve": (_kernels.convolve_nb, _kernels.convolve_np),
        "lower_volterra": (_kernels.lower_volterra_nb, _kernels.lower_volterra_np),
        "deconvolve": (_kernels.deconvolve_nb, _kernels.deconvolve_np),
        "memory_load_full": (
            memory_load_sweep(_kernels.memory_nb),
            memory_load_sweep(_kernels.memory_np),
        ),
        "power_ode_march": (_kernels.power_ode_nb, _kernels.power_ode_np),
    }

    print(f"{'case':34s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for label, key, fnargs in cases():
        nb, npf = pairs[key]
        t_nb = timeit(nb, fnargs, args.repeat)
        t_np = timeit(npf, fnargs, args.repeat)
        print(f"{label:34s} {t_nb*1e3:9.2f}ms {t_np*1e3:9.2f}ms {t_np/t_nb:7.2f}x")


if __name__ == "__main__":
    main()
