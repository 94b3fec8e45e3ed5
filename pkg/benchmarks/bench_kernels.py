#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallbacks.

Run after building the extension (pip install -e . --no-build-isolation):

    python3 benchmarks/bench_kernels.py
"""

import random
import time

import numpy as np

from corpusforge import kernels
from corpusforge.kernels import pure

PRIORS = np.array([0.89, 0.00495, 0.00495, 0.0445, 0.0445, 0.011])


def time_call(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_gc_fill(n):
    rng = random.Random(42)
    src = np.array([rng.uniform(20, 140) for _ in range(n)])
    tgt = np.array([rng.uniform(20, 140) for _ in range(n)])
    t_pure = time_call(pure.gc_fill, list(src), list(tgt), list(PRIORS), 1.0, 6.8)
    t_comp = time_call(kernels.gc_fill, src, tgt, PRIORS, 1.0, 6.8)
    return t_pure, t_comp


def bench_edit_distance(n, calls=200):
    rng = random.Random(43)
    seqs = [([rng.randint(0, 50) for _ in range(n)],
             [rng.randint(0, 50) for _ in range(n)]) for _ in range(calls)]

    def run(fn):
        for a, b in seqs:
            fn(a, b)

    return time_call(run, pure.edit_distance), time_call(run, kernels.edit_distance)


def main():
    print(f"active backend: {kernels.BACKEND}")
    if kernels.BACKEND != "compiled":
        print("compiled extension unavailable; timings below compare pure to pure")
    print()
    print(f"{'kernel':<28}{'pure (s)':>12}{'compiled (s)':>14}{'speedup':>10}")
    for n in (100, 300, 600):
        tp, tc = bench_gc_fill(n)
        print(f"{f'gc_fill {n}x{n}':<28}{tp:>12.4f}{tc:>14.4f}{tp / tc:>9.1f}x")
    for n in (20, 60):
        tp, tc = bench_edit_distance(n)
        print(f"{f'edit_distance len {n} x200':<28}{tp:>12.4f}{tc:>14.4f}"
              f"{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
