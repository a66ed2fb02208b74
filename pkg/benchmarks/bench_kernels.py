#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the three hot reductions (grid binning, sorted-key entropy, grouped
joint entropy) and the modal-rule builder on synthetic data sized like a
default experiment row (1e6 samples). The numba side includes a warm-up call
so compilation is not timed.

Usage: python benchmarks/bench_kernels.py [--size N] [--repeat R]
"""

import argparse
import time

import numpy as np

from infoloss import _kernels as K


def _timeit(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if K.BACKEND != "numba":
        print("numba backend unavailable (INFOLOSS_NO_NUMBA set or numba "
              "missing); nothing to compare")
        return

    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, args.size) * 4096.0
    keys = np.sort(rng.integers(0, args.size // 16, args.size))
    g = np.sort(rng.integers(0, args.size // 64, args.size))
    x = rng.integers(0, 1 << 12, args.size)
    order = np.lexsort((x, g))
    gs, xs = g[order], x[order]

    cases = [
        ("floor_snap", K._floor_snap_1d, K._floor_snap_np, (pts,)),
        ("entropy_sorted", K.entropy_sorted, K._entropy_sorted_np, (keys,)),
        ("joint_entropy_sorted", K.joint_entropy_sorted,
         K._joint_entropy_sorted_np, (gs, xs)),
        ("group_modal", K.group_modal, K._group_modal_np, (gs, xs)),
    ]

    print(f"size={args.size}  repeat={args.repeat}  (best of R)")
    print(f"{'kernel':24s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, nb, npy, a in cases:
        nb(*a)  # warm-up / compile
        t_nb = _timeit(nb, a, args.repeat)
        t_np = _timeit(npy, a, args.repeat)
        print(f"{name:24s} {t_nb * 1e3:9.2f}ms {t_np * 1e3:9.2f}ms "
              f"{t_np / t_nb:7.2f}x")


if __name__ == "__main__":
    main()
