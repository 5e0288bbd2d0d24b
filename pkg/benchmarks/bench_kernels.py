#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run:
    python benchmarks/bench_kernels.py [--repeats 5]

The same comparison path is selected package-wide by WASSBOUND_NO_NUMBA=1.
"""

import argparse
import time

import numpy as np

from wassbound._accel import USE_NUMBA
from wassbound._kernels import KERNEL_IMPLS


def _timeit(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _bench_case(name, args, repeats, check):
    impls = KERNEL_IMPLS[name]
    nb = impls["numba"]
    np_fn = impls["numpy"]
    t_np, out_np = _timeit(np_fn, args, repeats)
    if nb is None:
        print(f"{name:>20}: numpy {t_np * 1e3:8.2f} ms   (numba unavailable/disabled)")
        return
    nb(*args)  # compile outside the timing loop
    t_nb, out_nb = _timeit(nb, args, repeats)
    ok = check(out_nb, out_np)
    print(
        f"{name:>20}: numba {t_nb * 1e3:8.2f} ms   numpy {t_np * 1e3:8.2f} ms   "
        f"speedup {t_np / t_nb:6.1f}x   agree={ok}"
    )


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"numba active in package: {USE_NUMBA}")

    xu = np.sort(rng.normal(size=20_000))
    wu = np.full(20_000, 1.0 / 20_000)
    xv = np.sort(rng.normal(size=20_000) * 1.3 + 0.2)
    _bench_case(
        "w1_1d_sorted",
        (xu, wu, xv, wu.copy()),
        args.repeats,
        lambda a, b: abs(a - b) < 1e-10,
    )

    m = 60
    a = rng.random(m)
    a /= a.sum()
    b = rng.random(m)
    b /= b.sum()
    cost = np.rint(rng.random((m, m)) * 1e9).astype(np.int64)
    _bench_case(
        "mcf_transport",
        (a, b, cost),
        args.repeats,
        lambda x, y: abs(np.sum(x[0] * cost) - np.sum(y[0] * cost)) < 1.0,
    )

    path = np.cumsum(rng.normal(size=4096)) * (1 / 64)
    _bench_case(
        "holder_sup",
        (path, 0.3, 1.0 / 4095),
        args.repeats,
        lambda x, y: abs(x - y) < 1e-10,
    )

    noise = rng.normal(size=1_000_000)
    _bench_case(
        "ar1_path",
        (0.0, 0.9, noise),
        args.repeats,
        lambda x, y: np.max(np.abs(x - y)) < 1e-8,
    )


if __name__ == "__main__":
    main()
