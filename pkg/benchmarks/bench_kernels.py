"""Compiled vs pure-Python timings for the hot kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat R]
"""
import argparse
import time

import numpy as np

from regspec import _kernels_py, kernels
from regspec.sampler import circulant_seed


def _switch_chain(backend, steps):
    g = circulant_seed(200, 60)
    bits = np.array(g.bits, copy=True)
    edges = np.ascontiguousarray(g.edges(), dtype=np.int32)
    return lambda: backend.run_switch_chain(bits, edges, np.random.PCG64(1), steps)


def _bisect(backend, n):
    rng = np.random.default_rng(2)
    diag = rng.standard_normal(n)
    offsq = rng.standard_normal(n - 1) ** 2
    idx = np.array([0, 1, n - 2, n - 1], dtype=np.int64)
    pivmin = np.finfo(float).tiny * max(1.0, float(offsq.max()))
    return lambda: backend.tridiag_bisect(diag, offsq, idx, -20.0, 20.0, pivmin, 4 * np.finfo(float).eps)


def _tql1(backend, n):
    rng = np.random.default_rng(3)
    diag = rng.standard_normal(n)
    off = rng.standard_normal(n)
    off[-1] = 0.0

    def run():
        backend.tql1(diag.copy(), off.copy(), np.finfo(float).eps)

    return run


CASES = {
    "switch chain, 2e5 steps (N=200, d=60)": lambda b: _switch_chain(b, 200_000),
    "Sturm bisection, 4 eigenvalues (n=2000)": lambda b: _bisect(b, 2000),
    "implicit QL (n=300)": lambda b: _tql1(b, 300),
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled extension not available; build with `pip install -e . --no-build-isolation`")
    print(f"{'kernel':<42}{'compiled s':>12}{'python s':>12}{'speedup':>10}")
    for name, make in CASES.items():
        fast = best_of(make(kernels.compiled_backend), args.repeat)
        slow = best_of(make(_kernels_py), args.repeat)
        print(f"{name:<42}{fast:>12.4f}{slow:>12.4f}{slow / fast:>9.0f}x")


if __name__ == "__main__":
    main()
