"""Benchmark the compiled inner-loop kernel against the numpy fallback.

The accelerated dual projection runs hundreds of tiny iterations per
outer solver step; this script times both backends over a sweep of dual
dimensions and prints the speedup. Run after building the extension:

    python benchmarks/bench_dfgp.py [--iters 400] [--repeats 50]
"""

import argparse
import time

import numpy as np

from mcbeam._core import _fallback
from mcbeam.linalg import lambda_max


def load_compiled():
    try:
        from mcbeam._core import _kernels
    except ImportError:
        return None
    return _kernels


def make_instance(rng, K, n):
    A = (rng.standard_normal((K, n)) + 1j * rng.standard_normal((K, n))) * np.sqrt(0.5)
    B = np.ascontiguousarray((A @ A.conj().T).real)
    a = rng.standard_normal(K) - 0.5
    mu = 2.0 / (lambda_max(B) * (1.0 + 2e-6))
    return B, a, mu


def time_backend(fn, B, a, mu, iters, repeats):
    fn(B, a, mu, iters, 0.0)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(B, a, mu, iters, 0.0)
    return (time.perf_counter() - t0) / repeats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iters", type=int, default=400)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    kernels = load_compiled()
    rng = np.random.default_rng(0)

    print(f"{args.iters} iterations per solve, {args.repeats} repeats")
    print(f"{'K':>4} {'python (ms)':>12} {'cython (ms)':>12} {'speedup':>8}  agreement")
    for K in (8, 16, 32, 64, 128):
        B, a, mu = make_instance(rng, K, 2 * K)
        t_py = time_backend(_fallback.dfgp, B, a, mu, args.iters, args.repeats)
        if kernels is None:
            print(f"{K:>4} {1e3 * t_py:>12.3f} {'n/a':>12} {'n/a':>8}")
            continue
        t_cy = time_backend(kernels.dfgp, B, a, mu, args.iters, args.repeats)
        z_py, _ = _fallback.dfgp(B, a, mu, args.iters, 0.0)
        z_cy, _ = kernels.dfgp(B, a, mu, args.iters, 0.0)
        agree = np.allclose(z_py, z_cy, rtol=1e-9, atol=1e-11)
        print(
            f"{K:>4} {1e3 * t_py:>12.3f} {1e3 * t_cy:>12.3f} "
            f"{t_py / t_cy:>7.1f}x  {'ok' if agree else 'MISMATCH'}"
        )
    if kernels is None:
        print("compiled kernel not available; showing fallback only")


if __name__ == "__main__":
    main()
