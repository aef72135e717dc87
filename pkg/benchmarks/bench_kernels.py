"""Benchmark the compiled kernels against the pure-Python fallbacks.

Times moving_average, alternating_extrema, and betainc on both backends and
prints a speedup table.  Run directly:

    python benchmarks/bench_kernels.py [--repeat 5] [--size 200000]
"""

import argparse
import time

import numpy as np

from tidalbelt._kernels import _pykernels

try:
    from tidalbelt._kernels import _ckernels
except ImportError:
    _ckernels = None


def _best_of(repeat, fn, *args):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--size", type=int, default=200_000)
    args = parser.parse_args()

    rng = np.random.Generator(np.random.Philox(key=np.uint64(123)))
    x = np.cumsum(rng.standard_normal(args.size)) * 0.01 + np.sin(
        np.arange(args.size) * 0.01
    )
    beta_args = [(0.5 * df, 0.5, 0.3 + 0.4 * (i % 7) / 7) for i, df in enumerate(range(1, 2001))]

    def bench_beta(mod):
        for a, b, xx in beta_args:
            mod.betainc(a, b, xx)

    cases = [
        ("moving_average", lambda m: m.moving_average(x, 250)),
        ("alternating_extrema", lambda m: m.alternating_extrema(x, 0.8)),
        ("betainc x2000", bench_beta),
    ]

    print(f"n = {args.size}, best of {args.repeat}")
    print(f"{'kernel':<22} {'python':>10} {'cython':>10} {'speedup':>8}")
    for name, call in cases:
        t_py = _best_of(args.repeat, call, _pykernels)
        if _ckernels is None:
            print(f"{name:<22} {t_py * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>8}")
            continue
        t_c = _best_of(args.repeat, call, _ckernels)
        print(
            f"{name:<22} {t_py * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms "
            f"{t_py / t_c:>7.1f}x"
        )


if __name__ == "__main__":
    main()
