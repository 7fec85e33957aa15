"""Compare the numba and pure-numpy kernel-matrix backends.

Times the Sinc and Gaussian Gram constructions at a few sample sizes and
checks the two paths agree. Run with ``python benchmarks/bench_backends.py``.
"""

import argparse
import math
import time

import numpy as np

from tkrr import _accel


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[200, 1000, 4000])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    cases = [
        ("sinc", _accel.sinc_matrix_numpy, _accel.sinc_matrix_numba, 25.0),
        ("gaussian", _accel.gaussian_matrix_numpy, _accel.gaussian_matrix_numba, 25.0),
    ]
    # compile outside the timed region
    for _, _, jit, p in cases:
        jit(np.zeros(2), np.zeros(2), p)

    print(f"{'kernel':<9} {'n':>6} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8} {'max |diff|':>11}")
    for n in args.sizes:
        x = rng.uniform(-1, 1, n)
        for name, ref, jit, p in cases:
            t_np = best_of(lambda: ref(x, x, p), args.repeat)
            t_nb = best_of(lambda: jit(x, x, p), args.repeat)
            diff = np.max(np.abs(ref(x, x, p) - jit(x, x, p)))
            print(f"{name:<9} {n:>6} {1e3 * t_np:>11.2f} {1e3 * t_nb:>11.2f} {t_np / t_nb:>8.1f} {diff:>11.1e}")


if __name__ == "__main__":
    main()
