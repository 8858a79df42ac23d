"""Time each hot kernel with the numba backend and with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

The first jit call (compilation) is excluded; each row reports the best of
``--repeat`` runs.
"""

import argparse
import time

import numpy as np

from nlslab import _kernels as kern


def cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    seqs = cplx(rng, 64, 256)
    z = cplx(rng, 64, 128, 128)
    labels = rng.integers(0, 64, 1_000_000)
    values = rng.standard_normal(1_000_000)
    return [
        ("variation2_sq (64 x 256)", kern.variation2_sq_jit, kern.variation2_sq_numpy, (seqs,)),
        ("abs_pow_sum p=6 (1M)", kern.abs_pow_sum_jit, kern.abs_pow_sum_numpy, (z, 6)),
        ("abs_pow_sum p=7.5 (1M)", kern.abs_pow_sum_jit, kern.abs_pow_sum_numpy, (z, 7.5)),
        ("abs_max (1M)", kern.abs_max_jit, kern.abs_max_numpy, (z,)),
        ("pow_gradient p=8 (1M)", kern.pow_gradient_jit, kern.pow_gradient_numpy, (z, 8)),
        ("label_spread (1M, 64)", kern.label_spread_jit, kern.label_spread_numpy,
         (labels, values, 64)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not kern.HAVE_NUMBA:
        print("numba is not installed; only the numpy fallback is available")
        return

    print(f"{'kernel':28s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for name, jit_fn, np_fn, fargs in cases(np.random.default_rng(args.seed)):
        jit_fn(*fargs)  # compile
        tj = best_of(lambda: jit_fn(*fargs), args.repeat)
        tn = best_of(lambda: np_fn(*fargs), args.repeat)
        print(f"{name:28s} {1e3 * tj:11.2f} {1e3 * tn:11.2f} {tn / tj:7.1f}x")


if __name__ == "__main__":
    main()
