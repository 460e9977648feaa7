"""Compiled vs numpy-fallback kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints best-of-``repeat`` wall times and the speedup for each kernel.
"""
import argparse
import timeit

import numpy as np

from postsel import _kernels_py

try:
    from postsel import _kernels
except ImportError:
    _kernels = None


def _hermitian(n, seed=0):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + g.conj().T) / 2


def cases():
    probs = ((0.2, 0.3, 0.5), (0.6, 0.1, 0.3))
    yield "mc_counts n=1e6", lambda k: k.mc_counts(42, 10**6, 0.5, *probs), 1
    for n in (3, 8, 16):
        a = _hermitian(n)
        reps = 200 if n < 16 else 20
        yield f"jacobi_eigh {n}x{n} x{reps}", lambda k, a=a: k.jacobi_eigh(a, 1e-14, 100), reps
    yield "mix64 x1e4", lambda k: [k.mix64(7, i) for i in range(10_000)], 1


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':28s} {'python [s]':>12s} {'compiled [s]':>13s} {'speedup':>8s}")
    for name, fn, reps in cases():
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=reps, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:28s} {py:12.4f} {'-':>13s} {'-':>8s}")
            continue
        cy = min(timeit.repeat(lambda: fn(_kernels), number=reps, repeat=args.repeat))
        print(f"{name:28s} {py:12.4f} {cy:13.4f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
