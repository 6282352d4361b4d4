"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from cpdiff import cps
from cpdiff._backend import BACKEND, kernels, pykernels


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    s = cps.fibonacci_scheme()
    pts = cps.enumerate_points(s, (0.0, 1e5), (0.0, 8.0))
    pos = np.ascontiguousarray((pts @ s.basis.T)[:, :1])
    w = np.exp(-np.pi * (pts @ s.basis.T)[:, 1] ** 2)
    zeros = np.zeros_like(w)
    vals = rng.normal(size=2_000_000) * 10.0 ** rng.integers(-8, 8, size=2_000_000)
    tiles = (rng.random((500, 2000)) < 0.618).astype(np.uint8)
    enum_args = (np.ascontiguousarray(s.basis), 1, np.zeros(1), 1e5, np.zeros(1), 8.0,
                 np.array([-200_000, -200_000]), np.array([200_000, 200_000]), 10**8)
    return {
        "enumerate_candidates (r=1e5, t=8)": lambda k: k.enumerate_candidates(*enum_args),
        f"phase_sum ({len(w)} points)": lambda k: k.phase_sum(pos, w, zeros, np.array([0.37])),
        "compensated_sum (2e6 values)": lambda k: k.compensated_sum(vals),
        "walk_histogram (500 x 2000 tiles)": lambda k: k.walk_histogram(
            tiles, 1.0, -0.618, -100.0, 1.0, 200),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels is pykernels:
        print(f"compiled extension not available (backend: {BACKEND}); nothing to compare")
        return
    print(f"{'kernel':40s} {'compiled':>12s} {'fallback':>12s} {'speedup':>9s}")
    for name, fn in cases().items():
        tc = _best(lambda: fn(kernels), args.repeat)
        tp = _best(lambda: fn(pykernels), args.repeat)
        print(f"{name:40s} {tc * 1e3:10.2f}ms {tp * 1e3:10.2f}ms {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
