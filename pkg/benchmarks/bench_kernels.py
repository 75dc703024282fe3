"""Time each hot kernel through numba and through its numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]

Inputs are sized like the acceptance runs (a 20 x 20 classical covering,
1e5 Monte Carlo points for the Remez ratios). Both backends must agree
before a timing is printed.
"""
import argparse
import math
import time

import numpy as np

from fockdom import kernels
from fockdom._accel import HAVE_NUMBA


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def case_greedy_net(scale):
    rho = 1 / (2 * math.sqrt(math.pi))
    delta = 0.25
    h = delta * rho / 2
    n = int(20 * scale / h) + 1
    xs = -10 * scale + h * np.arange(n)
    X, Y = np.meshgrid(xs, xs)
    cx, cy = X.ravel(), Y.ravel()
    crho = np.full(cx.size, rho)
    cell = delta * rho
    g = int(20 * scale / cell) + 1
    args = (cx, cy, crho, delta, -10.0 * scale, -10.0 * scale, cell, g, g)
    return (lambda: kernels.greedy_net_numba(*args), lambda: kernels.greedy_net_numpy(*args),
            f"{cx.size} candidates")


def case_stamp(scale):
    rng = np.random.default_rng(0)
    m = int(20000 * scale * scale)
    ax, ay = rng.uniform(-10, 10, m) * scale, rng.uniform(-10, 10, m) * scale
    radii = np.full(m, 4 * 0.2821)
    grid = (-10.0 * scale, 10.0 * scale, 200, -10.0 * scale, 10.0 * scale, 200)
    vals = rng.random((200, 200))
    return (lambda: kernels.stamp_numba(grid, ax, ay, radii, vals),
            lambda: kernels.stamp_numpy(grid, ax, ay, radii, vals), f"{m} disks on 200x200")


def case_min_scaled(scale):
    rng = np.random.default_rng(1)
    m = int(20000 * scale * scale)
    ax, ay = rng.uniform(-10, 10, m) * scale, rng.uniform(-10, 10, m) * scale
    arho = np.full(m, 0.2821)
    px, py = rng.uniform(-10, 10, 40000) * scale, rng.uniform(-10, 10, 40000) * scale
    return (lambda: kernels.min_scaled_distance_numba(px, py, ax, ay, arho),
            lambda: kernels.min_scaled_distance_numpy(px, py, ax, ay, arho), f"40000 probes, {m} centres")


def case_remez(scale):
    rng = np.random.default_rng(2)
    trials, n, m = int(200 * scale) or 1, 8, 100_000
    coeffs = rng.standard_normal((trials, n + 1)) + 1j * rng.standard_normal((trials, n + 1))
    pts = np.sqrt(rng.random(m)) * np.exp(2j * np.pi * rng.random(m))
    bpts = np.exp(2j * np.pi * np.arange(4096) / 4096)
    ks = np.array([9999, 24999, 49999, 89999])
    return (lambda: kernels.remez_ratios_numba(coeffs, pts, bpts, ks),
            lambda: kernels.remez_ratios_numpy(coeffs, pts, bpts, ks), f"{trials} degree-8 trials, 1e5 points")


CASES = {"greedy_net": case_greedy_net, "stamp": case_stamp, "min_scaled_distance": case_min_scaled,
         "remez_ratios": case_remez}


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind in "iub":
        return np.array_equal(a, b)
    return np.allclose(a, b, rtol=1e-10, atol=1e-12)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="quarter-size inputs")
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    scale = 0.5 if args.quick else 1.0
    print(f"{'kernel':<22}{'size':<32}{'numba [s]':>11}{'numpy [s]':>11}{'speedup':>9}")
    for name, make in CASES.items():
        fast, slow, size = make(scale)
        fast()  # compile outside the timing
        t_fast, a = best_of(fast, args.repeat)
        t_slow, b = best_of(slow, max(1, args.repeat // 2))
        if not same(a, b):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<22}{size:<32}{t_fast:>11.4f}{t_slow:>11.4f}{t_slow / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
