"""Compare the numba and numpy versions of the hot kernels.

Both versions are called directly, so the ``BARRIER_BOUND_NUMBA`` flag does
not matter here. The first numba call (compilation or cache load) is timed
separately and excluded from the steady-state numbers.

    python benchmarks/bench_kernels.py [--repeat 5] [--grid 256] [--pairs 2048]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from barrier_bound import kernels
from barrier_bound._accel import _numba


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def max_diff(a, b):
    if isinstance(a, np.ndarray):
        return float(np.max(np.abs(a - b)))
    if isinstance(a[0], np.ndarray):
        return max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))
    return abs(float(a[0]) - float(b[0]))


def cases(grid, pairs, rng):
    h = 2.0 * np.pi / grid
    u = np.sin(np.linspace(0, 2 * np.pi, grid, endpoint=False))[:, None] * np.cos(
        np.linspace(0, 2 * np.pi, grid, endpoint=False))[None, :] + 0.01 * rng.standard_normal((grid, grid))
    fx, fy = rng.standard_normal((2, grid, grid))
    x1 = np.sort(rng.uniform(0, 10, pairs))
    v1 = np.sin(x1)
    pts = rng.uniform(0, 3 * np.pi, (pairs, 2))
    vals = np.cos(pts[:, 0] + pts[:, 1])
    per = np.array([3 * np.pi, 3 * np.pi])
    eye = np.eye(2)
    return [
        (f"face_gradients {grid}^2", lambda: kernels.face_gradients_np(u, h, h),
         lambda: kernels.face_gradients_nb(u, h, h)),
        (f"divergence {grid}^2", lambda: kernels.divergence_np(fx, fy, h, h),
         lambda: kernels.divergence_nb(fx, fy, h, h)),
        (f"gradient4 {grid}^2", lambda: kernels.gradient4_np(u, h, h),
         lambda: kernels.gradient4_nb(u, h, h)),
        (f"pair_max_1d n={pairs}", lambda: kernels.pair_max_1d_np(x1, v1, 0.0),
         lambda: kernels.pair_max_1d_nb(x1, v1, 0.0)),
        (f"pair_max_torus l2 n={pairs}", lambda: kernels.pair_max_torus_np(pts, vals, per, 0, 2.0, eye),
         lambda: kernels.pair_max_torus_nb(pts, vals, per, 0, 2.0, eye)),
        (f"pair_max_torus l4/3 n={pairs}", lambda: kernels.pair_max_torus_np(pts, vals, per, 0, 4.0 / 3.0, eye),
         lambda: kernels.pair_max_torus_nb(pts, vals, per, 0, 4.0 / 3.0, eye)),
        (f"pair_max_torus quad n={pairs // 2}",
         lambda: kernels.pair_max_torus_np(pts[: pairs // 2], vals[: pairs // 2], per, 1, 2.0, eye),
         lambda: kernels.pair_max_torus_nb(pts[: pairs // 2], vals[: pairs // 2], per, 1, 2.0, eye)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--grid", type=int, default=256)
    parser.add_argument("--pairs", type=int, default=2048)
    args = parser.parse_args(argv)
    if _numba is None:
        print("numba is not installed; only the numpy kernels can run")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numpy [s]':>10s} {'numba [s]':>10s} {'first [s]':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name, f_np, f_nb in cases(args.grid, args.pairs, rng):
        t_np, out_np = best_of(f_np, args.repeat)
        if _numba is None:
            print(f"{name:32s} {t_np:10.4f}")
            continue
        t0 = time.perf_counter()
        f_nb()
        first = time.perf_counter() - t0
        t_nb, out_nb = best_of(f_nb, args.repeat)
        print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {first:10.4f} {t_np / t_nb:8.1f} {max_diff(out_np, out_nb):9.1e}")


if __name__ == "__main__":
    main()
