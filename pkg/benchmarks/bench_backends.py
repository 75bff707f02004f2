#!/usr/bin/env python3
"""Benchmark the hot kernels: numba backend vs the pure-numpy fallback.

Both backends are built in-process via dualpose._accel.build_kernels, so this
does not depend on the DUALPOSE_NUMBA environment flag.

Usage: python benchmarks/bench_backends.py [--pnp-repeats N] [--smo-size N]
"""

import argparse
import time

import numpy as np

from dualpose._accel import build_kernels
from dualpose.face_model import default_model, whole_face_indices
from dualpose.features import default_intrinsics
from dualpose.geometry import Pose, project, rodrigues_to_matrix


def timeit(fn, repeats):
    fn()  # warmup (JIT compile on the numba side)
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_pnp(kernels, repeats):
    model = default_model()
    world = model.select(whole_face_indices())
    cam = default_intrinsics(256, 256)
    rng = np.random.default_rng(0)
    pose = Pose(rodrigues_to_matrix([0.1, -0.2, 0.05]), [0.05, -0.02, 3.6])
    image = project(world, pose, cam) + rng.normal(0, 1.5, (world.shape[0], 2))
    args = (world, image, cam.fx, cam.fy, cam.cx, cam.cy,
            np.zeros(3), np.array([0.0, 0.0, 3.5]),
            1e-3, 300, 1e-10, 1e-10, 1e-9, 1e6)
    return timeit(lambda: kernels.lm_pnp(*args), repeats)


def bench_smo(kernels, n):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(n, 12))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    X[y > 0] += 0.6
    sq = (X * X).sum(axis=1)
    D2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0)
    K = np.ascontiguousarray(np.exp(-0.1 * D2))
    return timeit(lambda: kernels.smo_solve(K, y, 100.0, 1e-3, 2_000_000), 3)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pnp-repeats", type=int, default=500)
    parser.add_argument("--smo-size", type=int, default=800)
    args = parser.parse_args()

    print("building backends (numba compile happens on first call)...")
    nb = build_kernels(True)
    plain = build_kernels(False)

    print(f"\n{'kernel':<28}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    print("-" * 62)

    t_nb = bench_pnp(nb, args.pnp_repeats)
    t_np = bench_pnp(plain, max(args.pnp_repeats // 10, 10))
    print(f"{'lm_pnp (38 pts, noisy)':<28}{t_nb * 1e3:>10.3f}ms{t_np * 1e3:>10.3f}ms"
          f"{t_np / t_nb:>9.1f}x")

    t_nb = bench_smo(nb, args.smo_size)
    t_np = bench_smo(plain, args.smo_size)
    print(f"{f'smo_solve (n={args.smo_size})':<28}{t_nb * 1e3:>10.3f}ms{t_np * 1e3:>10.3f}ms"
          f"{t_np / t_nb:>9.1f}x")

    # correctness cross-check while we are here
    rng = np.random.default_rng(2)
    model = default_model()
    world = model.select(whole_face_indices())
    cam = default_intrinsics(256, 256)
    image = project(world, Pose(np.eye(3), [0, 0, 3.5]), cam) + rng.normal(0, 1, (38, 2))
    a = nb.lm_pnp(world, image, cam.fx, cam.fy, cam.cx, cam.cy, np.zeros(3),
                  np.array([0.0, 0.0, 3.5]), 1e-3, 300, 1e-10, 1e-10, 1e-9, 1e6)
    b = plain.lm_pnp(world, image, cam.fx, cam.fy, cam.cx, cam.cy, np.zeros(3),
                     np.array([0.0, 0.0, 3.5]), 1e-3, 300, 1e-10, 1e-10, 1e-9, 1e6)
    agree = np.allclose(a[0], b[0], atol=1e-9) and np.allclose(a[1], b[1], atol=1e-9)
    print(f"\nbackend agreement on lm_pnp: {'OK' if agree else 'MISMATCH'}")


if __name__ == "__main__":
    main()
