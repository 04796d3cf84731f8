"""Benchmark the numba-compiled kernels against the pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeats 5]

The numpy path is what you get with PARKPLAN_NUMBA=0; the workloads mirror
the hot call sites (batch containment tests for the collision oracle, pose
sweeps for planner arcs and analytic expansions, arc integration for node
expansion).
"""

import argparse
import math
import time

import numpy as np

from parkplan import kernels
from parkplan.geometry import VehicleSpec, footprint_polygon


def timeit(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if not kernels.NUMBA_ENABLED:
        print("numba path disabled (PARKPLAN_NUMBA=0 or numba missing); "
              "nothing to compare")
        return

    rng = np.random.default_rng(0)
    verts = footprint_polygon(VehicleSpec()).as_array()

    points = rng.uniform(-6, 6, size=(100_000, 2))
    poses = rng.uniform(-4, 4, size=(5_000, 3))
    xs, ys = np.ascontiguousarray(poses[:, 0]), np.ascontiguousarray(poses[:, 1])
    ths = np.ascontiguousarray(poses[:, 2])
    # near misses only: a ring of contour points outside every footprint,
    # so the sweep always scans to the end (the planner's common case)
    angles = rng.uniform(0, 2 * math.pi, size=2_000)
    radii = rng.uniform(9.0, 12.0, size=2_000)
    obstacles = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)

    workloads = {
        "point_in_convex_polygon (100k pts)": lambda impl: impl(
            points, verts, 1e-9
        ),
        "first_colliding_pose (5k poses x 2k pts)": lambda impl: impl(
            xs, ys, ths, verts, obstacles, 1e-9
        ),
        "integrate_arc (20k arcs x 10 substeps)": lambda impl: [
            impl(0.0, 0.0, 0.3, 0.2, 1.0, 1.0, 10, 3.0) for _ in range(20_000)
        ],
    }

    kernels.warmup()
    print(f"{'workload':45s} {'numba':>10s} {'numpy':>10s} {'speedup':>9s}")
    for name, call in workloads.items():
        key = name.split(" ")[0]
        impls = kernels.IMPLEMENTATIONS[key]
        t_nb = timeit(lambda: call(impls["numba"]), args.repeats)
        t_np = timeit(lambda: call(impls["numpy"]), args.repeats)
        print(f"{name:45s} {t_nb * 1e3:8.2f}ms {t_np * 1e3:8.2f}ms "
              f"{t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
