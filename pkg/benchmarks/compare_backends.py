#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure NumPy/Python fallback.

Times each hot kernel on pipeline-shaped workloads and prints a speedup
table.  Run after building the extension:

    python3 benchmarks/compare_backends.py [--pixels 384] [--m 300]
"""

import argparse
import math
import time

import numpy as np

from otseg._kernels import available_backends, get_backend


def time_call(fn, *args, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def build_workloads(side, m, seed=3):
    rng = np.random.default_rng(seed)
    feat = np.ascontiguousarray(rng.random((side, side, 1)))
    h = math.sqrt(side * side / m)
    grid = int(round(math.sqrt(m)))
    ys = (np.arange(grid) + 0.5) * side / grid - 0.5
    centers = np.ascontiguousarray(
        np.concatenate(
            [
                np.repeat(ys, grid)[:, None],
                np.tile(ys, grid)[:, None],
                rng.random((grid * grid, 1)),
            ],
            axis=1,
        )
    )
    gens = np.ascontiguousarray(
        np.concatenate(
            [
                centers[:, :2],
                np.full((grid * grid, 1), 1.0 / 18.0),
                np.zeros((grid * grid, 1)),
                np.full((grid * grid, 1), 1.0 / 18.0),
                np.full((grid * grid, 1), 4.0),
            ],
            axis=1,
        )
    )
    colors = np.ascontiguousarray(rng.random((side * side, 1)))
    palette = np.ascontiguousarray(np.sort(rng.random(15))[:, None])
    labels = np.ascontiguousarray(
        rng.integers(0, m, size=(side, side)).astype(np.int32)
    )
    transport = []
    for _ in range(2000):
        a = int(rng.integers(2, 16))
        b = int(rng.integers(2, 16))
        v = rng.random(a) + 0.05
        w = rng.random(b) + 0.05
        w = w * v.sum() / w.sum()
        cost = np.ascontiguousarray(rng.random((a, b)))
        transport.append((cost, v, w))
    return {
        "slic_assign": lambda impl: impl.slic_assign(
            feat, centers, int(math.ceil(h)), (h * h) / 100.0
        ),
        "power_assign": lambda impl: impl.power_assign(
            (side, side), gens, int(math.ceil(1.5 * h))
        ),
        "assign_bins": lambda impl: impl.assign_bins(colors, palette),
        "label_components": lambda impl: impl.label_components(labels),
        "solve_transport_x2000": lambda impl: [
            impl.solve_transport(c, v, w) for c, v, w in transport
        ],
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pixels", type=int, default=384, help="image side")
    parser.add_argument("--m", type=int, default=300, help="superpixel count")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    names = available_backends()
    if "compiled" not in names:
        print("compiled backend not built; run pip install -e . first")
        return 1
    compiled = get_backend("compiled")
    pure = get_backend("python")
    workloads = build_workloads(args.pixels, args.m)

    print(f"workload: {args.pixels}x{args.pixels} image, m={args.m}")
    print(f"{'kernel':<24} {'compiled':>12} {'python':>12} {'speedup':>9}")
    for name, call in workloads.items():
        tc = time_call(call, compiled, repeats=args.repeats)
        tp = time_call(call, pure, repeats=args.repeats)
        print(f"{name:<24} {tc * 1e3:>10.1f}ms {tp * 1e3:>10.1f}ms {tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
