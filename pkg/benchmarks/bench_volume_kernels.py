#!/usr/bin/env python3
"""Benchmark the simplex-determinant kernels across backends.

Runs the distinct-|det| spectrum scan and the witness search on grid point
sets with each available backend (numba, numpy, python) and prints a timing
table.  The numba timing excludes the one-off JIT compile (a warm-up call
runs first).  Results are asserted identical across backends before any
timing is reported.

Usage:
    python benchmarks/bench_volume_kernels.py [--window N] [--rank {2,3}]
"""

import argparse
import os
import time

from latspec import kernels
from latspec.volume import build_point_set


def run_backend(backend, pts, rank, targets):
    os.environ["LATSPEC_KERNELS"] = backend
    if backend == "numba":
        kernels.distinct_abs_dets(pts[: rank + 2], rank)  # warm-up compile
    t0 = time.perf_counter()
    spectrum = kernels.distinct_abs_dets(pts, rank)
    t1 = time.perf_counter()
    witnesses = kernels.find_det_witnesses(pts, rank, targets)
    t2 = time.perf_counter()
    return spectrum, witnesses, t1 - t0, t2 - t1


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--window", type=int, default=12, help="grid half-width")
    parser.add_argument("--rank", type=int, default=2, choices=(2, 3))
    parser.add_argument("--modulus", type=int, default=1, help="keep only multiples")
    args = parser.parse_args()

    if args.rank == 3 and args.window > 2:
        print("note: rank 3 scans all 4-subsets; capping window at 2 (125 points)")
        args.window = 2

    desc = {"kind": "congruence", "modulus": args.modulus, "offset": [0] * args.rank}
    e = build_point_set(desc, args.rank, args.window)
    pts = e.sorted_points
    print(f"rank {args.rank}, window {args.window}, {len(pts)} points")

    backends = ["python", "numpy"] + (["numba"] if kernels.HAS_NUMBA else [])
    baseline = None
    rows = []
    for backend in backends:
        spectrum, witnesses, t_spec, t_wit = run_backend(
            backend, pts, args.rank, targets=list(range(1, 21))
        )
        if baseline is None:
            baseline = (spectrum, witnesses)
        else:
            assert spectrum == baseline[0], f"{backend} spectrum differs"
            assert witnesses == baseline[1], f"{backend} witnesses differ"
        rows.append((backend, len(spectrum), t_spec, t_wit))

    print(f"{'backend':<8} {'values':>7} {'spectrum [s]':>13} {'witnesses [s]':>14} {'speedup':>8}")
    ref = rows[0][2]
    for backend, nvals, t_spec, t_wit in rows:
        speed = ref / t_spec if t_spec else float("inf")
        print(f"{backend:<8} {nvals:>7} {t_spec:>13.4f} {t_wit:>14.4f} {speed:>7.1f}x")


if __name__ == "__main__":
    main()
