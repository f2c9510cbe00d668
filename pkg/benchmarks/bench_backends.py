"""Compare the native kernel against the pure-Python reference.

Runs the three hot operations on representative workloads, checks that both
backends agree exactly, and prints a timing table.  Usage::

    python benchmarks/bench_backends.py [--pairs N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sensilab import Substream, golden_angle
from sensilab.backends import (CIRCLE, EUCLIDEAN, RADIC, ROTATION, TENT,
                               _native, purepy)


def _nums(seed: int, role: int, bits: int, count: int) -> list[int]:
    return Substream(seed, (role,)).numerators(bits, 0, count)


def _native_call(name, kind, r, alpha, base, s, xs, ys, bits, horizon, extra):
    from sensilab import backends
    mat_x = backends._limbs(xs, bits)
    mat_y = backends._limbs(ys, bits)
    arow = backends._alpha_row(kind, alpha, bits)
    if name == "derived_max":
        out = np.empty(len(xs), dtype=np.float64)
        _native.derived_max_batch(kind, r, arow, base, s, mat_x, mat_y,
                                  bits, horizon, 1.0, out)
        return out
    if name == "first_exceed":
        out = np.empty(len(xs), dtype=np.int64)
        _native.first_exceed_batch(kind, r, arow, base, s, mat_x, mat_y,
                                   bits, horizon, extra, 1, out)
        return out
    _native.map_batch(kind, r, arow, mat_x, bits, horizon)
    return backends._from_limbs(mat_x)


def _pure_call(name, kind, r, alpha, base, s, xs, ys, bits, horizon, extra):
    if name == "derived_max":
        return purepy.derived_max_batch(kind, r, alpha, base, s, xs, ys,
                                        bits, horizon)
    if name == "first_exceed":
        return purepy.first_exceed_batch(kind, r, alpha, base, s, xs, ys,
                                         bits, horizon, extra, True)
    return purepy.map_batch(kind, r, alpha, xs, bits, horizon)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=5000)
    args = parser.parse_args()
    if _native is None:
        print("native kernel not built; nothing to compare")
        return 1

    n = args.pairs
    golden = golden_angle(256).numerator
    workloads = [
        ("first_exceed doubling d=0.4 N=200", "first_exceed",
         RADIC, 2, 0, EUCLIDEAN, 0.0, 464, 200, 0.4),
        ("derived_max doubling N=50", "derived_max",
         RADIC, 2, 0, EUCLIDEAN, 0.0, 164, 50, 0.0),
        ("derived_max tent circle N=100", "derived_max",
         TENT, 0, 0, CIRCLE, 0.0, 164, 100, 0.0),
        ("derived_max rotation circle N=60", "derived_max",
         ROTATION, 0, golden, CIRCLE, 0.0, 256, 60, 0.0),
        ("map_batch radic:3 200 steps", "map_batch",
         RADIC, 3, 0, EUCLIDEAN, 0.0, 464, 200, 0.0),
    ]
    print(f"{n} pairs per workload\n")
    print(f"{'workload':<38} {'native':>9} {'pure':>9} {'speedup':>8}")
    for label, name, kind, r, alpha, base, s, bits, horizon, extra in workloads:
        xs = _nums(7, 0, bits, n)
        ys = _nums(7, 1, bits, n)
        t0 = time.perf_counter()
        got_n = _native_call(name, kind, r, alpha, base, s, xs, ys,
                             bits, horizon, extra)
        t1 = time.perf_counter()
        got_p = _pure_call(name, kind, r, alpha, base, s, xs, ys,
                           bits, horizon, extra)
        t2 = time.perf_counter()
        if isinstance(got_n, list):
            same = got_n == got_p
        else:
            same = np.array_equal(got_n, got_p)
        if not same:
            print(f"{label:<38} BACKENDS DISAGREE")
            return 1
        tn, tp = t1 - t0, t2 - t1
        print(f"{label:<38} {tn:>8.3f}s {tp:>8.3f}s {tp / tn:>7.1f}x")
    print("\noutputs identical on all workloads")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
