"""Pure-Python reference kernels.

All hot operations work on raw numerators (Python ints) at a shared bit width.
The native module mirrors these semantics limb for limb and is checked against
this module by the parity tests, so every estimator can run on either backend
and produce identical bytes.
"""

from __future__ import annotations

import math

import numpy as np

IDENTITY, RADIC, ROTATION, TENT = 0, 1, 2, 3
EUCLIDEAN, CIRCLE, POWER = 0, 1, 2


def unit_float(diff: int, precision: int) -> float:
    """Truncated float value of ``diff / 2**precision``.

    Keeps the top 53 bits of ``diff`` and drops the rest, so the result is
    exact whenever ``diff`` fits a double, monotone in ``diff`` otherwise, and
    zero only for ``diff == 0``.  Both backends use this same rounding rule.
    """
    bl = diff.bit_length()
    if bl == 0:
        return 0.0
    if bl <= 53:
        return math.ldexp(diff, -precision)
    return math.ldexp(diff >> (bl - 53), bl - 53 - precision)


def step_num(kind: int, r: int, alpha: int, num: int, precision: int) -> int:
    """One application of the map to a raw numerator."""
    mask = (1 << precision) - 1
    if kind == RADIC:
        return (num * r) & mask
    if kind == ROTATION:
        return (num + alpha) & mask
    if kind == TENT:
        doubled = (num << 1) & mask
        if num >> (precision - 1):
            return (-doubled) & mask
        return doubled
    return num


def _dist(base: int, s: float, x: int, y: int, precision: int, modulus: int) -> float:
    diff = x - y if x >= y else y - x
    if base == CIRCLE and diff:
        comp = modulus - diff
        if comp < diff:
            diff = comp
    d = unit_float(diff, precision)
    if base == POWER:
        return d ** s
    return d


def map_batch(kind: int, r: int, alpha: int, nums: list[int],
              precision: int, steps: int) -> list[int]:
    """Apply the map ``steps`` times to every numerator."""
    mask = (1 << precision) - 1
    out = []
    if kind == IDENTITY or steps == 0:
        return list(nums)
    for v in nums:
        if kind == RADIC:
            # pow keeps the repeated multiply in C
            v = (v * pow(r, steps, mask + 1)) & mask
        elif kind == ROTATION:
            v = (v + alpha * steps) & mask
        else:
            for _ in range(steps):
                doubled = (v << 1) & mask
                v = ((-doubled) & mask) if v >> (precision - 1) else doubled
        out.append(v)
    return out


def derived_max_batch(kind: int, r: int, alpha: int, base: int, s: float,
                      xs: list[int], ys: list[int], precision: int,
                      horizon: int, cap: float = 1.0) -> np.ndarray:
    """Per pair: max base distance along the first ``horizon`` steps, capped.

    The maximum runs over iterates 0..horizon inclusive.
    """
    modulus = 1 << precision
    out = np.empty(len(xs), dtype=np.float64)
    for i, (x, y) in enumerate(zip(xs, ys)):
        best = 0.0
        for n in range(horizon + 1):
            d = _dist(base, s, x, y, precision, modulus)
            if d > best:
                best = d
                if best >= cap:
                    break
            if n < horizon:
                x = step_num(kind, r, alpha, x, precision)
                y = step_num(kind, r, alpha, y, precision)
        out[i] = cap if best > cap else best
    return out


def first_exceed_batch(kind: int, r: int, alpha: int, base: int, s: float,
                       xs: list[int], ys: list[int], precision: int,
                       horizon: int, threshold: float,
                       strict: bool) -> np.ndarray:
    """Per pair: least n <= horizon with base distance beyond the threshold.

    ``strict`` selects > over >=.  Pairs that never cross get -1.
    """
    modulus = 1 << precision
    out = np.full(len(xs), -1, dtype=np.int64)
    for i, (x, y) in enumerate(zip(xs, ys)):
        for n in range(horizon + 1):
            d = _dist(base, s, x, y, precision, modulus)
            if (d > threshold) if strict else (d >= threshold):
                out[i] = n
                break
            if n < horizon:
                x = step_num(kind, r, alpha, x, precision)
                y = step_num(kind, r, alpha, y, precision)
    return out
