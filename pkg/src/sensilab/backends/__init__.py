"""Kernel backends and a uniform dispatch layer.

Two implementations of the hot loops exist: a compiled extension over uint32
limb vectors (``_native``) and a pure-Python reference over big integers
(``purepy``).  Both produce identical outputs; the tests enforce parity.  The
compiled kernel is picked automatically when available.  Set the environment
variable ``SENSILAB_BACKEND`` to ``native`` or ``python`` to force a choice;
forcing ``native`` raises if the extension is missing.

The dispatch functions below take raw numerators as Python ints at a shared
bit width.  Conversion to limb matrices happens here so the rest of the
package never sees backend details.
"""

from __future__ import annotations

import importlib
import os

import numpy as np

from . import purepy

IDENTITY = purepy.IDENTITY
RADIC = purepy.RADIC
ROTATION = purepy.ROTATION
TENT = purepy.TENT
EUCLIDEAN = purepy.EUCLIDEAN
CIRCLE = purepy.CIRCLE
POWER = purepy.POWER

unit_float = purepy.unit_float

_requested = os.environ.get("SENSILAB_BACKEND", "").strip().lower()
_native = None
if _requested in ("", "native"):
    try:
        _native = importlib.import_module("._native", __name__)
    except ImportError:
        if _requested == "native":
            raise ImportError(
                "SENSILAB_BACKEND=native but the compiled kernel is not built"
            ) from None
elif _requested in ("python", "pure", "purepy"):
    _native = None
else:
    raise ValueError(f"unrecognized SENSILAB_BACKEND value: {_requested!r}")

BACKEND = "python" if _native is None else "native"


def _limbs(nums, precision: int) -> np.ndarray:
    limbs = (precision + 31) // 32
    nbytes = 4 * limbs
    buf = b"".join(int(v).to_bytes(nbytes, "little") for v in nums)
    return np.frombuffer(buf, dtype="<u4").reshape(len(nums), limbs).copy()


def _from_limbs(mat: np.ndarray) -> list[int]:
    return [int.from_bytes(row.tobytes(), "little") for row in mat]


def _alpha_row(kind: int, alpha: int, precision: int) -> np.ndarray:
    if kind == ROTATION:
        return _limbs([alpha], precision)[0]
    return np.empty(0, dtype="<u4")


def _use_native(precision: int) -> bool:
    return _native is not None and precision <= _native.MAX_PRECISION


def map_batch(kind: int, r: int, alpha: int, nums, precision: int,
              steps: int) -> list[int]:
    """Apply the map ``steps`` times to each numerator."""
    if _use_native(precision):
        mat = _limbs(nums, precision)
        _native.map_batch(kind, r, _alpha_row(kind, alpha, precision),
                          mat, precision, steps)
        return _from_limbs(mat)
    return purepy.map_batch(kind, r, alpha, nums, precision, steps)


def derived_max_batch(kind: int, r: int, alpha: int, base: int, s: float,
                      xs, ys, precision: int, horizon: int,
                      cap: float = 1.0) -> np.ndarray:
    """Per pair: capped max base distance over iterates 0..horizon."""
    if _use_native(precision):
        xm = _limbs(xs, precision)
        ym = _limbs(ys, precision)
        out = np.empty(len(xs), dtype=np.float64)
        _native.derived_max_batch(kind, r, _alpha_row(kind, alpha, precision),
                                  base, s, xm, ym, precision, horizon, cap, out)
        return out
    return purepy.derived_max_batch(kind, r, alpha, base, s, xs, ys,
                                    precision, horizon, cap)


def first_exceed_batch(kind: int, r: int, alpha: int, base: int, s: float,
                       xs, ys, precision: int, horizon: int, threshold: float,
                       strict: bool) -> np.ndarray:
    """Per pair: least iterate index whose base distance crosses the threshold."""
    if _use_native(precision):
        xm = _limbs(xs, precision)
        ym = _limbs(ys, precision)
        out = np.empty(len(xs), dtype=np.int64)
        _native.first_exceed_batch(kind, r, _alpha_row(kind, alpha, precision),
                                   base, s, xm, ym, precision, horizon,
                                   threshold, 1 if strict else 0, out)
        return out
    return purepy.first_exceed_batch(kind, r, alpha, base, s, xs, ys,
                                     precision, horizon, threshold, strict)
