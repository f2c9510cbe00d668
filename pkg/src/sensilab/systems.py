"""Measure-preserving maps of the unit interval and exact orbit arithmetic.

Points of [0, 1) are dyadic fixed-point numbers: an integer numerator below
``2**precision_bits``.  Every shipped map sends the width-P grid into itself,
so orbits are computed without any rounding.  The price is that an expanding
map consumes low-order bits at each step; once too few survive, further
iterates describe the finite grid rather than a generic real number (the
doubling map, for instance, collapses every dyadic to 0 after P steps).  The
orbit and estimator entry points therefore demand enough bits for the
requested horizon plus 64 guard bits, and refuse to run past that budget.

Shipped maps:

* ``radic:r``    -- x -> r*x mod 1 for an integer r >= 2 (doubling is r=2).
* ``rotation:a`` -- x -> x + a mod 1, with a a dyadic angle.  An irrational
  rotation is represented by truncating the angle to the working width; the
  truncation is itself a measure-preserving rotation whose period is far
  beyond any horizon used here, so at sampling resolution it stands in for
  the irrational one.  Variants that differ from a rotation only on a
  measure-zero set are likewise indistinguishable to the estimators, which is
  why no separate map kind exists for them.
* ``tent``       -- x -> 2x on [0, 1/2), 2 - 2x on [1/2, 1), with the peak
  preimage 1/2 wrapping to 0.
* ``identity``   -- the do-nothing control map.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import backends
from .errors import PrecisionExhaustedError, SpecFormatError
from .streams import Substream

GUARD_BITS = 64
DEFAULT_BITS = 128

_KIND_CODES = {
    "identity": backends.IDENTITY,
    "radic": backends.RADIC,
    "rotation": backends.ROTATION,
    "tent": backends.TENT,
}


@dataclass(frozen=True)
class ExactPoint:
    """A dyadic point numerator / 2**precision_bits in [0, 1)."""

    numerator: int
    precision_bits: int

    def __post_init__(self):
        if self.precision_bits < 1:
            raise ValueError("precision_bits must be positive")
        if not 0 <= self.numerator < (1 << self.precision_bits):
            raise ValueError("numerator out of range for precision")

    @classmethod
    def zero(cls, precision_bits: int = DEFAULT_BITS) -> "ExactPoint":
        return cls(0, precision_bits)

    @classmethod
    def from_fraction(cls, num: int, den: int, precision_bits: int = DEFAULT_BITS) -> "ExactPoint":
        """Truncation of num/den to the grid; exact for dyadic fractions."""
        if den <= 0 or not 0 <= num < den:
            raise ValueError("need 0 <= num < den")
        return cls((num << precision_bits) // den, precision_bits)

    @classmethod
    def from_float(cls, x: float, precision_bits: int = DEFAULT_BITS) -> "ExactPoint":
        if not 0.0 <= x < 1.0:
            raise ValueError("need 0 <= x < 1")
        return cls(int(math.floor(x * (1 << precision_bits))), precision_bits)

    def to_float(self) -> float:
        """Truncated 53-bit float value (same rounding as the metrics)."""
        return backends.unit_float(self.numerator, self.precision_bits)

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.precision_bits)

    def with_precision(self, precision_bits: int) -> "ExactPoint":
        """Rescale to a wider grid.  Exact; narrowing is refused."""
        if precision_bits < self.precision_bits:
            raise ValueError("cannot narrow an exact point")
        shift = precision_bits - self.precision_bits
        return ExactPoint(self.numerator << shift, precision_bits)

    def hex(self) -> str:
        return f"0x{self.numerator:x}@{self.precision_bits}"

    @classmethod
    def parse(cls, text: str) -> "ExactPoint":
        m = re.fullmatch(r"0x([0-9a-fA-F]+)@(\d+)", text.strip())
        if not m:
            raise SpecFormatError(f"not a point literal: {text!r}")
        return cls(int(m.group(1), 16), int(m.group(2)))

    def __str__(self) -> str:
        return self.hex()


_DESCRIPTIONS = {
    "radic": "x -> {r}x mod 1",
    "rotation": "x -> x + alpha mod 1",
    "tent": "x -> 2x on [0,1/2), 2-2x on [1/2,1)",
    "identity": "x -> x",
}


@dataclass(frozen=True)
class MapSpec:
    """A shipped interval map.  Construct via the factory methods."""

    kind: str
    r: int | None = None
    alpha: ExactPoint | None = None
    description: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise SpecFormatError(f"unknown map kind: {self.kind!r}")
        if self.kind == "radic":
            if self.r is None or self.r < 2:
                raise ValueError("radic needs an integer factor r >= 2")
            if self.r > (1 << 16):
                raise ValueError("radic factor too large for the kernels")
        elif self.r is not None:
            raise ValueError(f"{self.kind} takes no factor")
        if self.kind == "rotation":
            if self.alpha is None or self.alpha.numerator == 0:
                raise ValueError("rotation needs a nonzero angle in (0, 1)")
        elif self.alpha is not None:
            raise ValueError(f"{self.kind} takes no angle")
        if not self.description:
            object.__setattr__(self, "description",
                               _DESCRIPTIONS[self.kind].format(r=self.r))

    @classmethod
    def radic(cls, r: int) -> "MapSpec":
        return cls("radic", r=r)

    @classmethod
    def rotation(cls, alpha: ExactPoint) -> "MapSpec":
        return cls("rotation", alpha=alpha)

    @classmethod
    def tent(cls) -> "MapSpec":
        return cls("tent")

    @classmethod
    def identity(cls) -> "MapSpec":
        return cls("identity")

    def __str__(self) -> str:
        return format_map(self)


@dataclass(frozen=True)
class Orbit:
    """A finite forward orbit x, Tx, ..., T^horizon x."""

    map: MapSpec
    points: tuple[ExactPoint, ...]

    @property
    def horizon(self) -> int:
        return len(self.points) - 1


def bits_per_step(spec: MapSpec) -> int:
    """Low-order bits consumed by one application of the map."""
    if spec.kind == "radic":
        return (spec.r - 1).bit_length()
    if spec.kind == "tent":
        return 1
    return 0


def required_bits(spec: MapSpec, horizon: int) -> int:
    """Minimum point width for a faithful orbit of the given depth."""
    need = horizon * bits_per_step(spec) + GUARD_BITS
    if spec.kind == "rotation":
        need = max(need, spec.alpha.precision_bits)
    return max(need, GUARD_BITS)


def map_codes(spec: MapSpec, precision_bits: int) -> tuple[int, int, int]:
    """Kernel arguments (kind code, factor, angle numerator) at a width."""
    code = _KIND_CODES[spec.kind]
    r = spec.r or 0
    alpha = 0
    if spec.kind == "rotation":
        alpha = spec.alpha.with_precision(precision_bits).numerator
    return code, r, alpha


def _common_precision(spec: MapSpec, *points: ExactPoint) -> int:
    bits = max(p.precision_bits for p in points)
    if spec.kind == "rotation":
        bits = max(bits, spec.alpha.precision_bits)
    return bits


def _check_budget(spec: MapSpec, horizon: int, precision_bits: int) -> None:
    cost = bits_per_step(spec)
    if cost == 0:
        return
    need = horizon * cost + GUARD_BITS
    if precision_bits < need:
        raise PrecisionExhaustedError(
            f"{spec.kind} orbit to depth {horizon} needs {need} bits, "
            f"points carry {precision_bits}")


def iterate(spec: MapSpec, x: ExactPoint) -> ExactPoint:
    """One exact application of the map."""
    bits = _common_precision(spec, x)
    if bits < bits_per_step(spec) + 1:
        raise PrecisionExhaustedError(
            f"point width {bits} cannot absorb one {spec.kind} step")
    code, r, alpha = map_codes(spec, bits)
    num = backends.purepy.step_num(code, r, alpha,
                                   x.with_precision(bits).numerator, bits)
    return ExactPoint(num, bits)


def orbit(spec: MapSpec, x: ExactPoint, horizon: int) -> Orbit:
    """The exact forward orbit up to ``horizon`` steps.

    Raises PrecisionExhaustedError when the point is too narrow for the depth.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    bits = _common_precision(spec, x)
    _check_budget(spec, horizon, bits)
    code, r, alpha = map_codes(spec, bits)
    num = x.with_precision(bits).numerator
    points = [ExactPoint(num, bits)]
    for _ in range(horizon):
        num = backends.purepy.step_num(code, r, alpha, num, bits)
        points.append(ExactPoint(num, bits))
    return Orbit(map=spec, points=tuple(points))


def advance(spec: MapSpec, points: list[ExactPoint], steps: int) -> list[ExactPoint]:
    """T^steps applied to each point, through the fast kernels."""
    if not points:
        return []
    bits = _common_precision(spec, *points)
    _check_budget(spec, steps, bits)
    code, r, alpha = map_codes(spec, bits)
    nums = [p.with_precision(bits).numerator for p in points]
    moved = backends.map_batch(code, r, alpha, nums, bits, steps)
    return [ExactPoint(n, bits) for n in moved]


def sample_point(rng: Substream, precision_bits: int, index: int = 0) -> ExactPoint:
    """Uniform grid point; a pure function of (stream, index)."""
    return sample_points(rng, precision_bits, index, 1)[0]


def sample_points(rng: Substream, precision_bits: int, start: int,
                  count: int) -> list[ExactPoint]:
    nums = rng.numerators(precision_bits, start, count)
    return [ExactPoint(n, precision_bits) for n in nums]


def golden_angle(precision_bits: int = 256) -> ExactPoint:
    """The golden rotation angle (sqrt(5)-1)/2, truncated to the grid."""
    num = (math.isqrt(5 << (2 * precision_bits)) - (1 << precision_bits)) >> 1
    return ExactPoint(num, precision_bits)


def sqrt_angle(k: int, precision_bits: int = 256) -> ExactPoint:
    """Fractional part of sqrt(k), truncated to the grid (k not a square)."""
    root = math.isqrt(k << (2 * precision_bits))
    whole = math.isqrt(k)
    if whole * whole == k:
        raise ValueError("k must not be a perfect square")
    return ExactPoint(root - (whole << precision_bits), precision_bits)


def irrational_angles(count: int, precision_bits: int = 256) -> list[ExactPoint]:
    """Distinct irrational rotation angles: golden, then sqrt fractions."""
    ks = [2, 3, 5, 6, 7, 10, 11, 13, 14]
    if not 1 <= count <= len(ks) + 1:
        raise ValueError("between 1 and 10 built-in angles")
    out = [golden_angle(precision_bits)]
    out += [sqrt_angle(k, precision_bits) for k in ks[:count - 1]]
    return out


def format_map(spec: MapSpec) -> str:
    """Canonical text form, accepted back by parse_map."""
    if spec.kind == "radic":
        return f"radic:{spec.r}"
    if spec.kind == "rotation":
        return f"rotation:{spec.alpha.hex()}"
    return spec.kind


def parse_map(text: str) -> MapSpec:
    """Parse ``radic:2``, ``rotation:0x..@bits`` (or a fraction like
    ``rotation:1/7@128``), ``tent``, ``identity``."""
    text = text.strip()
    if text == "tent":
        return MapSpec.tent()
    if text == "identity":
        return MapSpec.identity()
    if text.startswith("radic:"):
        arg = text[len("radic:"):]
        try:
            r = int(arg)
        except ValueError:
            raise SpecFormatError(f"bad radic factor: {arg!r}") from None
        return MapSpec.radic(r)
    if text.startswith("rotation:"):
        arg = text[len("rotation:"):]
        if arg.startswith("0x"):
            return MapSpec.rotation(ExactPoint.parse(arg))
        m = re.fullmatch(r"(\d+)/(\d+)(?:@(\d+))?", arg)
        if m:
            bits = int(m.group(3)) if m.group(3) else DEFAULT_BITS
            return MapSpec.rotation(ExactPoint.from_fraction(
                int(m.group(1)), int(m.group(2)), bits))
        if arg == "golden":
            return MapSpec.rotation(golden_angle())
        raise SpecFormatError(f"bad rotation angle: {arg!r}")
    raise SpecFormatError(f"not a map: {text!r}")


SHIPPED_MAPS = ("radic:2", "radic:3", "tent", "rotation:golden", "identity")
