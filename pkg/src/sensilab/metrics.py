"""Metrics on [0, 1) and their measurements against Lebesgue measure.

Base metrics are ``euclidean`` (|x - y|), ``circle`` (wraparound distance,
invariant under rotations) and ``power:s`` (|x - y|**s with 0 < s <= 1, a
snowflake of the euclidean metric).  From any base metric ``d`` and map ``T``
the derived metric at horizon N is

    max over 0 <= n <= N of d(T^n x, T^n y), capped at 1.

Under the derived metric two points are close only if their whole orbits stay
close, which is what the sensitivity estimators probe.  The cap keeps the
definition a metric for arbitrary bases; for the shipped bases it never binds.

Distances are computed on exact orbit points and then truncated to 53 bits,
identically in both backends, so every quantity here is a deterministic
function of the inputs and the seed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from . import backends
from ._parallel import run_chunked
from .errors import MapMismatchError, PrecisionExhaustedError, SpecFormatError
from .streams import Substream
from . import systems
from .systems import ExactPoint, MapSpec

_BASE_CODES = {
    "euclidean": backends.EUCLIDEAN,
    "circle": backends.CIRCLE,
    "power": backends.POWER,
}

DERIVED_CAP = 1.0
TRIANGLE_SLACK = 2.0 ** -60


@dataclass(frozen=True)
class MetricSpec:
    """A metric on the unit interval.  Construct via the factory methods."""

    kind: str
    s: float | None = None
    base: "MetricSpec | None" = None
    map: MapSpec | None = None
    horizon: int | None = None

    def __post_init__(self):
        if self.kind in _BASE_CODES:
            if self.kind == "power":
                if self.s is None or not 0.0 < self.s <= 1.0:
                    raise ValueError("power exponent must lie in (0, 1]")
            elif self.s is not None:
                raise ValueError(f"{self.kind} takes no exponent")
            if self.base is not None or self.map is not None or self.horizon is not None:
                raise ValueError(f"{self.kind} is a base metric")
        elif self.kind == "derived":
            if self.base is None or not self.base.is_base:
                raise ValueError("derived needs a base metric (no nesting)")
            if self.map is None:
                raise ValueError("derived needs a map")
            if self.horizon is None or self.horizon < 0:
                raise ValueError("derived needs a horizon >= 0")
        else:
            raise SpecFormatError(f"unknown metric kind: {self.kind!r}")

    @property
    def is_base(self) -> bool:
        return self.kind != "derived"

    @classmethod
    def euclidean(cls) -> "MetricSpec":
        return cls("euclidean")

    @classmethod
    def circle(cls) -> "MetricSpec":
        return cls("circle")

    @classmethod
    def power(cls, s: float) -> "MetricSpec":
        return cls("power", s=s)

    @classmethod
    def derived(cls, base: "MetricSpec", map: MapSpec, horizon: int) -> "MetricSpec":
        return cls("derived", base=base, map=map, horizon=horizon)

    def __str__(self) -> str:
        return format_metric(self)


def format_metric(metric: MetricSpec) -> str:
    """Canonical text form, accepted back by parse_metric."""
    if metric.kind == "power":
        return f"power:{metric.s!r}"
    if metric.kind == "derived":
        return (f"derived({format_metric(metric.base)}; "
                f"{systems.format_map(metric.map)}; N={metric.horizon})")
    return metric.kind


def parse_metric(text: str) -> MetricSpec:
    """Parse ``euclidean``, ``circle``, ``power:0.5`` or
    ``derived(<base>; <map>; N=<horizon>)``."""
    text = text.strip()
    if text == "euclidean":
        return MetricSpec.euclidean()
    if text == "circle":
        return MetricSpec.circle()
    if text.startswith("power:"):
        arg = text[len("power:"):]
        try:
            s = float(arg)
        except ValueError:
            raise SpecFormatError(f"bad power exponent: {arg!r}") from None
        return MetricSpec.power(s)
    m = re.fullmatch(r"derived\((.*)\)", text)
    if m:
        parts = [p.strip() for p in m.group(1).split(";")]
        if len(parts) != 3:
            raise SpecFormatError(
                "derived needs three parts: base; map; N=<horizon>")
        base = parse_metric(parts[0])
        if not base.is_base:
            raise SpecFormatError("derived metrics do not nest")
        spec = systems.parse_map(parts[1])
        hm = re.fullmatch(r"N=(\d+)", parts[2])
        if not hm:
            raise SpecFormatError(f"bad horizon clause: {parts[2]!r}")
        return MetricSpec.derived(base, spec, int(hm.group(1)))
    raise SpecFormatError(f"not a metric: {text!r}")


def _map_of(metric: MetricSpec) -> MapSpec:
    return metric.map if metric.kind == "derived" else MapSpec.identity()


def _codes(metric: MetricSpec) -> tuple[MetricSpec, int, float, int]:
    """(base metric, base code, exponent, horizon) with base horizon 0."""
    if metric.kind == "derived":
        base = metric.base
        return base, _BASE_CODES[base.kind], base.s or 0.0, metric.horizon
    return metric, _BASE_CODES[metric.kind], metric.s or 0.0, 0


def required_bits(metric: MetricSpec, extra_steps: int = 0) -> int:
    """Point width needed to evaluate the metric (plus extra map steps)."""
    spec = _map_of(metric)
    _, _, _, horizon = _codes(metric)
    return systems.required_bits(spec, horizon + extra_steps)


def distance_batch(metric: MetricSpec, xs: list[int], ys: list[int],
                   precision_bits: int) -> np.ndarray:
    """Metric distances between raw numerators at a common width."""
    spec = _map_of(metric)
    code, r, alpha = systems.map_codes(spec, precision_bits)
    _, base_code, s, horizon = _codes(metric)
    return backends.derived_max_batch(code, r, alpha, base_code, s, xs, ys,
                                      precision_bits, horizon, DERIVED_CAP)


def distance(metric: MetricSpec, x: ExactPoint, y: ExactPoint) -> float:
    """The metric distance between two exact points.

    Raises PrecisionExhaustedError when a derived metric's horizon outruns
    the width of the points.
    """
    bits = max(x.precision_bits, y.precision_bits, required_bits(metric))
    spec = _map_of(metric)
    _, _, _, horizon = _codes(metric)
    avail = max(x.precision_bits, y.precision_bits)
    if systems.bits_per_step(spec) and avail < systems.required_bits(spec, horizon):
        raise PrecisionExhaustedError(
            f"metric horizon {horizon} needs "
            f"{systems.required_bits(spec, horizon)} bits, points carry {avail}")
    xs = [x.with_precision(bits).numerator]
    ys = [y.with_precision(bits).numerator]
    return float(distance_batch(metric, xs, ys, bits)[0])


@dataclass(frozen=True)
class MeasureEstimate:
    """A measured or computed Lebesgue measure with a 3-sigma half-width."""

    value: float
    half_width: float
    samples: int
    method: str

    @classmethod
    def analytic(cls, value: float) -> "MeasureEstimate":
        return cls(value=float(value), half_width=0.0, samples=0,
                   method="analytic")

    @classmethod
    def montecarlo(cls, hits: int, samples: int) -> "MeasureEstimate":
        if samples <= 0:
            raise ValueError("samples must be positive")
        v = hits / samples
        if hits in (0, samples):
            # rule-of-three surrogate where the binomial sigma degenerates
            hw = 3.0 / samples
        else:
            hw = 3.0 * math.sqrt(v * (1.0 - v) / samples)
        return cls(value=v, half_width=hw, samples=samples, method="montecarlo")

    @property
    def statistically_null(self) -> bool:
        """True when the estimate cannot exclude measure zero."""
        return self.value - self.half_width <= 0.0

    def to_record(self) -> dict:
        return {"value": self.value, "half_width": self.half_width,
                "samples": self.samples, "method": self.method}


@dataclass(frozen=True)
class Violation:
    axiom: str
    defect: float
    witness: tuple[str, ...]

    def to_record(self) -> dict:
        return {"axiom": self.axiom, "defect": self.defect,
                "witness": list(self.witness)}


@dataclass(frozen=True)
class AxiomReport:
    metric: str
    trials: int
    slack: float
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_record(self) -> dict:
        return {"metric": self.metric, "trials": self.trials,
                "slack": self.slack, "ok": self.ok,
                "violations": [v.to_record() for v in self.violations]}


def verify_metric_axioms(metric: MetricSpec, rng: Substream, trials: int = 1000,
                         slack: float = TRIANGLE_SLACK,
                         workers: int = 1) -> AxiomReport:
    """Check symmetry, identity of indiscernibles and the triangle inequality
    on sampled triples.

    Symmetry and d(x, x) = 0 must hold exactly; the triangle inequality is
    allowed the stated float slack.  Distinct grid points at distance 0 are
    reported as indiscernibility violations.
    """
    bits = required_bits(metric)
    xs_s, ys_s, zs_s = rng.child(0), rng.child(1), rng.child(2)
    violations: list[Violation] = []

    def chunk(start: int, count: int) -> list[Violation]:
        xs = xs_s.numerators(bits, start, count)
        ys = ys_s.numerators(bits, start, count)
        zs = zs_s.numerators(bits, start, count)
        dxy = distance_batch(metric, xs, ys, bits)
        dyx = distance_batch(metric, ys, xs, bits)
        dxz = distance_batch(metric, xs, zs, bits)
        dyz = distance_batch(metric, ys, zs, bits)
        dxx = distance_batch(metric, xs, xs, bits)
        found = []
        for i in range(count):
            wit = tuple(ExactPoint(n, bits).hex() for n in (xs[i], ys[i], zs[i]))
            if dxy[i] != dyx[i]:
                found.append(Violation("symmetry", abs(dxy[i] - dyx[i]), wit[:2]))
            if dxx[i] != 0.0:
                found.append(Violation("identity", dxx[i], wit[:1]))
            if xs[i] != ys[i] and dxy[i] == 0.0:
                found.append(Violation("indiscernible", 0.0, wit[:2]))
            excess = dxz[i] - (dxy[i] + dyz[i]) - slack
            if excess > 0.0:
                found.append(Violation("triangle", excess, wit))
        return found

    for part in run_chunked(chunk, trials, workers):
        violations.extend(part)
    return AxiomReport(metric=format_metric(metric), trials=trials,
                       slack=slack, violations=tuple(violations))


@dataclass(frozen=True)
class DefectReport:
    metric: str
    map: str
    comparison: str
    pairs: int
    max_defect: float
    witness: tuple[str, str]

    def to_record(self) -> dict:
        return {"metric": self.metric, "map": self.map,
                "comparison": self.comparison, "pairs": self.pairs,
                "max_defect": self.max_defect, "witness": list(self.witness)}


def _check_same_map(metric: MetricSpec, spec: MapSpec) -> None:
    if metric.kind == "derived" and metric.map != spec:
        raise MapMismatchError(
            f"metric is derived from {systems.format_map(metric.map)}, "
            f"not {systems.format_map(spec)}")


def _defect_scan(metric: MetricSpec, spec: MapSpec, rng: Substream, pairs: int,
                 workers: int, absolute: bool) -> tuple[float, tuple[str, str], str]:
    _check_same_map(metric, spec)
    bits = max(required_bits(metric, extra_steps=1),
               systems.required_bits(spec, 1))
    code, r, alpha = systems.map_codes(spec, bits)
    xs_s, ys_s = rng.child(0), rng.child(1)
    shifted = (metric.kind == "derived")
    comparison = "horizon-shift" if shifted and not absolute else "one-step"

    def chunk(start: int, count: int):
        xs = xs_s.numerators(bits, start, count)
        ys = ys_s.numerators(bits, start, count)
        txs = backends.map_batch(code, r, alpha, xs, bits, 1)
        tys = backends.map_batch(code, r, alpha, ys, bits, 1)
        after = distance_batch(metric, txs, tys, bits)
        if shifted and not absolute:
            # compare d_N(Tx, Ty) against d_{N+1}(x, y)
            wider = MetricSpec.derived(metric.base, spec, metric.horizon + 1)
            before = distance_batch(wider, xs, ys, bits)
        else:
            before = distance_batch(metric, xs, ys, bits)
        defect = np.abs(after - before) if absolute else after - before
        i = int(np.argmax(defect))
        wit = (ExactPoint(xs[i], bits).hex(), ExactPoint(ys[i], bits).hex())
        return float(defect[i]), wit

    parts = run_chunked(chunk, pairs, workers)
    best, witness = parts[0]
    for d, w in parts[1:]:
        if d > best:
            best, witness = d, w
    return best, witness, comparison


def lipschitz_defect(metric: MetricSpec, spec: MapSpec, rng: Substream,
                     pairs: int = 1000, workers: int = 1) -> DefectReport:
    """Largest sampled violation of "the map does not expand the metric".

    For a base metric this is max d(Tx, Ty) - d(x, y).  For a derived metric
    the honest comparison shifts the horizon: its distance at horizon N after
    one step is measured against horizon N+1 before the step, which the
    derived construction must never exceed.  Nonpositive means no violation.
    """
    best, witness, comparison = _defect_scan(metric, spec, rng, pairs,
                                             workers, absolute=False)
    return DefectReport(metric=format_metric(metric),
                        map=systems.format_map(spec), comparison=comparison,
                        pairs=pairs, max_defect=best, witness=witness)


def isometry_defect(metric: MetricSpec, spec: MapSpec, rng: Substream,
                    pairs: int = 1000, workers: int = 1) -> DefectReport:
    """Largest sampled |d(Tx, Ty) - d(x, y)|; zero for a true isometry."""
    best, witness, comparison = _defect_scan(metric, spec, rng, pairs,
                                             workers, absolute=True)
    return DefectReport(metric=format_metric(metric),
                        map=systems.format_map(spec),
                        comparison="absolute-" + comparison,
                        pairs=pairs, max_defect=best, witness=witness)


def _analytic_ball(metric: MetricSpec, center: ExactPoint,
                   radius: float) -> float | None:
    c = center.to_float()
    if metric.kind == "circle":
        return min(2.0 * radius, 1.0)
    if metric.kind == "euclidean":
        return min(c + radius, 1.0) - max(c - radius, 0.0)
    if metric.kind == "power":
        reach = radius ** (1.0 / metric.s)
        return min(c + reach, 1.0) - max(c - reach, 0.0)
    return None


def ball_measure(metric: MetricSpec, center: ExactPoint, radius: float,
                 rng: Substream, samples: int = 4000, force_mc: bool = False,
                 workers: int = 1) -> MeasureEstimate:
    """Lebesgue measure of the open ball around ``center``.

    Base metrics have closed-form ball lengths (half-width 0); derived
    metrics are sampled.  ``force_mc`` samples even when a closed form
    exists, which the uniformity checks use to stay honest.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    if not force_mc:
        value = _analytic_ball(metric, center, radius)
        if value is not None:
            return MeasureEstimate.analytic(value)
    bits = max(required_bits(metric), center.precision_bits)
    spec = _map_of(metric)
    code, r, alpha = systems.map_codes(spec, bits)
    _, base_code, s, horizon = _codes(metric)
    cnum = center.with_precision(bits).numerator
    ys_s = rng.child(0)

    def chunk(start: int, count: int) -> int:
        ys = ys_s.numerators(bits, start, count)
        # y is inside the open ball iff no iterate reaches distance >= radius
        fe = backends.first_exceed_batch(code, r, alpha, base_code, s,
                                         [cnum] * count, ys, bits, horizon,
                                         radius, strict=False)
        return int(np.count_nonzero(fe < 0))

    hits = sum(run_chunked(chunk, samples, workers))
    return MeasureEstimate.montecarlo(hits, samples)


@dataclass(frozen=True)
class FlaggedBall:
    center: str
    radius: float
    estimate: MeasureEstimate

    def to_record(self) -> dict:
        return {"center": self.center, "radius": self.radius,
                "estimate": self.estimate.to_record()}


@dataclass(frozen=True)
class ScanReport:
    metric: str
    radii: tuple[float, ...]
    centers: tuple[str, ...]
    samples: int
    balls: tuple[FlaggedBall, ...]
    min_ball: FlaggedBall
    flagged: tuple[FlaggedBall, ...]
    verdict: str

    def to_record(self) -> dict:
        return {"metric": self.metric, "radii": list(self.radii),
                "centers": list(self.centers), "samples": self.samples,
                "balls": [b.to_record() for b in self.balls],
                "min_ball": self.min_ball.to_record(),
                "flagged": [f.to_record() for f in self.flagged],
                "verdict": self.verdict}


def adversarial_centers(bits: int) -> list[ExactPoint]:
    """Fixed low-complexity centers that tend to expose degenerate balls."""
    return [ExactPoint(0, bits),
            ExactPoint(1 << (bits - 1), bits),
            ExactPoint(1 << (bits - 2), bits)]


def mu_compatibility_scan(metric: MetricSpec, radii, rng: Substream,
                          centers: int = 8, samples: int = 4000,
                          include_adversarial: bool = True,
                          workers: int = 1) -> ScanReport:
    """Estimate ball measures over a radius grid and flag the null ones.

    A metric compatible with Lebesgue measure gives every nonempty open ball
    positive measure; a ball whose estimate minus its half-width reaches 0 is
    flagged.  Verdict is "flagged" when any ball is, else "compatible".
    """
    radii = tuple(float(r) for r in radii)
    if not radii or any(r <= 0.0 for r in radii):
        raise ValueError("radii must be positive")
    bits = required_bits(metric)
    pts: list[ExactPoint] = []
    if include_adversarial:
        pts.extend(adversarial_centers(bits))
    pts.extend(systems.sample_points(rng.child(0), bits, 0, centers))
    balls: list[FlaggedBall] = []
    flagged: list[FlaggedBall] = []
    min_ball: FlaggedBall | None = None
    for ci, center in enumerate(pts):
        for ri, radius in enumerate(radii):
            est = ball_measure(metric, center, radius, rng.child(1, ci, ri),
                               samples=samples, workers=workers)
            ball = FlaggedBall(center.hex(), radius, est)
            balls.append(ball)
            if min_ball is None or est.value < min_ball.estimate.value:
                min_ball = ball
            if est.statistically_null:
                flagged.append(ball)
    verdict = "flagged" if flagged else "compatible"
    return ScanReport(metric=format_metric(metric), radii=radii,
                      centers=tuple(p.hex() for p in pts), samples=samples,
                      balls=tuple(balls), min_ball=min_ball,
                      flagged=tuple(flagged), verdict=verdict)
