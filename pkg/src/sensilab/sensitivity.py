"""Finite-sample estimators for orbit-separation sensitivity.

The property probed here: a map is sensitive at level delta when, from every
start point, almost every partner point has an orbit that at some time moves
at least delta away in the base metric.  The estimators reduce "some time" to
"some time within a horizon N" and "almost every" to a sampled fraction with
a 3-sigma half-width, and they always report the horizon alongside the
fraction; the horizon profile in each report shows how the measured fraction
grows with N, so the finite-horizon gap is visible instead of hidden.

Two sampling modes exist.  The per-center mode fixes sampled start points
(plus a few adversarial ones) and samples partners for each; the pairwise
mode samples both ends of every pair.  For measure-preserving maps the two
agree within noise, and equivalence_check measures exactly that gap.

All estimators take a base metric; the orbit maximum is what they compute, so
passing an already-derived metric would nest horizons and is rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backends, metrics, systems
from ._parallel import run_chunked
from .errors import PrecisionExhaustedError
from .metrics import MeasureEstimate, MetricSpec
from .streams import Substream
from .systems import ExactPoint, MapSpec


def _require_base(metric: MetricSpec) -> None:
    if not metric.is_base:
        raise ValueError("sensitivity estimators take a base metric; "
                         "the horizon is a separate argument")


def _kernel_args(spec: MapSpec, metric: MetricSpec, horizon: int,
                 *points: ExactPoint) -> tuple[int, tuple]:
    bits = systems.required_bits(spec, horizon)
    for p in points:
        bits = max(bits, p.precision_bits)
    code, r, alpha = systems.map_codes(spec, bits)
    base, base_code, s, _ = metrics._codes(metric)
    return bits, (code, r, alpha, base_code, s)


def separation_time(spec: MapSpec, metric: MetricSpec, x: ExactPoint,
                    y: ExactPoint, delta: float, horizon: int) -> int | None:
    """Least n <= horizon with d(T^n x, T^n y) > delta, or None.

    Raises PrecisionExhaustedError when the points are too narrow for the
    horizon under an expanding map.
    """
    _require_base(metric)
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    avail = max(x.precision_bits, y.precision_bits)
    if systems.bits_per_step(spec) and avail < systems.required_bits(spec, horizon):
        raise PrecisionExhaustedError(
            f"separation to depth {horizon} needs "
            f"{systems.required_bits(spec, horizon)} bits, points carry {avail}")
    bits, (code, r, alpha, base_code, s) = _kernel_args(spec, metric, horizon, x, y)
    fe = backends.first_exceed_batch(
        code, r, alpha, base_code, s,
        [x.with_precision(bits).numerator], [y.with_precision(bits).numerator],
        bits, horizon, delta, strict=True)
    return None if fe[0] < 0 else int(fe[0])


def _checkpoints(horizon: int) -> tuple[int, ...]:
    raw = {math.ceil(horizon / 4), math.ceil(horizon / 2),
           math.ceil(3 * horizon / 4), horizon}
    return tuple(sorted(raw))


@dataclass(frozen=True)
class CenterFraction:
    center: str
    fraction: float
    separated: int
    partners: int

    def to_record(self) -> dict:
        return {"center": self.center, "fraction": self.fraction,
                "separated": self.separated, "partners": self.partners}


@dataclass(frozen=True)
class TrappedAtCenter:
    center: str
    estimate: MeasureEstimate

    def to_record(self) -> dict:
        return {"center": self.center, "estimate": self.estimate.to_record()}


@dataclass(frozen=True)
class LimsupSpot:
    """Separation checked independently in an early and a late time window.

    Sensitivity in the limsup sense needs separations to recur, not happen
    once; a high both_fraction is evidence the one-hit reduction is sound for
    the system at hand.
    """

    pairs: int
    early_window: tuple[int, int]
    late_window: tuple[int, int]
    early_fraction: float
    late_fraction: float
    both_fraction: float

    def to_record(self) -> dict:
        return {"pairs": self.pairs,
                "early_window": list(self.early_window),
                "late_window": list(self.late_window),
                "early_fraction": self.early_fraction,
                "late_fraction": self.late_fraction,
                "both_fraction": self.both_fraction}


@dataclass(frozen=True)
class SensitivityReport:
    map: str
    metric: str
    mode: str
    delta: float
    horizon: int
    separation_fraction: float
    half_width: float
    pairs_sampled: int
    per_center: tuple[CenterFraction, ...]
    trapped: tuple[TrappedAtCenter, ...]
    horizon_profile: tuple[tuple[int, float], ...]
    limsup_spot: LimsupSpot | None

    def to_record(self) -> dict:
        return {"map": self.map, "metric": self.metric, "mode": self.mode,
                "delta": self.delta, "horizon": self.horizon,
                "separation_fraction": self.separation_fraction,
                "half_width": self.half_width,
                "pairs_sampled": self.pairs_sampled,
                "per_center": [c.to_record() for c in self.per_center],
                "trapped": [t.to_record() for t in self.trapped],
                "horizon_profile": [[n, f] for n, f in self.horizon_profile],
                "limsup_spot":
                    self.limsup_spot.to_record() if self.limsup_spot else None}


def _fraction_stats(hits: int, total: int) -> tuple[float, float]:
    est = MeasureEstimate.montecarlo(hits, total)
    return est.value, est.half_width


def w_sensitivity_estimate(spec: MapSpec, metric: MetricSpec, delta: float,
                           rng: Substream, centers: int = 20,
                           partners: int = 500, horizon: int = 200,
                           include_adversarial: bool = True,
                           workers: int = 1,
                           spot_pairs: int = 128) -> SensitivityReport:
    """Per-center separation fractions at level delta, with trapped remainders.

    For each start point the fraction of sampled partners separating within
    the horizon is measured; the complement (orbits that never move past
    delta) is the trapped estimate for that center and must be statistically
    null for a sensitive map.  The two tallies are exact complements by
    construction.
    """
    _require_base(metric)
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    bits, (code, r, alpha, base_code, s) = _kernel_args(spec, metric, horizon)
    pts: list[ExactPoint] = []
    if include_adversarial:
        pts.extend(metrics.adversarial_centers(bits))
    pts.extend(systems.sample_points(rng.child(0), bits, 0, centers))
    marks = _checkpoints(horizon)

    def one_center(ci: int, _count: int):
        cnum = pts[ci].with_precision(bits).numerator
        ys = rng.child(1, ci).numerators(bits, 0, partners)
        fe = backends.first_exceed_batch(code, r, alpha, base_code, s,
                                         [cnum] * partners, ys, bits, horizon,
                                         delta, strict=True)
        sep = int(np.count_nonzero(fe >= 0))
        by_mark = [int(np.count_nonzero((fe >= 0) & (fe <= m))) for m in marks]
        return sep, by_mark

    parts = run_chunked(one_center, len(pts), workers, chunk=1)
    per_center = []
    trapped = []
    total_sep = 0
    mark_totals = [0] * len(marks)
    for center, (sep, by_mark) in zip(pts, parts):
        per_center.append(CenterFraction(center.hex(), sep / partners,
                                         sep, partners))
        trapped.append(TrappedAtCenter(
            center.hex(), MeasureEstimate.montecarlo(partners - sep, partners)))
        total_sep += sep
        for i, c in enumerate(by_mark):
            mark_totals[i] += c
    total = len(pts) * partners
    fraction, half_width = _fraction_stats(total_sep, total)
    profile = tuple((m, mark_totals[i] / total) for i, m in enumerate(marks))
    spot = (_limsup_spot(spec, metric, delta, rng.child(2), spot_pairs,
                         horizon, bits)
            if horizon >= 1 and spot_pairs > 0 else None)
    return SensitivityReport(
        map=systems.format_map(spec), metric=metrics.format_metric(metric),
        mode="per-center", delta=delta, horizon=horizon,
        separation_fraction=fraction, half_width=half_width,
        pairs_sampled=total, per_center=tuple(per_center),
        trapped=tuple(trapped), horizon_profile=profile, limsup_spot=spot)


def _limsup_spot(spec: MapSpec, metric: MetricSpec, delta: float,
                 rng: Substream, pairs: int, horizon: int,
                 bits: int) -> LimsupSpot:
    code, r, alpha = systems.map_codes(spec, bits)
    _, base_code, s, _ = metrics._codes(metric)
    split = horizon // 2
    xs = rng.child(0).numerators(bits, 0, pairs)
    ys = rng.child(1).numerators(bits, 0, pairs)
    early = backends.first_exceed_batch(code, r, alpha, base_code, s,
                                        xs, ys, bits, split, delta, True)
    lx = backends.map_batch(code, r, alpha, xs, bits, split + 1)
    ly = backends.map_batch(code, r, alpha, ys, bits, split + 1)
    late = backends.first_exceed_batch(code, r, alpha, base_code, s,
                                       lx, ly, bits, horizon - split - 1,
                                       delta, True)
    hit_early = early >= 0
    hit_late = late >= 0
    return LimsupSpot(
        pairs=pairs, early_window=(0, split), late_window=(split + 1, horizon),
        early_fraction=float(np.count_nonzero(hit_early)) / pairs,
        late_fraction=float(np.count_nonzero(hit_late)) / pairs,
        both_fraction=float(np.count_nonzero(hit_early & hit_late)) / pairs)


def trapped_set_measure(spec: MapSpec, metric: MetricSpec, x: ExactPoint,
                        delta: float, horizon: int, rng: Substream,
                        samples: int = 10000,
                        workers: int = 1) -> MeasureEstimate:
    """Measure of partners whose orbit never separates from x past delta.

    This is the measure of the radius-delta ball around x in the derived
    metric at the same horizon; for a sensitive map it must be statistically
    null at every center.
    """
    _require_base(metric)
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    bits, (code, r, alpha, base_code, s) = _kernel_args(spec, metric, horizon, x)
    cnum = x.with_precision(bits).numerator
    ys_s = rng.child(0)

    def chunk(start: int, count: int) -> int:
        ys = ys_s.numerators(bits, start, count)
        fe = backends.first_exceed_batch(code, r, alpha, base_code, s,
                                         [cnum] * count, ys, bits, horizon,
                                         delta, strict=True)
        return int(np.count_nonzero(fe < 0))

    hits = sum(run_chunked(chunk, samples, workers))
    return MeasureEstimate.montecarlo(hits, samples)


def pairwise_sensitivity_estimate(spec: MapSpec, metric: MetricSpec,
                                  delta: float, rng: Substream,
                                  pairs: int = 10000, horizon: int = 200,
                                  workers: int = 1) -> SensitivityReport:
    """Fraction of fully sampled pairs that reach distance >= delta in time.

    Both ends of every pair are drawn uniformly.  The crossing here is weak
    (>= delta) where the per-center mode uses strict; on sampled pairs the
    two differ only on exact ties, and the equivalence check quantifies the
    agreement empirically.
    """
    _require_base(metric)
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    bits, (code, r, alpha, base_code, s) = _kernel_args(spec, metric, horizon)
    xs_s, ys_s = rng.child(0), rng.child(1)
    marks = _checkpoints(horizon)

    def chunk(start: int, count: int):
        xs = xs_s.numerators(bits, start, count)
        ys = ys_s.numerators(bits, start, count)
        fe = backends.first_exceed_batch(code, r, alpha, base_code, s,
                                         xs, ys, bits, horizon, delta,
                                         strict=False)
        sep = int(np.count_nonzero(fe >= 0))
        by_mark = [int(np.count_nonzero((fe >= 0) & (fe <= m))) for m in marks]
        return sep, by_mark

    parts = run_chunked(chunk, pairs, workers)
    total_sep = sum(p[0] for p in parts)
    mark_totals = [sum(p[1][i] for p in parts) for i in range(len(marks))]
    fraction, half_width = _fraction_stats(total_sep, pairs)
    profile = tuple((m, mark_totals[i] / pairs) for i, m in enumerate(marks))
    return SensitivityReport(
        map=systems.format_map(spec), metric=metrics.format_metric(metric),
        mode="pairwise", delta=delta, horizon=horizon,
        separation_fraction=fraction, half_width=half_width,
        pairs_sampled=pairs, per_center=(), trapped=(),
        horizon_profile=profile, limsup_spot=None)


@dataclass(frozen=True)
class EquivalenceReport:
    map: str
    metric: str
    delta: float
    horizon: int
    budget: int
    per_center_fraction: float
    pairwise_fraction: float
    gap: float
    tolerance: float
    within_tolerance: bool

    def to_record(self) -> dict:
        return {"map": self.map, "metric": self.metric, "delta": self.delta,
                "horizon": self.horizon, "budget": self.budget,
                "per_center_fraction": self.per_center_fraction,
                "pairwise_fraction": self.pairwise_fraction,
                "gap": self.gap, "tolerance": self.tolerance,
                "within_tolerance": self.within_tolerance}


def equivalence_check(spec: MapSpec, metric: MetricSpec, delta: float,
                      rng: Substream, budget: int = 10000, horizon: int = 200,
                      centers: int = 20, workers: int = 1) -> EquivalenceReport:
    """Compare the per-center and pairwise estimates on matched budgets.

    Both modes get exactly ``centers * (budget // centers)`` orbit pairs;
    adversarial centers are left out so the sampling distributions match.
    The acceptance tolerance is the sum of the two 3-sigma half-widths.
    """
    partners = budget // centers
    if partners < 1:
        raise ValueError("budget too small for the center count")
    w = w_sensitivity_estimate(spec, metric, delta, rng.child(0),
                               centers=centers, partners=partners,
                               horizon=horizon, include_adversarial=False,
                               workers=workers, spot_pairs=0)
    pw = pairwise_sensitivity_estimate(spec, metric, delta, rng.child(1),
                                       pairs=centers * partners,
                                       horizon=horizon, workers=workers)
    gap = abs(w.separation_fraction - pw.separation_fraction)
    tol = w.half_width + pw.half_width
    return EquivalenceReport(
        map=systems.format_map(spec), metric=metrics.format_metric(metric),
        delta=delta, horizon=horizon, budget=centers * partners,
        per_center_fraction=w.separation_fraction,
        pairwise_fraction=pw.separation_fraction,
        gap=gap, tolerance=tol, within_tolerance=gap <= tol)


@dataclass(frozen=True)
class SearchRow:
    delta: float
    fraction: float
    half_width: float

    def to_record(self) -> dict:
        return {"delta": self.delta, "fraction": self.fraction,
                "half_width": self.half_width}


@dataclass(frozen=True)
class SearchReport:
    map: str
    metric: str
    threshold: float
    horizon: int
    pairs_per_delta: int
    rows: tuple[SearchRow, ...]
    qualifying_delta: float | None

    def to_record(self) -> dict:
        return {"map": self.map, "metric": self.metric,
                "threshold": self.threshold, "horizon": self.horizon,
                "pairs_per_delta": self.pairs_per_delta,
                "rows": [r.to_record() for r in self.rows],
                "qualifying_delta": self.qualifying_delta}


def sensitivity_constant_search(spec: MapSpec, metric: MetricSpec, delta_grid,
                                rng: Substream, threshold: float = 0.99,
                                centers: int = 10, partners: int = 200,
                                horizon: int = 200,
                                include_adversarial: bool = True,
                                workers: int = 1) -> SearchReport:
    """Largest delta on the grid whose separation fraction meets the threshold.

    Every delta is judged on the same orbit pairs: the orbit-maximum distance
    is computed once per pair and thresholded per delta.  The qualifying set
    is therefore an exact down-set of the grid (fractions can only fall as
    delta grows), and the search returns its largest element, or None when
    even the smallest delta fails.
    """
    _require_base(metric)
    grid = sorted(float(d) for d in delta_grid)
    if not grid or grid[0] <= 0.0:
        raise ValueError("delta grid must be positive")
    bits, (code, r, alpha, base_code, s) = _kernel_args(spec, metric, horizon)
    pts: list[ExactPoint] = []
    if include_adversarial:
        pts.extend(metrics.adversarial_centers(bits))
    pts.extend(systems.sample_points(rng.child(0), bits, 0, centers))

    def one_center(ci: int, _count: int) -> np.ndarray:
        cnum = pts[ci].with_precision(bits).numerator
        ys = rng.child(1, ci).numerators(bits, 0, partners)
        return backends.derived_max_batch(code, r, alpha, base_code, s,
                                          [cnum] * partners, ys, bits,
                                          horizon, metrics.DERIVED_CAP)

    maxima = np.concatenate(run_chunked(one_center, len(pts), workers, chunk=1))
    total = maxima.size
    rows = []
    qualifying = None
    for delta in grid:
        hits = int(np.count_nonzero(maxima > delta))
        fraction, hw = _fraction_stats(hits, total)
        rows.append(SearchRow(delta=delta, fraction=fraction, half_width=hw))
        if fraction >= threshold:
            qualifying = delta
    return SearchReport(
        map=systems.format_map(spec), metric=metrics.format_metric(metric),
        threshold=threshold, horizon=horizon, pairs_per_delta=total,
        rows=tuple(rows), qualifying_delta=qualifying)
