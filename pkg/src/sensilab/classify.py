"""Two-sided classification: sensitive versus isometry-like.

For an ergodic measure-preserving map and a measure-compatible base metric,
orbit behavior falls on one of two sides: either orbits separate past a
uniform constant from almost everywhere (sensitivity), or the derived orbit
metric behaves like an invariant metric, preserving distances and giving
equal-radius balls equal measure (the signature of a rigid factor).  The
classifier gathers finite-sample evidence for both sides and names a verdict
only when exactly one side holds; anything mixed, degenerate or mutually
contradictory comes back inconclusive with the failing pieces named.

Verdicts are per (map, base metric) pair: the same map can be sensitive for
one compatible metric and rigid for another.  Ergodicity is an assumption the
caller owns; the identity map is the shipped non-ergodic control and always
carries a warning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import metrics, sensitivity, systems
from .metrics import MeasureEstimate, MetricSpec
from .sensitivity import _require_base
from .streams import Substream
from .systems import ExactPoint, MapSpec


@dataclass(frozen=True)
class CenterBall:
    center: str
    estimate: MeasureEstimate

    def to_record(self) -> dict:
        return {"center": self.center, "estimate": self.estimate.to_record()}


@dataclass(frozen=True)
class UniformityReport:
    """Ball-measure spread across centers at one radius.

    An invariant metric compatible with the measure gives every radius-r ball
    the same, positive measure.  The check fails when the spread between the
    largest and smallest estimate exceeds their combined half-widths, or when
    any ball is statistically null (a degenerate metric can trivially have
    equal, zero measures).
    """

    map: str
    metric: str
    radius: float
    samples: int
    balls: tuple[CenterBall, ...]
    max_spread: float
    tolerance: float
    degenerate: bool
    lipschitz_warning: bool
    within_tolerance: bool

    def to_record(self) -> dict:
        return {"map": self.map, "metric": self.metric, "radius": self.radius,
                "samples": self.samples,
                "balls": [b.to_record() for b in self.balls],
                "max_spread": self.max_spread, "tolerance": self.tolerance,
                "degenerate": self.degenerate,
                "lipschitz_warning": self.lipschitz_warning,
                "within_tolerance": self.within_tolerance}


def ball_uniformity_check(spec: MapSpec, metric: MetricSpec, radius: float,
                          rng: Substream, centers=12, samples: int = 4000,
                          workers: int = 1,
                          lipschitz_pairs: int = 256) -> UniformityReport:
    """Monte Carlo ball measures at sampled centers, compared for equality.

    ``centers`` is a count of sampled centers or an explicit point sequence.
    The metric is first spot-checked for one-step non-expansion under the
    map; a positive defect only sets a warning flag, since the equal-measure
    property is worth measuring even for metrics that fail it.
    """
    lip = metrics.lipschitz_defect(metric, spec, rng.child(0),
                                   pairs=lipschitz_pairs, workers=workers)
    warning = lip.max_defect > 0.0
    bits = metrics.required_bits(metric)
    if isinstance(centers, int):
        pts = systems.sample_points(rng.child(1), bits, 0, centers)
    else:
        pts = list(centers)
    balls = []
    for ci, center in enumerate(pts):
        est = metrics.ball_measure(metric, center, radius, rng.child(2, ci),
                                   samples=samples, force_mc=True,
                                   workers=workers)
        balls.append(CenterBall(center.hex(), est))
    lo = min(balls, key=lambda b: b.estimate.value)
    hi = max(balls, key=lambda b: b.estimate.value)
    spread = hi.estimate.value - lo.estimate.value
    tol = hi.estimate.half_width + lo.estimate.half_width
    degenerate = any(b.estimate.statistically_null for b in balls)
    return UniformityReport(
        map=systems.format_map(spec), metric=metrics.format_metric(metric),
        radius=radius, samples=samples, balls=tuple(balls), max_spread=spread,
        tolerance=tol, degenerate=degenerate, lipschitz_warning=warning,
        within_tolerance=spread <= tol and not degenerate)


@dataclass(frozen=True)
class DichotomyConfig:
    """Budgets and thresholds for dichotomy_classify."""

    delta_grid: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5,
                                     0.6, 0.7, 0.8, 0.9)
    horizon: int = 200
    threshold: float = 0.99
    search_centers: int = 10
    search_partners: int = 200
    trapped_centers: int = 3
    trapped_samples: int = 10000
    # trapped measures decay with depth; checking them deeper than the
    # search tightens the upper bound on the true trapped set for free
    # (None means twice the search horizon)
    trapped_horizon: int | None = None
    defect_pairs: int = 1000
    uniformity_centers: int = 12
    uniformity_samples: int = 4000
    uniformity_radius: float = 0.1
    isometry_tolerance: float = 2.0 ** -40
    full_evidence: bool = True
    workers: int = 1

    @property
    def resolved_trapped_horizon(self) -> int:
        if self.trapped_horizon is not None:
            return self.trapped_horizon
        return 2 * self.horizon

    def to_record(self) -> dict:
        return {"delta_grid": list(self.delta_grid), "horizon": self.horizon,
                "threshold": self.threshold,
                "search_centers": self.search_centers,
                "search_partners": self.search_partners,
                "trapped_centers": self.trapped_centers,
                "trapped_samples": self.trapped_samples,
                "trapped_horizon": self.resolved_trapped_horizon,
                "defect_pairs": self.defect_pairs,
                "uniformity_centers": self.uniformity_centers,
                "uniformity_samples": self.uniformity_samples,
                "uniformity_radius": self.uniformity_radius,
                "isometry_tolerance": self.isometry_tolerance,
                "full_evidence": self.full_evidence}


@dataclass(frozen=True)
class Verdict:
    map: str
    metric: str
    label: str
    delta: float | None
    isometry_defect: float | None
    ball_uniformity_spread: float | None
    contradiction: bool
    warnings: tuple[str, ...]
    evidence: dict = field(compare=False)

    def to_record(self) -> dict:
        return {"map": self.map, "metric": self.metric, "label": self.label,
                "delta": self.delta, "isometry_defect": self.isometry_defect,
                "ball_uniformity_spread": self.ball_uniformity_spread,
                "contradiction": self.contradiction,
                "warnings": list(self.warnings), "evidence": self.evidence}


def dichotomy_classify(spec: MapSpec, metric: MetricSpec, rng: Substream,
                       config: DichotomyConfig = DichotomyConfig()) -> Verdict:
    """Weigh sensitivity evidence against isometry evidence and name a side.

    Runs the sensitivity constant search first (cheap for genuinely sensitive
    maps).  A qualifying delta must be backed by statistically null trapped
    sets at adversarial and sampled centers to yield "sensitive".  Without a
    qualifying delta, the derived metric at the configured horizon must both
    preserve distances within tolerance and pass the ball uniformity check to
    yield "isometry-like".  Every other combination, including evidence for
    both sides at once, is "inconclusive" with the reasons listed.
    """
    _require_base(metric)
    warnings: list[str] = []
    evidence: dict = {"config": config.to_record()}
    if spec.kind == "identity":
        warnings.append("identity map is not ergodic; "
                        "the dichotomy premise does not apply")

    search = sensitivity.sensitivity_constant_search(
        spec, metric, config.delta_grid, rng.child(0),
        threshold=config.threshold, centers=config.search_centers,
        partners=config.search_partners, horizon=config.horizon,
        workers=config.workers)
    evidence["search"] = search.to_record()
    qualifies = search.qualifying_delta is not None

    trapped_ok = False
    if qualifies:
        delta = search.qualifying_delta
        depth = config.resolved_trapped_horizon
        bits = systems.required_bits(spec, depth)
        pts = metrics.adversarial_centers(bits)
        pts += systems.sample_points(rng.child(1), bits, 0,
                                     config.trapped_centers)
        trapped = []
        for ci, center in enumerate(pts):
            est = sensitivity.trapped_set_measure(
                spec, metric, center, delta, depth, rng.child(2, ci),
                samples=config.trapped_samples, workers=config.workers)
            trapped.append(sensitivity.TrappedAtCenter(center.hex(), est))
        evidence["trapped"] = [t.to_record() for t in trapped]
        bad = [t for t in trapped if not t.estimate.statistically_null]
        trapped_ok = not bad
        if bad:
            warnings.append(f"trapped set not statistically null at "
                            f"{len(bad)} of {len(trapped)} centers")
    sensitive_ok = qualifies and trapped_ok

    iso_defect = None
    spread = None
    isometry_ok = None
    if config.full_evidence or not qualifies:
        derived = MetricSpec.derived(metric, spec, config.horizon)
        iso = metrics.isometry_defect(derived, spec, rng.child(3),
                                      pairs=config.defect_pairs,
                                      workers=config.workers)
        uni = ball_uniformity_check(spec, derived, config.uniformity_radius,
                                    rng.child(4),
                                    centers=config.uniformity_centers,
                                    samples=config.uniformity_samples,
                                    workers=config.workers)
        evidence["isometry"] = iso.to_record()
        evidence["uniformity"] = uni.to_record()
        iso_defect = iso.max_defect
        spread = uni.max_spread
        iso_ok = iso.max_defect <= config.isometry_tolerance
        isometry_ok = iso_ok and uni.within_tolerance
        if not qualifies:
            # this side is load-bearing; say exactly what failed
            if not iso_ok:
                warnings.append("distance preservation fails: defect "
                                f"{iso.max_defect:.3g} above tolerance")
            if not uni.within_tolerance:
                reason = ("degenerate balls" if uni.degenerate else
                          "spread above combined half-widths")
                warnings.append(f"ball uniformity fails: {reason}")

    contradiction = bool(sensitive_ok and isometry_ok)
    if contradiction:
        label = "inconclusive"
        warnings.append("evidence supports both sides; "
                        "mutually exclusive by assumption")
    elif sensitive_ok:
        label = "sensitive"
    elif not qualifies and isometry_ok:
        label = "isometry-like"
    else:
        label = "inconclusive"
        if qualifies and not trapped_ok:
            warnings.append("sensitivity search qualified but trapped "
                            "evidence failed")

    return Verdict(
        map=systems.format_map(spec), metric=metrics.format_metric(metric),
        label=label, delta=search.qualifying_delta if sensitive_ok else None,
        isometry_defect=iso_defect, ball_uniformity_spread=spread,
        contradiction=contradiction, warnings=tuple(warnings),
        evidence=evidence)
