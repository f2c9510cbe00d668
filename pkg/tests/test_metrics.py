"""Metric specs, distances, axiom checks, defects and ball measures."""

import math

import pytest

from sensilab import (ExactPoint, MapMismatchError, MapSpec, MeasureEstimate,
                      MetricSpec, PrecisionExhaustedError, SpecFormatError,
                      Substream, ball_measure, distance, format_metric,
                      isometry_defect, lipschitz_defect, mu_compatibility_scan,
                      parse_map, parse_metric, verify_metric_axioms)
from sensilab.metrics import adversarial_centers, required_bits

E = MetricSpec.euclidean()
C = MetricSpec.circle()
DOUBLING = MapSpec.radic(2)
GOLDEN = parse_map("rotation:golden")


# ------------------------------------------------------------------- specs

def test_spec_validation():
    with pytest.raises(ValueError):
        MetricSpec.power(0.0)
    with pytest.raises(ValueError):
        MetricSpec.power(1.5)
    MetricSpec.power(1.0)
    with pytest.raises(ValueError):
        MetricSpec("euclidean", s=0.5)
    with pytest.raises(SpecFormatError):
        MetricSpec("hamming")
    with pytest.raises(ValueError):
        MetricSpec.derived(E, DOUBLING, -1)
    derived = MetricSpec.derived(E, DOUBLING, 50)
    with pytest.raises(ValueError):
        MetricSpec.derived(derived, DOUBLING, 10)   # no nesting


def test_parse_format_roundtrip():
    texts = ["euclidean", "circle", "power:0.5",
             "derived(euclidean; radic:2; N=50)",
             "derived(circle; rotation:golden; N=60)"]
    for text in texts:
        metric = parse_metric(text)
        assert parse_metric(format_metric(metric)) == metric
    assert format_metric(parse_metric("power:0.5")) == "power:0.5"
    for bad in ("manhattan", "power:x", "derived(euclidean; radic:2)",
                "derived(euclidean; radic:2; N=x)",
                "derived(derived(euclidean; tent; N=1); tent; N=1)"):
        with pytest.raises(SpecFormatError):
            parse_metric(bad)


def test_required_bits_includes_horizon():
    assert required_bits(E) == 64
    assert required_bits(MetricSpec.derived(E, DOUBLING, 100)) == 164
    assert required_bits(MetricSpec.derived(E, DOUBLING, 100), 2) == 166


# --------------------------------------------------------------- distances

def test_exact_distances():
    a = ExactPoint.from_fraction(1, 4, 128)
    b = ExactPoint.from_fraction(3, 4, 128)
    c = ExactPoint.from_fraction(1, 8, 128)
    d = ExactPoint.from_fraction(7, 8, 128)
    assert distance(E, a, b) == 0.5
    assert distance(C, a, b) == 0.5
    assert distance(C, c, d) == 0.25
    assert distance(MetricSpec.power(0.5), a, b) == math.pow(0.5, 0.5)
    assert distance(E, a, a) == 0.0


def test_derived_distance_hand_case():
    # orbits of 1/8 and 3/8 under doubling: gaps 1/4, 1/2, 1/4, ...
    D = MetricSpec.derived(E, DOUBLING, 2)
    x = ExactPoint.from_fraction(1, 8, 128)
    y = ExactPoint.from_fraction(3, 8, 128)
    assert distance(D, x, y) == 0.5
    assert distance(MetricSpec.derived(E, DOUBLING, 0), x, y) == 0.25


def test_derived_distance_needs_bits():
    D = MetricSpec.derived(E, DOUBLING, 100)
    x = ExactPoint.from_fraction(1, 8, 80)
    y = ExactPoint.from_fraction(3, 8, 80)
    with pytest.raises(PrecisionExhaustedError):
        distance(D, x, y)


# ------------------------------------------------------------------ axioms

@pytest.mark.parametrize("text", ["power:0.5",
                                  "derived(euclidean; radic:2; N=20)"])
def test_axioms_hold_at_default_slack(text):
    report = verify_metric_axioms(parse_metric(text), Substream(2), trials=300)
    assert report.ok
    assert report.violations == ()
    assert report.trials == 300
    rec = report.to_record()
    assert rec["ok"] is True and rec["metric"] == text


@pytest.mark.parametrize("text", ["euclidean", "circle"])
def test_base_axioms_hold_at_float_slack(text):
    # collinear triples make |x-z| = |x-y| + |y-z| exact in rationals, so
    # the 53-bit truncation leaves ulp-scale triangle defects; one ulp of a
    # unit-scale distance is 2^-53, hence the slack here
    metric = parse_metric(text)
    assert verify_metric_axioms(metric, Substream(2), trials=300,
                                slack=2.0 ** -50).ok
    tight = verify_metric_axioms(metric, Substream(2), trials=300)
    assert not tight.ok
    assert {v.axiom for v in tight.violations} == {"triangle"}
    assert max(v.defect for v in tight.violations) < 2.0 ** -50


def test_axioms_worker_invariant():
    a = verify_metric_axioms(E, Substream(3), trials=257, workers=1)
    b = verify_metric_axioms(E, Substream(3), trials=257, workers=4)
    assert a == b


# --------------------------------------------------------------- estimates

def test_measure_estimate_stats():
    est = MeasureEstimate.montecarlo(970, 1000)
    assert est.value == 0.97
    assert est.half_width == 3.0 * math.sqrt(0.97 * (1.0 - 0.97) / 1000)
    assert not est.statistically_null
    zero = MeasureEstimate.montecarlo(0, 1000)
    assert zero.half_width == 3.0 / 1000   # rule-of-three fallback
    assert zero.statistically_null
    full = MeasureEstimate.montecarlo(1000, 1000)
    assert full.half_width == 3.0 / 1000
    tiny = MeasureEstimate.montecarlo(1, 1000)
    assert tiny.statistically_null        # one hit cannot exclude zero
    assert MeasureEstimate.analytic(0.4).half_width == 0.0
    with pytest.raises(ValueError):
        MeasureEstimate.montecarlo(1, 0)


def test_ball_measure_analytic():
    c = ExactPoint.from_float(0.1, 128)
    mid = ExactPoint.from_float(0.5, 128)
    assert ball_measure(E, c, 0.3, Substream(1)).value == 0.4
    assert ball_measure(E, mid, 0.7, Substream(1)).value == 1.0
    assert ball_measure(C, c, 0.3, Substream(1)).value == 0.6
    assert ball_measure(C, c, 0.6, Substream(1)).value == 1.0
    p = ball_measure(MetricSpec.power(0.5), mid, 0.5, Substream(1))
    assert p.value == 0.5                  # euclidean reach 0.25 each side
    assert p.method == "analytic" and p.half_width == 0.0
    with pytest.raises(ValueError):
        ball_measure(E, c, 0.0, Substream(1))


def test_ball_measure_mc_agrees_with_analytic():
    c = ExactPoint.from_float(0.1, 128)
    mc = ball_measure(E, c, 0.3, Substream(5), samples=4000, force_mc=True)
    assert mc.method == "montecarlo"
    assert abs(mc.value - 0.4) <= mc.half_width
    w1 = ball_measure(E, c, 0.3, Substream(5), samples=4000, force_mc=True,
                      workers=3)
    assert w1 == mc                        # worker count never shifts draws


def test_derived_ball_at_zero_is_null():
    D = MetricSpec.derived(E, DOUBLING, 60)
    est = ball_measure(D, ExactPoint.zero(128), 0.5, Substream(4),
                       samples=1500)
    assert est.method == "montecarlo"
    assert est.value == 0.0


# ----------------------------------------------------------------- defects

def test_lipschitz_defect_signs():
    base = lipschitz_defect(E, DOUBLING, Substream(6), pairs=400)
    assert base.comparison == "one-step"
    assert base.max_defect > 0.3           # doubling expands the base metric
    derived = MetricSpec.derived(E, DOUBLING, 30)
    shifted = lipschitz_defect(derived, DOUBLING, Substream(6), pairs=400)
    assert shifted.comparison == "horizon-shift"
    assert shifted.max_defect <= 0.0       # subset maximum, exactly
    rot = lipschitz_defect(C, GOLDEN, Substream(6), pairs=400)
    assert rot.max_defect == 0.0


def test_isometry_defect_values():
    rot_derived = MetricSpec.derived(C, GOLDEN, 40)
    iso = isometry_defect(rot_derived, GOLDEN, Substream(7), pairs=300)
    assert iso.comparison == "absolute-one-step"
    assert iso.max_defect == 0.0
    bad = isometry_defect(E, DOUBLING, Substream(7), pairs=300)
    assert bad.max_defect > 0.3
    assert len(bad.witness) == 2 and bad.witness[0].startswith("0x")


def test_map_mismatch_rejected():
    derived = MetricSpec.derived(E, DOUBLING, 30)
    with pytest.raises(MapMismatchError):
        isometry_defect(derived, MapSpec.tent(), Substream(1), pairs=10)
    with pytest.raises(MapMismatchError):
        lipschitz_defect(derived, GOLDEN, Substream(1), pairs=10)


# -------------------------------------------------------------------- scan

def test_adversarial_centers():
    pts = adversarial_centers(128)
    assert [p.to_float() for p in pts] == [0.0, 0.5, 0.25]


def test_scan_flags_derived_doubling():
    D = MetricSpec.derived(E, DOUBLING, 60)
    rep = mu_compatibility_scan(D, (0.1, 0.4), Substream(9), centers=2,
                                samples=600)
    assert rep.verdict == "flagged"
    assert len(rep.balls) == 10            # (3 adversarial + 2) x 2 radii
    assert rep.flagged                     # at least the ball at 0
    assert rep.min_ball.estimate.value == min(
        b.estimate.value for b in rep.balls)
    zero_hex = ExactPoint.zero(required_bits(D)).hex()
    assert any(b.center == zero_hex for b in rep.flagged)


def test_scan_passes_circle():
    rep = mu_compatibility_scan(C, (0.1, 0.4), Substream(9), centers=2,
                                samples=600)
    assert rep.verdict == "compatible"
    assert rep.flagged == ()
    assert rep.min_ball.estimate.value == 0.2
    assert rep.min_ball.estimate.method == "analytic"
    with pytest.raises(ValueError):
        mu_compatibility_scan(C, (), Substream(9))
    with pytest.raises(ValueError):
        mu_compatibility_scan(C, (0.0, 0.1), Substream(9))
