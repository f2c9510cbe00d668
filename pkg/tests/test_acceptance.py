"""Acceptance suite: eleven numbered criteria, each with pinned tolerances.

Every test ends in a single ``check(...)`` call that records one pass/fail
line for the terminal summary and asserts the criterion.  All randomness is
seeded, so each criterion is a deterministic, reproducible computation; the
analytic or enumerated oracles are stated next to the assertions they back.
"""

import time

import numpy as np

from conftest import check
from sensilab import (DichotomyConfig, ExactPoint, MapSpec, MetricSpec,
                      Substream, ball_measure, ball_uniformity_check,
                      dichotomy_classify, equivalence_check, irrational_angles,
                      mu_compatibility_scan, parse_map,
                      sensitivity_constant_search, trapped_set_measure,
                      verify_metric_axioms, w_sensitivity_estimate)
from sensilab import backends, systems
from sensilab.metrics import distance_batch

EUCLID = MetricSpec.euclidean()
CIRCLE = MetricSpec.circle()
DOUBLING = MapSpec.radic(2)
GOLDEN = parse_map("rotation:golden")
SHIPPED = ("radic:2", "radic:3", "tent", "rotation:golden", "identity")


def _pairs(rng, bits, count):
    return (rng.child(0).numerators(bits, 0, count),
            rng.child(1).numerators(bits, 0, count))


def test_criterion_01_metric_axioms():
    t0 = time.perf_counter()
    metric = MetricSpec.derived(EUCLID, DOUBLING, 50)
    report = verify_metric_axioms(metric, Substream(1001), trials=1000)
    elapsed = time.perf_counter() - t0
    ok = report.ok and report.slack == 2.0 ** -60 and elapsed < 10.0
    check(1, "derived metric satisfies the axioms at slack 2^-60",
          ok, f"{len(report.violations)} violations in {report.trials} "
              f"triples, {elapsed:.1f}s")


def test_criterion_02_one_lipschitz_identity():
    t0 = time.perf_counter()
    worst = -1.0
    pairs_total = 0
    for mi, text in enumerate(SHIPPED):
        spec = parse_map(text)
        bits = systems.required_bits(spec, 51)
        code, r, alpha = systems.map_codes(spec, bits)
        xs, ys = _pairs(Substream(1002, (mi,)), bits, 10000)
        tx = backends.map_batch(code, r, alpha, xs, bits, 1)
        ty = backends.map_batch(code, r, alpha, ys, bits, 1)
        after = distance_batch(MetricSpec.derived(EUCLID, spec, 50), tx, ty,
                               bits)
        before = distance_batch(MetricSpec.derived(EUCLID, spec, 51), xs, ys,
                                bits)
        worst = max(worst, float(np.max(after - before)))
        pairs_total += len(xs)
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.0 and pairs_total == 50000 and elapsed < 30.0
    check(2, "d_N(Tx,Ty) <= d_{N+1}(x,y) exactly on all shipped maps",
          ok, f"max defect {worst:.3g} over {pairs_total} pairs, "
              f"{elapsed:.1f}s")


def test_criterion_03_null_derived_ball_at_zero():
    t0 = time.perf_counter()
    metric = MetricSpec.derived(EUCLID, DOUBLING, 100)
    est = ball_measure(metric, ExactPoint.zero(164), 0.5, Substream(1003),
                       samples=10000)
    elapsed = time.perf_counter() - t0
    # the true ball is the set whose first 101 binary digits vanish,
    # measure 2^-101; the estimate must sit at the detection floor
    ok = est.value <= 3e-4 and est.method == "montecarlo" and elapsed < 60.0
    check(3, "derived ball at 0 under doubling is statistically null",
          ok, f"estimate {est.value:.2g} from {est.samples} samples, "
              f"{elapsed:.1f}s")


def test_criterion_04_derived_equals_base_for_rotation():
    t0 = time.perf_counter()
    bits = 256
    xs, ys = _pairs(Substream(1004), bits, 10000)
    derived = distance_batch(MetricSpec.derived(CIRCLE, GOLDEN, 60), xs, ys,
                             bits)
    base = distance_batch(CIRCLE, xs, ys, bits)
    gap = float(np.max(np.abs(derived - base)))
    elapsed = time.perf_counter() - t0
    ok = gap == 0.0 and elapsed < 30.0
    check(4, "derived metric of a rotation equals the circle metric exactly",
          ok, f"max |difference| {gap} over {len(xs)} pairs, {elapsed:.1f}s")


def test_criterion_05_ball_containment_under_iteration():
    horizon = 40
    rng = Substream(1005)
    qualifying = 0
    violations = 0
    for mi, text in enumerate(SHIPPED):
        spec = parse_map(text)
        bits = systems.required_bits(spec, horizon + 10)
        code, r, alpha = systems.map_codes(spec, bits)
        s = rng.child(mi)
        xs = s.child(0).numerators(bits, 0, 2000)
        ys = s.child(1).numerators(bits, 0, 2000)
        ms = s.child(2).integers(10, 0, 2000) + 1
        radii = s.child(3).uniforms(0, 2000)
        for m in range(1, 11):
            idx = np.nonzero(ms == m)[0]
            if idx.size == 0:
                continue
            sub_x = [xs[i] for i in idx]
            sub_y = [ys[i] for i in idx]
            before = backends.derived_max_batch(
                code, r, alpha, backends.EUCLIDEAN, 0.0, sub_x, sub_y, bits,
                horizon + m)
            tx = backends.map_batch(code, r, alpha, sub_x, bits, m)
            ty = backends.map_batch(code, r, alpha, sub_y, bits, m)
            after = backends.derived_max_batch(
                code, r, alpha, backends.EUCLIDEAN, 0.0, tx, ty, bits,
                horizon)
            assert np.all(after <= before)
            rr = radii[idx]
            inside = before < rr
            qualifying += int(np.count_nonzero(inside))
            violations += int(np.count_nonzero(after[inside] >= rr[inside]))
    ok = violations == 0 and qualifying > 1000
    check(5, "B_r(x) maps into B_r(T^m x) in the derived metric",
          ok, f"{violations} violations among {qualifying} qualifying "
              f"samples (m <= 10)")


def test_criterion_06_doubling_sensitivity_with_grid_oracle():
    t0 = time.perf_counter()
    rep = w_sensitivity_estimate(DOUBLING, EUCLID, 0.4, Substream(1006, (0,)),
                                 centers=20, partners=500, horizon=200)

    # oracle: every pair on the 2^12 dyadic grid, exact integer arithmetic;
    # separation |a - b|/4096 > float(0.4) is the integer test |a - b| > 1638
    G = 1 << 12
    orbits = np.empty((21, G), dtype=np.int64)
    orbits[0] = np.arange(G)
    for n in range(1, 21):
        orbits[n] = (orbits[n - 1] << 1) & (G - 1)
    separated = 0
    chunk = 512
    for lo in range(0, G, chunk):
        block = np.zeros((chunk, G), dtype=bool)
        for n in range(21):
            row = orbits[n, lo:lo + chunk]
            np.logical_or(block,
                          np.abs(row[:, None] - orbits[n][None, :]) > 1638,
                          out=block)
        separated += int(np.count_nonzero(block))
    oracle = separated / float(G) ** 2
    mc20 = w_sensitivity_estimate(DOUBLING, EUCLID, 0.4, Substream(1006, (1,)),
                                  centers=20, partners=500, horizon=20)
    gap = abs(mc20.separation_fraction - oracle)
    elapsed = time.perf_counter() - t0
    # only the 4096 diagonal pairs never separate: oracle is exactly 1 - 2^-12
    ok = (rep.separation_fraction >= 0.999 and oracle == 1.0 - 2.0 ** -12
          and gap <= 0.002 and elapsed < 120.0)
    check(6, "doubling separates past 0.4 (Monte Carlo vs exhaustive grid)",
          ok, f"fraction {rep.separation_fraction:.6f} at N=200; oracle "
              f"{oracle:.6f} vs sampled {mc20.separation_fraction:.6f} at "
              f"N=20, gap {gap:.2g}, {elapsed:.1f}s")


def test_criterion_07_rotation_has_no_sensitivity_constant():
    grid = tuple(round(0.05 * k, 2) for k in range(1, 10))
    search = sensitivity_constant_search(GOLDEN, CIRCLE, grid,
                                         Substream(1007, (0,)),
                                         threshold=0.99)
    est = trapped_set_measure(GOLDEN, CIRCLE,
                              systems.sample_point(Substream(1007, (1,)), 256),
                              0.2, 100, Substream(1007, (2,)), samples=10000)
    # under a circle isometry the trapped set is the arc of length 2 * delta
    trapped_ok = abs(est.value - 0.4) <= est.half_width
    ok = search.qualifying_delta is None and trapped_ok
    check(7, "no delta in 0.05..0.45 qualifies for the rotation",
          ok, f"qualifying {search.qualifying_delta}; trapped at 0.2 = "
              f"{est.value:.4f} +/- {est.half_width:.4f} (oracle 0.4)")


def test_criterion_08_sampling_modes_equivalent():
    eq_dbl = equivalence_check(DOUBLING, EUCLID, 0.4, Substream(1008, (0,)),
                               budget=10000)
    eq_rot = equivalence_check(GOLDEN, CIRCLE, 0.45, Substream(1008, (1,)),
                               budget=10000)
    ok = (eq_dbl.within_tolerance and eq_rot.within_tolerance
          and eq_dbl.budget == 10000 and eq_rot.budget == 10000)
    check(8, "per-center and pairwise estimates agree on matched budgets",
          ok, f"gaps {eq_dbl.gap:.4f} <= {eq_dbl.tolerance:.4f} and "
              f"{eq_rot.gap:.4f} <= {eq_rot.tolerance:.4f}")


def test_criterion_09_rotation_balls_uniform():
    metric = MetricSpec.derived(CIRCLE, GOLDEN, 60)
    rep = ball_uniformity_check(GOLDEN, metric, 0.1, Substream(1009),
                                centers=20, samples=10000)
    near_arc = all(abs(b.estimate.value - 0.2) <= b.estimate.half_width
                   for b in rep.balls)
    ok = rep.within_tolerance and not rep.degenerate and near_arc
    check(9, "radius-0.1 rotation balls share the analytic measure 0.2",
          ok, f"spread {rep.max_spread:.4f} <= tolerance "
              f"{rep.tolerance:.4f} over {len(rep.balls)} centers")


def test_criterion_10_dichotomy_classification():
    t0 = time.perf_counter()
    expected = {"radic:2": ("sensitive", 0.8), "radic:3": ("sensitive", 0.4),
                "tent": ("sensitive", 0.8)}
    failures = []
    records = []
    for round_ in range(2):
        batch = []
        for text, (label, delta) in expected.items():
            v = dichotomy_classify(parse_map(text), EUCLID,
                                   Substream(1010, (0,)))
            batch.append(v.to_record())
            if (v.label, v.delta) != (label, delta) or v.contradiction:
                failures.append(f"{text}: {v.label}/{v.delta}")
        for i, angle in enumerate(irrational_angles(10)):
            v = dichotomy_classify(MapSpec.rotation(angle), CIRCLE,
                                   Substream(1010, (1, i)))
            batch.append(v.to_record())
            if v.label != "isometry-like" or v.contradiction:
                failures.append(f"rotation[{i}]: {v.label}")
        records.append(batch)
    deterministic = records[0] == records[1]
    elapsed = time.perf_counter() - t0
    ok = not failures and deterministic and elapsed < 600.0
    check(10, "dichotomy verdicts: 3 sensitive maps, 10 rotations, repeated",
          ok, f"failures {failures or 'none'}, deterministic "
              f"{deterministic}, {elapsed:.1f}s for 26 runs")


def test_criterion_11_measure_compatibility_scan():
    radii = (0.1, 0.3, 0.5, 0.7, 0.9)
    verdicts = {}
    flagged_fraction = {}
    for name, metric in (("euclidean", EUCLID), ("circle", CIRCLE),
                         ("derived", MetricSpec.derived(EUCLID, DOUBLING,
                                                        100))):
        rep = mu_compatibility_scan(metric, radii, Substream(1011),
                                    samples=2000)
        verdicts[name] = rep.verdict
        flagged_fraction[name] = f"{len(rep.flagged)}/{len(rep.balls)}"
    ok = (verdicts["euclidean"] == "compatible"
          and verdicts["circle"] == "compatible"
          and verdicts["derived"] == "flagged")
    check(11, "base metrics compatible, derived doubling metric flagged",
          ok, f"verdicts {verdicts}, flagged balls {flagged_fraction}")
