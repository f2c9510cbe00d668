"""Exact points, map specs, orbits and precision budgets."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sensilab import (ExactPoint, MapSpec, PrecisionExhaustedError,
                      SpecFormatError, Substream, bits_per_step, format_map,
                      golden_angle, irrational_angles, iterate, orbit,
                      parse_map, required_bits, sample_point, sample_points)
from sensilab.systems import SHIPPED_MAPS, advance, sqrt_angle


# ------------------------------------------------------------- exact points

def test_from_fraction_truncates():
    p = ExactPoint.from_fraction(1, 3, 8)
    assert p.numerator == 85          # floor(256/3)
    assert ExactPoint.from_fraction(1, 4, 8).to_fraction() == Fraction(1, 4)
    with pytest.raises(ValueError):
        ExactPoint.from_fraction(4, 4, 8)
    with pytest.raises(ValueError):
        ExactPoint.from_fraction(-1, 4, 8)


def test_from_float_dyadics_exact():
    for v in (0.0, 0.5, 0.25, 0.8125):
        assert ExactPoint.from_float(v, 64).to_float() == v
    with pytest.raises(ValueError):
        ExactPoint.from_float(1.0, 64)


def test_numerator_range_enforced():
    with pytest.raises(ValueError):
        ExactPoint(1 << 8, 8)
    with pytest.raises(ValueError):
        ExactPoint(-1, 8)
    with pytest.raises(ValueError):
        ExactPoint(0, 0)


def test_with_precision_upscale_only():
    p = ExactPoint.from_fraction(3, 8, 16)
    q = p.with_precision(64)
    assert q.to_fraction() == Fraction(3, 8)
    assert p.with_precision(16) == p
    with pytest.raises(ValueError):
        p.with_precision(8)


def test_hex_roundtrip_and_parse_errors():
    p = ExactPoint(0xabc, 64)
    assert p.hex() == "0xabc@64"
    assert ExactPoint.parse(p.hex()) == p
    assert str(p) == p.hex()
    for bad in ("abc@64", "0xg@64", "0x1", "0x1@", "1/3"):
        with pytest.raises(SpecFormatError):
            ExactPoint.parse(bad)


@given(st.integers(min_value=1, max_value=300), st.data())
def test_hex_roundtrip_property(bits, data):
    num = data.draw(st.integers(min_value=0, max_value=(1 << bits) - 1))
    p = ExactPoint(num, bits)
    assert ExactPoint.parse(p.hex()) == p


# ---------------------------------------------------------------- map specs

def test_map_validation():
    with pytest.raises(ValueError):
        MapSpec.radic(1)
    with pytest.raises(ValueError):
        MapSpec.radic(1 << 17)
    with pytest.raises(ValueError):
        MapSpec.rotation(ExactPoint(0, 64))
    with pytest.raises(SpecFormatError):
        MapSpec("hyperbolic")
    with pytest.raises(ValueError):
        MapSpec("tent", r=3)


def test_parse_format_roundtrip():
    for text in SHIPPED_MAPS:
        spec = parse_map(text)
        assert parse_map(format_map(spec)) == spec
    assert format_map(parse_map("radic:2")) == "radic:2"
    assert parse_map("rotation:1/4@72").alpha.to_fraction() == Fraction(1, 4)
    for bad in ("radic:x", "radic:", "rotation:abc", "squash", "rotation:0/4"):
        with pytest.raises((SpecFormatError, ValueError)):
            parse_map(bad)


def test_descriptions():
    assert "3x" in MapSpec.radic(3).description
    assert parse_map("tent").description.startswith("x -> 2x")


# ------------------------------------------------------- budgets and orbits

def test_bits_per_step():
    assert bits_per_step(MapSpec.radic(2)) == 1
    assert bits_per_step(MapSpec.radic(3)) == 2
    assert bits_per_step(MapSpec.radic(4)) == 2
    assert bits_per_step(MapSpec.radic(5)) == 3
    assert bits_per_step(MapSpec.tent()) == 1
    assert bits_per_step(parse_map("rotation:golden")) == 0
    assert bits_per_step(MapSpec.identity()) == 0


def test_required_bits():
    assert required_bits(MapSpec.radic(2), 100) == 164
    assert required_bits(MapSpec.radic(3), 100) == 264
    assert required_bits(MapSpec.tent(), 100) == 164
    assert required_bits(parse_map("rotation:golden"), 100) == 256
    assert required_bits(MapSpec.identity(), 100) == 64


def _orbit_fractions(spec, num, den, bits, steps):
    x = ExactPoint.from_fraction(num, den, bits)
    return [p.to_fraction() for p in orbit(spec, x, steps).points]


def test_exact_orbits():
    F = Fraction
    assert _orbit_fractions(MapSpec.radic(2), 5, 16, 72, 4) == [
        F(5, 16), F(5, 8), F(1, 4), F(1, 2), F(0)]
    assert _orbit_fractions(MapSpec.radic(3), 3, 8, 80, 4) == [
        F(3, 8), F(1, 8), F(3, 8), F(1, 8), F(3, 8)]
    assert _orbit_fractions(MapSpec.tent(), 3, 8, 72, 4) == [
        F(3, 8), F(3, 4), F(1, 2), F(0), F(0)]
    # the peak preimage wraps to 0, keeping the map into [0, 1)
    assert _orbit_fractions(MapSpec.tent(), 1, 2, 72, 2) == [F(1, 2), 0, 0]
    rot = parse_map("rotation:1/4@72")
    assert _orbit_fractions(rot, 0, 1, 72, 5) == [
        F(0), F(1, 4), F(1, 2), F(3, 4), F(0), F(1, 4)]


def test_orbit_budget_enforced():
    x = ExactPoint.from_fraction(1, 3, 68)
    with pytest.raises(PrecisionExhaustedError):
        orbit(MapSpec.radic(2), x, 10)     # needs 74 bits
    assert orbit(MapSpec.radic(2), x, 4).horizon == 4
    assert orbit(MapSpec.identity(), x, 10 ** 6).points[-1] == x
    with pytest.raises(ValueError):
        orbit(MapSpec.identity(), x, -1)


def test_iterate_single_step():
    x = ExactPoint.from_fraction(3, 8, 66)
    assert iterate(MapSpec.radic(2), x).to_fraction() == Fraction(3, 4)
    with pytest.raises(PrecisionExhaustedError):
        iterate(MapSpec.radic(3), ExactPoint(1, 2))


def test_advance_matches_orbit():
    spec = MapSpec.radic(3)
    pts = sample_points(Substream(4), 264, 0, 5)
    orbits = [orbit(spec, p, 40).points[-1] for p in pts]
    assert advance(spec, pts, 40) == orbits
    assert advance(spec, [], 40) == []


def test_rotation_mixed_widths():
    # points narrower than the angle are upscaled to the angle's width
    rot = parse_map("rotation:1/4@128")
    x = ExactPoint.from_fraction(1, 2, 64)
    assert iterate(rot, x).to_fraction() == Fraction(3, 4)


# -------------------------------------------------------------------- angles

def test_golden_angle_value():
    assert golden_angle(64).hex() == "0x9e3779b97f4a7c15@64"
    assert abs(golden_angle(256).to_float() - 0.6180339887498948) < 1e-15


def test_sqrt_angles():
    assert abs(sqrt_angle(2).to_float() - 0.41421356237309503) < 1e-15
    with pytest.raises(ValueError):
        sqrt_angle(9)


def test_irrational_angles_distinct():
    angles = irrational_angles(10)
    assert len(angles) == 10
    assert len({a.numerator for a in angles}) == 10
    assert irrational_angles(1) == [golden_angle()]
    for bad in (0, 11):
        with pytest.raises(ValueError):
            irrational_angles(bad)


# ------------------------------------------------------------------ sampling

def test_sample_point_index_addressed():
    rng = Substream(12, (3,))
    pts = sample_points(rng, 128, 0, 6)
    assert sample_point(rng, 128, 4) == pts[4]
    assert sample_point(rng, 128) == pts[0]
    assert all(p.precision_bits == 128 for p in pts)
