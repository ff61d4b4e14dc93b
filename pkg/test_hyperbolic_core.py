import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperbolic_core import (
    ORIGIN,
    GeodesicSegment,
    HPoint,
    Isometry,
    acosh1p,
    angle_at,
    apply,
    dist,
    from_hyperboloid,
    from_klein,
    geodesic_circle,
    geodesic_point,
    hyperbolic_centroid,
    hyperboloid_dist,
    klein_dist,
    midpoint,
    to_hyperboloid,
    to_klein,
)
from hypertile_utils import DomainError


def polar(r, phi):
    return HPoint(r * math.cos(phi), r * math.sin(phi))


disk_points = st.builds(
    polar,
    st.floats(min_value=0.0, max_value=0.9),
    st.floats(min_value=0.0, max_value=2.0 * math.pi),
)


def test_dist_examples():
    assert dist(ORIGIN, ORIGIN) == 0.0
    assert dist(ORIGIN, HPoint(0.5, 0.0)) == pytest.approx(2.0 * math.atanh(0.5), abs=1e-15)
    assert dist(ORIGIN, HPoint(0.5, 0.0)) == pytest.approx(math.log(3.0), abs=1e-15)


def test_dist_matches_mpmath_oracle():
    mpmath.mp.dps = 40
    p, q = HPoint(0.31, -0.52), HPoint(-0.7, 0.2)
    num = 2 * ((mpmath.mpf(p.x) - q.x) ** 2 + (mpmath.mpf(p.y) - q.y) ** 2)
    den = (1 - mpmath.mpf(p.x) ** 2 - mpmath.mpf(p.y) ** 2) * (1 - mpmath.mpf(q.x) ** 2 - mpmath.mpf(q.y) ** 2)
    expected = float(mpmath.acosh(1 + num / den))
    assert dist(p, q) == pytest.approx(expected, rel=1e-13)


def test_point_outside_disk_rejected():
    with pytest.raises(DomainError):
        HPoint(1.0, 0.0)
    with pytest.raises(DomainError):
        HPoint(float("nan"), 0.0)


def test_acosh1p_small_and_negative_offsets():
    assert acosh1p(0.0) == 0.0
    assert acosh1p(1e-20) == pytest.approx(math.sqrt(2e-20), rel=1e-12)
    assert acosh1p(2.5) == pytest.approx(math.acosh(3.5), rel=1e-14)
    assert acosh1p(-1e-12) == 0.0
    with pytest.raises(DomainError):
        acosh1p(-1e-3)


def test_angle_at_is_counterclockwise():
    a, b = HPoint(0.3, 0.0), HPoint(0.0, 0.3)
    assert angle_at(ORIGIN, a, b) == pytest.approx(math.pi / 2.0, abs=1e-15)
    assert angle_at(ORIGIN, b, a) == pytest.approx(3.0 * math.pi / 2.0, abs=1e-15)
    with pytest.raises(DomainError):
        angle_at(ORIGIN, ORIGIN, a)


def test_klein_examples_and_round_trip():
    assert to_klein(ORIGIN) == (0.0, 0.0)
    kx, ky = to_klein(HPoint(0.5, 0.0))
    assert kx == pytest.approx(0.8, abs=1e-15)
    assert ky == 0.0
    p = HPoint(-0.41, 0.77)
    back = from_klein(to_klein(p))
    assert abs(back.z - p.z) < 1e-12
    with pytest.raises(DomainError):
        from_klein((1.0, 0.0))


@settings(max_examples=60, deadline=None)
@given(disk_points, disk_points)
def test_models_agree_on_distance(p, q):
    d = dist(p, q)
    assert hyperboloid_dist(p, q) == pytest.approx(d, abs=1e-6)
    assert klein_dist(to_klein(p), to_klein(q)) == pytest.approx(d, abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(disk_points)
def test_hyperboloid_round_trip(p):
    X = to_hyperboloid(p)
    assert X[0] * X[0] + X[1] * X[1] - X[2] * X[2] == pytest.approx(-1.0, abs=1e-8)
    assert abs(from_hyperboloid(X).z - p.z) < 1e-12


def test_identity_and_reflection_involution():
    p = HPoint(0.2, -0.6)
    assert apply(Isometry.identity(), p) == p
    mirror = Isometry.reflection_across(HPoint(0.1, 0.3), HPoint(-0.5, 0.2))
    assert mirror.compose(mirror).almost_equal(Isometry.identity())
    assert mirror.compose(mirror).reflect is False


def test_reflection_fixes_its_geodesic():
    a, b = HPoint(0.1, 0.3), HPoint(-0.5, 0.2)
    mirror = Isometry.reflection_across(a, b)
    for point in (a, b, midpoint(a, b), geodesic_point(a, b, 1.7)):
        assert abs(mirror(point).z - point.z) < 1e-12
    off = HPoint(0.4, -0.4)
    assert abs(mirror(off).z - off.z) > 1e-3
    with pytest.raises(DomainError):
        Isometry.reflection_across(a, a)


@settings(max_examples=50, deadline=None)
@given(disk_points, disk_points, st.integers(min_value=0, max_value=10_000))
def test_isometries_preserve_distance(p, q, seed):
    g = Isometry.random(np.random.default_rng(seed))
    assert dist(g(p), g(q)) == pytest.approx(dist(p, q), abs=1e-7)
    assert g.compose(g.inverse()).almost_equal(Isometry.identity(), tol=1e-9)


def test_translation_sends_origin_to_target():
    target = HPoint(0.3, 0.45)
    moved = apply(Isometry.translation(target), ORIGIN)
    assert abs(moved.z - target.z) < 1e-15


def test_geodesic_point_divides_length():
    p, q = HPoint(-0.3, 0.1), HPoint(0.6, 0.5)
    m = midpoint(p, q)
    assert dist(p, m) == pytest.approx(dist(m, q), abs=1e-12)
    x = geodesic_point(p, q, 0.25)
    assert dist(p, x) == pytest.approx(0.25 * dist(p, q), abs=1e-12)
    assert geodesic_point(p, p, 0.5) == p


def test_geodesic_circle_is_orthogonal_to_boundary():
    p, q = HPoint(0.2, 0.5), HPoint(-0.4, 0.3)
    (cx, cy), r = geodesic_circle(p, q)
    assert cx * cx + cy * cy == pytest.approx(1.0 + r * r, abs=1e-12)
    assert math.hypot(p.x - cx, p.y - cy) == pytest.approx(r, abs=1e-12)
    assert math.hypot(q.x - cx, q.y - cy) == pytest.approx(r, abs=1e-12)
    assert geodesic_circle(HPoint(-0.5, -0.5), HPoint(0.3, 0.3)) is None


def test_segment_crossing():
    horizontal = GeodesicSegment(HPoint(-0.5, 0.0), HPoint(0.5, 0.0))
    vertical = GeodesicSegment(HPoint(0.0, -0.5), HPoint(0.0, 0.5))
    touching = GeodesicSegment(HPoint(0.5, 0.0), HPoint(0.5, 0.5))
    assert horizontal.intersects(vertical)
    assert not horizontal.intersects(touching)
    assert horizontal.length == pytest.approx(2.0 * dist(ORIGIN, HPoint(0.5, 0.0)))
    pieces = horizontal.polyline(4)
    assert len(pieces) == 5 and pieces[2].x == pytest.approx(0.0, abs=1e-15)


def test_centroid_of_symmetric_points_is_origin():
    pts = [polar(0.6, k * 2.0 * math.pi / 5.0) for k in range(5)]
    c = hyperbolic_centroid(pts)
    assert abs(c.z) < 1e-12
