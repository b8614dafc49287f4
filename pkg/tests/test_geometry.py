import math

import numpy as np
import pytest

from fractalgrip.errors import GeometryError
from fractalgrip.geometry import (
    Polygon,
    Pose2,
    regular_polygon,
    segment_gap,
    segment_polygon_distance,
    tetrahedron_volume,
)

UNIT_SQUARE = Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])


def sampled_signed_distance(a, b, poly, n=100_000, refine=True):
    """Independent oracle: dense point sampling along the segment, signed by membership,
    then golden-section refinement of the best sample using only point queries."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    ts = np.linspace(0.0, 1.0, n)
    pts = a[None, :] + ts[:, None] * (b - a)[None, :]
    dist = poly.boundary_distance(pts)
    sign = np.where(poly.contains(pts), -1.0, 1.0)
    signed = sign * dist
    k = int(np.argmin(signed))
    if not refine:
        return float(signed[k])

    def f(t):
        p = a + t * (b - a)
        d = poly.boundary_distance(p)
        return -d if poly.contains(p) else d

    lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, n - 1)]
    invphi = (math.sqrt(5) - 1) / 2
    c, d = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(90):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    return min(signed[k], fc, fd)


def random_convex_polygon(rng, n_pts=10, radius=20.0, center=(0.0, 0.0)):
    """Convex hull of random points, returned CCW."""
    pts = rng.normal(size=(n_pts, 2)) * radius + np.asarray(center)
    hull = _convex_hull(pts)
    return Polygon(hull)


def _convex_hull(pts):
    pts = sorted(map(tuple, pts))
    if len(pts) <= 2:
        raise ValueError("hull needs 3+ points")

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(points):
        out = []
        for p in points:
            while len(out) >= 2 and cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1])


class TestSegmentPolygonDistance:
    def test_axis_aligned_gap(self):
        assert segment_polygon_distance((0, 2), (1, 2), UNIT_SQUARE) == pytest.approx(1.0, abs=1e-12)

    def test_penetration_depth_at_mid_square(self):
        d = segment_polygon_distance((0.25, 0.5), (0.75, 0.5), UNIT_SQUARE)
        assert d == pytest.approx(-0.5, abs=1e-9)

    def test_degenerate_segment_rejected(self):
        with pytest.raises(GeometryError):
            segment_polygon_distance((1, 1), (1, 1 + 1e-12), UNIT_SQUARE)

    def test_matches_sampling_oracle_on_random_convex_pairs(self):
        rng = np.random.default_rng(42)
        for _ in range(40):
            poly = random_convex_polygon(rng)
            a = rng.uniform(-50, 50, size=2)
            b = a + rng.uniform(-40, 40, size=2)
            if np.hypot(*(b - a)) < 1e-3:
                continue
            got = segment_polygon_distance(a, b, poly)
            want = sampled_signed_distance(a, b, poly, n=20_000)
            assert got == pytest.approx(want, abs=1e-6), (a, b, poly.vertices)

    def test_rigid_motion_invariance(self):
        rng = np.random.default_rng(7)
        poly = random_convex_polygon(rng)
        a = np.array([30.0, -4.0])
        b = np.array([25.0, 12.0])
        base = segment_polygon_distance(a, b, poly)
        for _ in range(10):
            pose = Pose2(rng.uniform(-90, 90), rng.uniform(-90, 90), rng.uniform(-math.pi, math.pi))
            moved = segment_polygon_distance(pose.transform(a), pose.transform(b), poly.transformed(pose))
            assert abs(moved - base) < 1e-9

    def test_touching_segment_reports_zero_with_outward_direction(self):
        info = segment_gap((0.2, 1.0), (0.8, 1.0), UNIT_SQUARE)
        assert info.gap == pytest.approx(0.0, abs=1e-9)
        assert info.direction @ np.array([0.0, 1.0]) > 0.9


class TestTetrahedronVolume:
    def test_unit_tetrahedron(self):
        v = tetrahedron_volume((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))
        assert v == pytest.approx(1.0 / 6.0, rel=1e-12)

    def test_coplanar_is_zero(self):
        assert tetrahedron_volume((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)) == 0.0

    def test_matches_cofactor_oracle(self):
        def cofactor_det3(m):
            return (
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            )

        rng = np.random.default_rng(3)
        for _ in range(50):
            pts = rng.uniform(-100, 100, size=(4, 3))
            rows = [list(pts[i + 1] - pts[0]) for i in range(3)]
            want = abs(cofactor_det3(rows)) / 6.0
            got = tetrahedron_volume(*pts)
            assert got == pytest.approx(want, rel=1e-9)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(11)
        pts = rng.uniform(-10, 10, size=(4, 3))
        base = tetrahedron_volume(*pts)
        for perm in [(1, 0, 2, 3), (3, 2, 1, 0), (2, 3, 0, 1), (0, 3, 1, 2)]:
            assert tetrahedron_volume(*pts[list(perm)]) == pytest.approx(base, rel=1e-12)


class TestPolygon:
    def test_rejects_clockwise(self):
        with pytest.raises(GeometryError):
            Polygon([(0, 0), (0, 1), (1, 1), (1, 0)])

    def test_rejects_self_intersection(self):
        with pytest.raises(GeometryError):
            Polygon([(0, 0), (2, 2), (2, 0), (0, 2)])

    def test_rejects_nan(self):
        with pytest.raises(GeometryError):
            Polygon([(0, 0), (1, float("nan")), (1, 1)])

    def test_contains(self):
        assert UNIT_SQUARE.contains((0.5, 0.5))
        assert not UNIT_SQUARE.contains((1.5, 0.5))

    def test_regular_polygon_area_approaches_circle(self):
        p = regular_polygon((0, 0), 10.0, n=256)
        assert p.area == pytest.approx(math.pi * 100.0, rel=1e-3)
