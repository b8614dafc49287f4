import numpy as np
import pytest

from fractalgrip.solids import (
    Box,
    Cylinder,
    RevolvedProfile,
    SlicePlane,
    Sphere,
    SolidPose,
    slice_solid,
)

AXIAL_PLANE = SlicePlane(
    origin=np.zeros(3),
    u_axis=np.array([1.0, 0.0, 0.0]),
    v_axis=np.array([0.0, 0.0, 1.0]),
)


def bottle(pose=SolidPose()):
    return RevolvedProfile(
        profile=((0.0, 28.0), (8.0, 30.0), (110.0, 30.0), (140.0, 13.0), (175.0, 12.0)),
        pose=pose,
    )


class TestSliceSolid:
    def test_cylinder_axial_slice_is_rectangle(self):
        cyl = Cylinder(radius=30.0, height=100.0)
        poly = slice_solid(cyl, AXIAL_PLANE)
        assert poly is not None
        lo = poly.vertices.min(axis=0)
        hi = poly.vertices.max(axis=0)
        assert hi[0] - lo[0] == pytest.approx(60.0, abs=0.02)
        assert hi[1] - lo[1] == pytest.approx(100.0, abs=0.02)
        assert poly.area == pytest.approx(6000.0, rel=2e-3)

    def test_sphere_offset_slice_is_circle(self):
        r, d = 25.0, 10.0
        sph = Sphere(radius=r, pose=SolidPose(position=(0.0, d, 0.0)))
        poly = slice_solid(sph, AXIAL_PLANE)
        assert poly is not None
        want = np.sqrt(r * r - d * d)
        radii = np.linalg.norm(poly.vertices, axis=1)
        assert np.all(np.abs(radii - want) < 0.05)

    def test_empty_intersection_returns_none(self):
        sph = Sphere(radius=5.0, pose=SolidPose(position=(0.0, 50.0, 0.0)))
        assert slice_solid(sph, AXIAL_PLANE) is None

    def test_box_slice(self):
        box = Box(size=(40.0, 20.0, 60.0))
        poly = slice_solid(box, AXIAL_PLANE)
        assert poly is not None
        assert poly.area == pytest.approx(40.0 * 60.0, rel=2e-3)

    def test_bottle_slice_matches_membership_raster(self):
        """Boundary must agree with a 0.1 mm rasterized membership oracle within one cell."""
        solid = bottle()
        poly = slice_solid(solid, AXIAL_PLANE)
        assert poly is not None

        res = 0.1
        us = np.arange(-32.0, 32.0 + res, res)
        vs = np.arange(-2.0, 177.0 + res, res)
        uu, vv = np.meshgrid(us, vs, indexing="ij")
        uv = np.stack([uu.ravel(), vv.ravel()], axis=1)
        member = solid.field(AXIAL_PLANE.points(uv)) <= 0.0
        claimed = poly.contains(uv)
        disagree = uv[member != claimed]
        if len(disagree):
            # every disagreement must hug the polygon boundary (within one cell diagonal)
            d = poly.boundary_distance(disagree)
            assert float(d.max()) <= res * np.sqrt(2.0) + 1e-9

    def test_rotated_cylinder_transverse_slice(self):
        # lying cylinder (axis along world x) cut by the axial plane -> circle
        cyl = Cylinder(radius=12.0, height=80.0, pose=SolidPose(position=(-40.0, 0.0, 30.0), rpy_deg=(0.0, 90.0, 0.0)))
        plane = SlicePlane(
            origin=np.array([0.0, 0.0, 30.0]),
            u_axis=np.array([0.0, 1.0, 0.0]),
            v_axis=np.array([0.0, 0.0, 1.0]),
        )
        poly = slice_solid(cyl, plane)
        assert poly is not None
        assert poly.area == pytest.approx(np.pi * 144.0, rel=5e-3)


class TestSolidValidation:
    def test_bad_cylinder(self):
        with pytest.raises(Exception):
            Cylinder(radius=-1.0, height=5.0)

    def test_profile_must_increase(self):
        with pytest.raises(Exception):
            RevolvedProfile(profile=((0.0, 1.0), (0.0, 2.0)))
