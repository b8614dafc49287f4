"""Solid primitives and planar cross-sections.

Objects are defined by a signed scalar field (negative inside) in their local
frame and posed in the world. A slice by a finger plane is extracted with
marching squares, refined by bisection onto the true surface, and simplified
to a chord tolerance, yielding the 2D profile the contact solver works on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .errors import GeometryError
from .geometry import Polygon

DEFAULT_CHORD_TOL = 0.05  # mm


def rotation_from_rpy(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Intrinsic XYZ (roll-pitch-yaw) rotation matrix, angles in radians."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return rz @ ry @ rx


@dataclass(frozen=True)
class SolidPose:
    """Position (mm) and roll/pitch/yaw (deg) of a solid in the world frame."""

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rpy_deg: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        r = rotation_from_rpy(*(math.radians(v) for v in self.rpy_deg))
        return r, np.asarray(self.position, dtype=float)

    def world_to_local(self, pts: np.ndarray) -> np.ndarray:
        r, t = self.matrix()
        return (np.asarray(pts, dtype=float) - t) @ r

    def local_to_world(self, pts: np.ndarray) -> np.ndarray:
        r, t = self.matrix()
        return np.asarray(pts, dtype=float) @ r.T + t


class Solid:
    """Base class: a posed solid with a sign-correct scalar field."""

    pose: SolidPose

    def field_local(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def local_bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def field(self, pts_world: np.ndarray) -> np.ndarray:
        return self.field_local(self.pose.world_to_local(pts_world))

    def world_bbox(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.local_bbox()
        corners = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
        w = self.pose.local_to_world(corners)
        return w.min(axis=0), w.max(axis=0)


@dataclass(frozen=True)
class Cylinder(Solid):
    """Upright cylinder, base at local z=0."""

    radius: float
    height: float
    pose: SolidPose = field(default_factory=SolidPose)

    def __post_init__(self):
        if self.radius <= 0 or self.height <= 0:
            raise GeometryError("cylinder radius and height must be positive")

    def field_local(self, pts):
        r = np.hypot(pts[..., 0], pts[..., 1])
        return np.maximum(r - self.radius, np.abs(pts[..., 2] - self.height / 2) - self.height / 2)

    def local_bbox(self):
        r, h = self.radius, self.height
        return np.array([-r, -r, 0.0]), np.array([r, r, h])


@dataclass(frozen=True)
class Sphere(Solid):
    radius: float
    pose: SolidPose = field(default_factory=SolidPose)

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError("sphere radius must be positive")

    def field_local(self, pts):
        return np.linalg.norm(pts, axis=-1) - self.radius

    def local_bbox(self):
        r = self.radius
        return np.array([-r, -r, -r]), np.array([r, r, r])


@dataclass(frozen=True)
class Box(Solid):
    """Axis-aligned box, base at local z=0, centered in x/y."""

    size: tuple[float, float, float]
    pose: SolidPose = field(default_factory=SolidPose)

    def __post_init__(self):
        if any(s <= 0 for s in self.size):
            raise GeometryError("box dimensions must be positive")

    def field_local(self, pts):
        sx, sy, sz = self.size
        return np.maximum.reduce(
            [
                np.abs(pts[..., 0]) - sx / 2,
                np.abs(pts[..., 1]) - sy / 2,
                np.abs(pts[..., 2] - sz / 2) - sz / 2,
            ]
        )

    def local_bbox(self):
        sx, sy, sz = self.size
        return np.array([-sx / 2, -sy / 2, 0.0]), np.array([sx / 2, sy / 2, sz])


@dataclass(frozen=True)
class RevolvedProfile(Solid):
    """Solid of revolution about local z: radius as a piecewise-linear function of z.

    `profile` is a sequence of (z, radius) pairs with strictly increasing z.
    """

    profile: tuple[tuple[float, float], ...]
    pose: SolidPose = field(default_factory=SolidPose)

    def __post_init__(self):
        p = np.asarray(self.profile, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 2:
            raise GeometryError("revolved profile needs at least two (z, radius) pairs")
        if np.any(np.diff(p[:, 0]) <= 0):
            raise GeometryError("revolved profile z values must be strictly increasing")
        if np.any(p[:, 1] < 0):
            raise GeometryError("revolved profile radii must be non-negative")

    def field_local(self, pts):
        p = np.asarray(self.profile, dtype=float)
        z = pts[..., 2]
        r = np.hypot(pts[..., 0], pts[..., 1])
        r_at = np.interp(z, p[:, 0], p[:, 1])
        return np.maximum.reduce([r - r_at, p[0, 0] - z, z - p[-1, 0]])

    def local_bbox(self):
        p = np.asarray(self.profile, dtype=float)
        rmax = float(p[:, 1].max())
        return np.array([-rmax, -rmax, p[0, 0]]), np.array([rmax, rmax, p[-1, 0]])


@dataclass(frozen=True)
class SlicePlane:
    """Plane through `origin` spanned by orthonormal in-plane axes u and v."""

    origin: np.ndarray
    u_axis: np.ndarray
    v_axis: np.ndarray

    def points(self, uv: np.ndarray) -> np.ndarray:
        uv = np.asarray(uv, dtype=float)
        return (
            self.origin[None, :]
            + uv[..., 0:1] * self.u_axis[None, :]
            + uv[..., 1:2] * self.v_axis[None, :]
        )


def _simplify_ring(points: np.ndarray, tol: float) -> np.ndarray:
    """Douglas-Peucker on a closed ring, anchored at the two most distant vertices."""
    n = len(points)
    if n <= 4:
        return points
    ext = np.vstack([points, points[:1]])
    far = max(1, int(np.argmax(np.linalg.norm(points - points[0], axis=1))))

    def dp(idx_lo, idx_hi, out):
        if idx_hi - idx_lo < 2:
            return
        a, b = ext[idx_lo], ext[idx_hi]
        seg = b - a
        len2 = float(seg @ seg)
        sub = ext[idx_lo + 1 : idx_hi]
        if len2 < 1e-18:
            d = np.linalg.norm(sub - a, axis=1)
        else:
            t = np.clip((sub - a) @ seg / len2, 0.0, 1.0)
            d = np.linalg.norm(sub - (a + t[:, None] * seg), axis=1)
        k = int(np.argmax(d))
        if d[k] > tol:
            dp(idx_lo, idx_lo + 1 + k, out)
            out.append(idx_lo + 1 + k)
            dp(idx_lo + 1 + k, idx_hi, out)

    keep: list[int] = [0, far]
    dp(0, far, keep)
    dp(far, n, keep)
    return points[sorted(set(keep))]


def slice_solid(
    solid: Solid,
    plane: SlicePlane,
    chord_tol: float = DEFAULT_CHORD_TOL,
    grid_cells: int = 360,
) -> Polygon | None:
    """Cross-section of a solid by a plane as a CCW polygon in (u, v) coordinates.

    Returns None when the plane misses the solid (a no-contact situation,
    not an error). With several components only the largest is kept.
    """
    lo, hi = solid.world_bbox()
    center = 0.5 * (lo + hi)
    half_diag = 0.5 * float(np.linalg.norm(hi - lo))
    cu = float((center - plane.origin) @ plane.u_axis)
    cv = float((center - plane.origin) @ plane.v_axis)
    span = half_diag + 2.0
    us = np.linspace(cu - span, cu + span, grid_cells)
    vs = np.linspace(cv - span, cv + span, grid_cells)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    uv = np.stack([uu.ravel(), vv.ravel()], axis=1)
    g = solid.field(plane.points(uv)).reshape(grid_cells, grid_cells)
    if not (np.any(g < 0) and np.any(g > 0)):
        return None

    contours = measure.find_contours(g, 0.0)
    if not contours:
        return None
    du = us[1] - us[0]
    dv = vs[1] - vs[0]

    best = None
    best_area = 0.0
    for c in contours:
        if len(c) < 8:
            continue
        pts = np.stack([us[0] + c[:, 0] * du, vs[0] + c[:, 1] * dv], axis=1)
        pts = _refine_onto_surface(solid, plane, c, us, vs, pts)
        if np.linalg.norm(pts[0] - pts[-1]) < 1e-9:
            pts = pts[:-1]
        if len(pts) < 3:
            continue
        pts = _simplify_ring(pts, chord_tol)
        if len(pts) < 3:
            continue
        area2 = float(np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1]))
        if area2 < 0:
            pts = pts[::-1]
            area2 = -area2
        if area2 / 2 > best_area:
            try:
                best = Polygon(pts)
                best_area = area2 / 2
            except GeometryError:
                continue
    return best


def _refine_onto_surface(solid, plane, contour_idx, us, vs, pts):
    """Bisect each marching-squares vertex along its grid edge onto field == 0."""
    frac_i = np.abs(contour_idx[:, 0] - np.round(contour_idx[:, 0])) > 1e-9
    du = us[1] - us[0]
    dv = vs[1] - vs[0]
    lo_idx = np.floor(contour_idx).astype(int)
    p_lo = np.stack([us[0] + lo_idx[:, 0] * du, vs[0] + lo_idx[:, 1] * dv], axis=1)
    step = np.where(frac_i[:, None], np.array([[du, 0.0]]), np.array([[0.0, dv]]))
    p_hi = p_lo + step

    f_lo = solid.field(plane.points(p_lo))
    a, b = p_lo.copy(), p_hi.copy()
    fa = f_lo
    for _ in range(45):
        m = 0.5 * (a + b)
        fm = solid.field(plane.points(m))
        take_lo = (fa <= 0) == (fm <= 0)
        a = np.where(take_lo[:, None], m, a)
        fa = np.where(take_lo, fm, fa)
        b = np.where(take_lo[:, None], b, m)
    return 0.5 * (a + b)
