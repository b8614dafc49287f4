"""Planar geometric primitives: poses, polygons, and signed clearance queries.

Conventions used throughout the package:
  * lengths in millimetres, angles in radians (degrees only at I/O),
  * polygons are simple, counter-clockwise, positive area,
  * signed gaps are negative inside an object (penetration depth).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

EPS = 1e-9


def _as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.shape != (2,):
        raise GeometryError(f"expected a 2D point, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise GeometryError(f"non-finite point {a}")
    return a


def _wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    t = math.fmod(theta, 2.0 * math.pi)
    if t <= -math.pi:
        t += 2.0 * math.pi
    elif t > math.pi:
        t -= 2.0 * math.pi
    return t


@dataclass(frozen=True)
class Pose2:
    """Rigid planar pose: translation (mm) plus rotation (rad, wrapped to (-pi, pi])."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta)):
            raise GeometryError("non-finite pose component")
        object.__setattr__(self, "theta", _wrap_angle(self.theta))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def rotation(self) -> tuple[float, float]:
        return math.cos(self.theta), math.sin(self.theta)

    def transform(self, pts: np.ndarray) -> np.ndarray:
        """Map local points (..., 2) into the parent frame."""
        c, s = self.rotation()
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        return np.stack([c * x - s * y + self.x, s * x + c * y + self.y], axis=-1)

    def compose(self, other: "Pose2") -> "Pose2":
        """self applied after other-in-self: world pose of a child frame."""
        c, s = self.rotation()
        return Pose2(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )


class Polygon:
    """Simple counter-clockwise polygon with cached edge data for distance queries."""

    __slots__ = ("vertices", "_e0", "_ev", "_elen2", "_outward")

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise GeometryError("polygon needs at least 3 planar vertices")
        if not np.all(np.isfinite(v)):
            raise GeometryError("polygon has non-finite vertices")
        area2 = float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))
        if area2 <= EPS:
            raise GeometryError(f"polygon must be counter-clockwise with positive area (2A={area2:g})")
        self.vertices = v
        self.vertices.setflags(write=False)
        self._e0 = v
        self._ev = np.roll(v, -1, axis=0) - v
        self._elen2 = np.einsum("ij,ij->i", self._ev, self._ev)
        if np.any(self._elen2 < EPS * EPS):
            raise GeometryError("polygon has a degenerate (zero-length) edge")
        # CCW boundary keeps the interior on the left; outward normal is the right side.
        ev = self._ev / np.sqrt(self._elen2)[:, None]
        self._outward = np.stack([ev[:, 1], -ev[:, 0]], axis=1)
        self._check_simple()

    def _check_simple(self):
        v = self.vertices
        n = len(v)
        a0 = v
        a1 = np.roll(v, -1, axis=0)
        d1 = a1 - a0
        # Pairwise proper-intersection test between non-adjacent edges.
        idx = np.arange(n)
        i, j = np.meshgrid(idx, idx, indexing="ij")
        mask = (j > i + 1) & ~((i == 0) & (j == n - 1))
        ii, jj = i[mask], j[mask]
        p, r = a0[ii], d1[ii]
        q, s = a0[jj], d1[jj]
        denom = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
        qp = q - p
        tn = qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]
        un = qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = tn / denom
            u = un / denom
        crossing = (np.abs(denom) > EPS) & (t > EPS) & (t < 1 - EPS) & (u > EPS) & (u < 1 - EPS)
        if np.any(crossing):
            k = int(np.argmax(crossing))
            raise GeometryError(f"polygon is self-intersecting (edges {ii[k]} and {jj[k]})")

    @property
    def area(self) -> float:
        v = self.vertices
        return 0.5 * float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))

    def contains(self, pts) -> np.ndarray:
        """Crossing-number membership test for points (..., 2). Boundary points unreliable."""
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        p = pts.reshape(-1, 2)
        x, y = p[:, 0:1], p[:, 1:2]
        x0, y0 = self._e0[:, 0], self._e0[:, 1]
        x1 = x0 + self._ev[:, 0]
        y1 = y0 + self._ev[:, 1]
        cond = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xs = x0 + (y - y0) * self._ev[:, 0] / np.where(np.abs(self._ev[:, 1]) < 1e-300, 1e-300, self._ev[:, 1])
        inside = np.sum(cond & (x < xs), axis=1) % 2 == 1
        return bool(inside[0]) if single else inside.reshape(pts.shape[:-1])

    def transformed(self, pose: Pose2) -> "Polygon":
        return Polygon(pose.transform(self.vertices))

    def boundary_distance(self, pts) -> np.ndarray:
        """Unsigned distance from points (..., 2) to the polygon boundary."""
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        p = pts.reshape(-1, 2)
        d = p[:, None, :] - self._e0[None, :, :]
        t = np.clip(np.einsum("pej,ej->pe", d, self._ev) / self._elen2, 0.0, 1.0)
        closest = self._e0[None, :, :] + t[..., None] * self._ev[None, :, :]
        dist = np.linalg.norm(p[:, None, :] - closest, axis=2)
        out = dist.min(axis=1)
        return float(out[0]) if single else out.reshape(pts.shape[:-1])

    def __repr__(self):
        return f"Polygon({len(self.vertices)} vertices, area={self.area:.3f} mm^2)"


def _closest_on_boundary(poly: Polygon, p: np.ndarray) -> tuple[float, np.ndarray, int]:
    """Distance, closest boundary point and edge index for a single point."""
    d = p[None, :] - poly._e0
    t = np.clip(np.einsum("ej,ej->e", d, poly._ev) / poly._elen2, 0.0, 1.0)
    closest = poly._e0 + t[:, None] * poly._ev
    dist = np.linalg.norm(p[None, :] - closest, axis=1)
    e = int(np.argmin(dist))
    return float(dist[e]), closest[e], e


def _point_to_segment(pts: np.ndarray, a: np.ndarray, ab: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distances and feet from points (N, 2) to segment a + t*ab, t in [0, 1]."""
    len2 = float(ab @ ab)
    t = np.clip((pts - a) @ ab / len2, 0.0, 1.0)
    feet = a[None, :] + t[:, None] * ab[None, :]
    return np.linalg.norm(pts - feet, axis=1), feet


def _segment_crossings(a: np.ndarray, ab: np.ndarray, poly: Polygon) -> np.ndarray:
    """Parameters t where segment a + t*ab crosses the polygon boundary."""
    q, s = poly._e0, poly._ev
    denom = ab[0] * s[:, 1] - ab[1] * s[:, 0]
    qp = q - a[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
        u = (qp[:, 0] * ab[1] - qp[:, 1] * ab[0]) / denom
    ok = (np.abs(denom) > EPS) & (t >= -EPS) & (t <= 1 + EPS) & (u >= -EPS) & (u <= 1 + EPS)
    return np.sort(np.clip(t[ok], 0.0, 1.0))


def _golden_max(f, lo: float, hi: float, iters: int = 80) -> tuple[float, float]:
    """Golden-section maximization of a scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
        if hi - lo < 1e-13:
            break
    return (c, fc) if fc > fd else (d, fd)


def point_gaps(pts: np.ndarray, poly: Polygon) -> tuple[np.ndarray, np.ndarray]:
    """Signed clearance of points (N, 2) to the polygon plus its growth direction.

    Negative inside. The direction is the unit vector along which the gap
    increases; for on-boundary points it falls back to the edge outward normal.
    """
    p = np.asarray(pts, dtype=float).reshape(-1, 2)
    d = p[:, None, :] - poly._e0[None, :, :]
    t = np.clip(np.einsum("pej,ej->pe", d, poly._ev) / poly._elen2, 0.0, 1.0)
    closest = poly._e0[None, :, :] + t[..., None] * poly._ev[None, :, :]
    dist = np.linalg.norm(p[:, None, :] - closest, axis=2)
    e = np.argmin(dist, axis=1)
    idx = np.arange(len(p))
    best = closest[idx, e]
    dmin = dist[idx, e]
    inside = poly.contains(p)
    gaps = np.where(inside, -dmin, dmin)
    away = p - best
    with np.errstate(divide="ignore", invalid="ignore"):
        away = away / np.where(dmin[:, None] < EPS, 1.0, dmin[:, None])
    dirs = np.where(inside[:, None], -away, away)
    on_edge = dmin < EPS
    if np.any(on_edge):
        dirs[on_edge] = poly._outward[e[on_edge]]
    return gaps, dirs


@dataclass(frozen=True)
class SegmentGap:
    """Signed clearance between a segment and a polygon.

    gap > 0: closest approach; gap < 0: deepest penetration of the segment.
    `point` is the governing point on the segment, `direction` the unit vector
    along which the gap increases (away from the object).
    """

    gap: float
    point: np.ndarray
    direction: np.ndarray
    edge: int


def segment_gap(a, b, poly: Polygon) -> SegmentGap:
    a = _as_point(a)
    b = _as_point(b)
    ab = b - a
    seg_len = float(np.hypot(*ab))
    if seg_len < 1e-9:
        raise GeometryError("degenerate segment: endpoints coincide within 1e-9 mm")

    ts = _segment_crossings(a, ab, poly)
    knots = np.unique(np.concatenate([[0.0], ts, [1.0]]))
    mids = 0.5 * (knots[:-1] + knots[1:])
    inside_mid = poly.contains(a[None, :] + mids[:, None] * ab[None, :])
    intervals = [
        (float(knots[k]), float(knots[k + 1]))
        for k in range(len(mids))
        if inside_mid[k] and (knots[k + 1] - knots[k]) * seg_len > 1e-12
    ]

    if intervals:
        # Deepest point of the inside portion: maximize boundary distance along t.
        def depth(t: float) -> float:
            return poly.boundary_distance(a + t * ab)

        best_t, best_d = 0.0, -1.0
        for lo, hi in intervals:
            n = 33
            tt = np.linspace(lo, hi, n)
            dd = poly.boundary_distance(a[None, :] + tt[:, None] * ab[None, :])
            is_peak = np.ones(n, dtype=bool)
            is_peak[1:] &= dd[1:] >= dd[:-1] - 1e-12
            is_peak[:-1] &= dd[:-1] >= dd[1:] - 1e-12
            # collapse plateau runs (flat boundary parallel to the segment) to one candidate
            peaks = np.flatnonzero(is_peak)
            reps = []
            run = [peaks[0]]
            for k in peaks[1:]:
                if k == run[-1] + 1:
                    run.append(k)
                else:
                    reps.append(run[len(run) // 2])
                    run = [k]
            reps.append(run[len(run) // 2])
            for k in reps:
                t_ref, d_ref = _golden_max(depth, tt[max(k - 1, 0)], tt[min(k + 1, n - 1)])
                if d_ref > best_d:
                    best_t, best_d = t_ref, d_ref
        p = a + best_t * ab
        dist, q, e = _closest_on_boundary(poly, p)
        if dist < EPS:
            direction = poly._outward[e]
        else:
            direction = (q - p) / dist
        return SegmentGap(-best_d, p, direction, e)

    if len(ts) > 0:
        # Tangential touch without interior portion.
        t0 = float(ts[0])
        p = a + t0 * ab
        _, _, e = _closest_on_boundary(poly, p)
        return SegmentGap(0.0, p, poly._outward[e].copy(), e)

    # Fully outside: closest pair involves an endpoint of one of the segments.
    d = a[None, :] - poly._e0
    ta = np.clip(np.einsum("ej,ej->e", d, poly._ev) / poly._elen2, 0.0, 1.0)
    ca = poly._e0 + ta[:, None] * poly._ev
    dista = np.linalg.norm(a[None, :] - ca, axis=1)
    d = b[None, :] - poly._e0
    tb = np.clip(np.einsum("ej,ej->e", d, poly._ev) / poly._elen2, 0.0, 1.0)
    cb = poly._e0 + tb[:, None] * poly._ev
    distb = np.linalg.norm(b[None, :] - cb, axis=1)
    distv, feetv = _point_to_segment(poly.vertices, a, ab)

    cands = [
        (float(dista.min()), a, ca[int(np.argmin(dista))], int(np.argmin(dista))),
        (float(distb.min()), b, cb[int(np.argmin(distb))], int(np.argmin(distb))),
    ]
    iv = int(np.argmin(distv))
    cands.append((float(distv[iv]), feetv[iv], poly.vertices[iv], iv))
    gap, p_seg, p_poly, e = min(cands, key=lambda c: c[0])
    if gap < EPS:
        _, _, e = _closest_on_boundary(poly, p_seg)
        direction = poly._outward[e].copy()
    else:
        direction = (p_seg - p_poly) / gap
        _, _, e = _closest_on_boundary(poly, p_seg)
    return SegmentGap(gap, np.asarray(p_seg, dtype=float), direction, e)


def segment_polygon_distance(a, b, poly: Polygon) -> float:
    """Signed distance from segment ab to the polygon boundary (negative inside)."""
    return segment_gap(a, b, poly).gap


def tetrahedron_volume(p0, p1, p2, p3) -> float:
    """Volume |det(p1-p0, p2-p0, p3-p0)| / 6 of the simplex spanned by four points (mm^3)."""
    pts = np.asarray([p0, p1, p2, p3], dtype=float)
    if pts.shape != (4, 3):
        raise GeometryError("tetrahedron_volume expects four 3D points")
    if not np.all(np.isfinite(pts)):
        raise GeometryError("non-finite point passed to tetrahedron_volume")
    d = pts[1:] - pts[0]
    det = float(np.dot(d[0], np.cross(d[1], d[2])))
    return abs(det) / 6.0


def regular_polygon(center, radius: float, n: int = 32, phase: float = 0.0) -> Polygon:
    """Convenience constructor for discretized circles (CCW)."""
    c = _as_point(center)
    ang = phase + np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return Polygon(np.stack([c[0] + radius * np.cos(ang), c[1] + radius * np.sin(ang)], axis=1))
