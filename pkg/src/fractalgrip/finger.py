"""Fractal finger: a complete binary tree of spring-returned rotating sectors.

Tree layout (breadth-first indices, root = 0, children of i at 2i+1 / 2i+2):
the root sector pivots on the rack; each sector carries its two children at
lateral offsets +-half_span, advanced by the child level's pivot_offset along
the midline. Leaf sectors carry a flat contact pad facing the local +y axis.
At the neutral pose (all joint angles zero) the pads form a straight fan row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .geometry import Pose2

JOINT_EPS = 1e-12


@dataclass(frozen=True)
class SectorSpec:
    """Per-level sector geometry and spring data.

    pivot_offset   mm, from the parent pivot to this pivot along the parent midline
    half_span      mm, lateral offset of child pivots (or pad standoff at leaves)
    joint_limit    rad, symmetric rotation limit about neutral
    spring_k       N*mm/rad, return-spring torsional stiffness
    pad_length     mm, contact pad length (leaf levels only)
    pad_compliance mm, penetration budget of the flexible pad (leaf levels only)
    """

    pivot_offset: float
    half_span: float
    joint_limit: float
    spring_k: float
    pad_length: float | None = None
    pad_compliance: float | None = None

    def __post_init__(self):
        if self.pivot_offset <= 0 or self.half_span <= 0:
            raise GeometryError("sector lengths must be positive")
        if not 0 < self.joint_limit < np.pi / 2:
            raise GeometryError("joint_limit must lie in (0, pi/2)")
        if self.spring_k < 0:
            raise GeometryError("spring_k must be non-negative")
        if self.pad_length is not None and self.pad_length <= 0:
            raise GeometryError("pad_length must be positive")
        if self.pad_compliance is not None and self.pad_compliance < 0:
            raise GeometryError("pad_compliance must be non-negative")


class FractalFinger:
    """Immutable finger built from one SectorSpec per tree level."""

    __slots__ = (
        "depth",
        "levels",
        "base_pose",
        "node_count",
        "level_of",
        "parent",
        "local_pivot",
        "joint_limits",
        "spring_k",
        "leaves",
        "leaves_under",
        "pad_length",
        "pad_compliance",
    )

    def __init__(self, depth: int, levels: tuple[SectorSpec, ...], base_pose: Pose2):
        self.depth = depth
        self.levels = levels
        self.base_pose = base_pose
        n = 2 ** (depth + 1) - 1
        self.node_count = n
        self.level_of = np.array([int(np.floor(np.log2(i + 1))) for i in range(n)])
        self.parent = np.array([-1] + [(i - 1) // 2 for i in range(1, n)])

        local = np.zeros((n, 2))
        local[0] = (0.0, levels[0].pivot_offset)
        for i in range(1, n):
            lvl = int(self.level_of[i])
            side = 1.0 if i % 2 == 0 else -1.0  # 2p+1 left, 2p+2 right
            local[i] = (side * levels[lvl - 1].half_span, levels[lvl].pivot_offset)
        self.local_pivot = local
        self.local_pivot.setflags(write=False)

        self.joint_limits = np.array([levels[int(l)].joint_limit for l in self.level_of])
        self.spring_k = np.array([levels[int(l)].spring_k for l in self.level_of])
        self.joint_limits.setflags(write=False)
        self.spring_k.setflags(write=False)

        first_leaf = 2**depth - 1
        self.leaves = np.arange(first_leaf, n)
        # leaf positions (indices into the leaf array) below each node
        under: list[np.ndarray] = []
        for i in range(n):
            lo, hi = i, i
            while lo < first_leaf:
                lo = 2 * lo + 1
                hi = 2 * hi + 2
            under.append(np.arange(lo - first_leaf, hi - first_leaf + 1))
        self.leaves_under = tuple(under)
        leaf_spec = levels[depth]
        if leaf_spec.pad_length is None or leaf_spec.pad_compliance is None:
            raise GeometryError("leaf level must define pad_length and pad_compliance")
        self.pad_length = float(leaf_spec.pad_length)
        self.pad_compliance = float(leaf_spec.pad_compliance)

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)

    def zero_joints(self) -> np.ndarray:
        return np.zeros(self.node_count)

    def clamp_joints(self, angles: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(angles, dtype=float), -self.joint_limits, self.joint_limits)

    def validate_joints(self, angles: np.ndarray):
        angles = np.asarray(angles, dtype=float)
        if angles.shape != (self.node_count,):
            raise GeometryError(f"expected {self.node_count} joint angles, got {angles.shape}")
        if not np.all(np.isfinite(angles)):
            raise GeometryError("non-finite joint angle")
        if np.any(np.abs(angles) > self.joint_limits + 1e-9):
            worst = int(np.argmax(np.abs(angles) - self.joint_limits))
            raise GeometryError(
                f"joint {worst} angle {angles[worst]:.6f} rad exceeds limit {self.joint_limits[worst]:.6f}"
            )

    def ancestors(self, node: int):
        """Chain from `node` up to the root, inclusive."""
        chain = [node]
        while self.parent[chain[-1]] >= 0:
            chain.append(int(self.parent[chain[-1]]))
        return chain


def build_finger(
    depth: int,
    spec_per_level: list[SectorSpec] | tuple[SectorSpec, ...],
    base_pose: Pose2 | None = None,
) -> FractalFinger:
    """Construct a finger of 2^(depth+1)-1 self-similar sectors.

    Rejects geometry whose neutral-pose pads already overlap, which would make
    the contact solve start from an impossible state.
    """
    if depth < 0:
        raise GeometryError("depth must be >= 0")
    specs = tuple(spec_per_level)
    if len(specs) != depth + 1:
        raise GeometryError(f"need exactly {depth + 1} level specs for depth {depth}, got {len(specs)}")
    finger = FractalFinger(depth, specs, base_pose or Pose2())

    pads = forward_kinematics(finger, finger.zero_joints(), base_pose=Pose2())
    for i in range(len(pads)):
        for j in range(i + 1, len(pads)):
            if _segments_properly_intersect(pads[i], pads[j]) or _pads_overlap_laterally(pads[i], pads[j]):
                raise GeometryError(
                    f"neutral-pose pads {i} and {j} overlap; "
                    "reduce half_span/pad_length ratios or pivot offsets"
                )
    return finger


def _segments_properly_intersect(s1: np.ndarray, s2: np.ndarray) -> bool:
    p, r = s1[0], s1[1] - s1[0]
    q, s = s2[0], s2[1] - s2[0]
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-12:
        return False
    qp = q - p
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    return 1e-9 < t < 1 - 1e-9 and 1e-9 < u < 1 - 1e-9


def _pads_overlap_laterally(s1: np.ndarray, s2: np.ndarray) -> bool:
    # collinear neutral pads: flag x-range overlap beyond touching
    if abs(s1[0][1] - s2[0][1]) > 1e-9 or abs(s1[1][1] - s2[1][1]) > 1e-9:
        return False
    lo1, hi1 = sorted((s1[0][0], s1[1][0]))
    lo2, hi2 = sorted((s2[0][0], s2[1][0]))
    return min(hi1, hi2) - max(lo1, lo2) > 1e-9


def chain_frames(finger: FractalFinger, angles: np.ndarray, base_pose: Pose2 | None = None):
    """World pivot position and accumulated rotation (cos, sin) per node."""
    base = base_pose if base_pose is not None else finger.base_pose
    n = finger.node_count
    origins = np.zeros((n, 2))
    cos_acc = np.zeros(n)
    sin_acc = np.zeros(n)
    cb, sb = base.rotation()
    for i in range(n):
        p = finger.parent[i]
        if p < 0:
            pc, ps = cb, sb
            px, py = base.x, base.y
        else:
            pc, ps = cos_acc[p], sin_acc[p]
            px, py = origins[p]
        lx, ly = finger.local_pivot[i]
        origins[i] = (px + pc * lx - ps * ly, py + ps * lx + pc * ly)
        ca, sa = np.cos(angles[i]), np.sin(angles[i])
        cos_acc[i] = pc * ca - ps * sa
        sin_acc[i] = ps * ca + pc * sa
    return origins, cos_acc, sin_acc


def forward_kinematics(
    finger: FractalFinger, angles: np.ndarray, base_pose: Pose2 | None = None
) -> np.ndarray:
    """Pad segments (leaf order) as an array of shape (2^depth, 2, 2)."""
    angles = np.asarray(angles, dtype=float)
    finger.validate_joints(angles)
    origins, cos_acc, sin_acc = chain_frames(finger, angles, base_pose)
    half = finger.pad_length / 2.0
    standoff = finger.levels[finger.depth].half_span
    local = np.array([[-half, standoff], [half, standoff]])
    segs = np.zeros((finger.leaf_count, 2, 2))
    for k, leaf in enumerate(finger.leaves):
        c, s = cos_acc[leaf], sin_acc[leaf]
        ox, oy = origins[leaf]
        segs[k, :, 0] = ox + c * local[:, 0] - s * local[:, 1]
        segs[k, :, 1] = oy + s * local[:, 0] + c * local[:, 1]
    return segs


def pad_normals(finger: FractalFinger, angles: np.ndarray, base_pose: Pose2 | None = None) -> np.ndarray:
    """Outward facing direction (local +y) of each pad, shape (2^depth, 2)."""
    _, cos_acc, sin_acc = chain_frames(finger, angles, base_pose)
    out = np.zeros((finger.leaf_count, 2))
    for k, leaf in enumerate(finger.leaves):
        out[k] = (-sin_acc[leaf], cos_acc[leaf])
    return out


def spring_torques(finger: FractalFinger, angles: np.ndarray) -> np.ndarray:
    """Restoring torque -k*theta per node (N*mm)."""
    angles = np.asarray(angles, dtype=float)
    finger.validate_joints(angles)
    return -finger.spring_k * angles


def spring_energy(finger: FractalFinger, angles: np.ndarray) -> float:
    """Total elastic energy 1/2 sum k theta^2 (N*mm)."""
    angles = np.asarray(angles, dtype=float)
    return 0.5 * float(np.sum(finger.spring_k * angles * angles))
