"""Three-finger assembly: world posing, per-finger slicing, and drive closure.

Each finger lives in an axial plane through the gripper axis; its azimuth
comes from the mode state. Closure is driven by the nut: closure travel t
runs from 0 (fully open) to the linkage stroke L (fully closed), i.e. the
linkage coordinate is u = L - t. At every step each finger re-settles
against its profile; the drive stops at the last travel that keeps every pad
within its compliance budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .defaults import (
    DEFAULT_GEARS,
    DEFAULT_SCREW,
    DEFAULT_SCREW_END_AXIAL,
    DEFAULT_MOUNT,
    SolverConfig,
    default_finger,
    default_linkage,
)
from .drivetrain import GearTrainSpec, ScrewSpec
from .equilibrium import EquilibriumReport, relax_joints
from .errors import GeometryError, InterferenceFault
from .finger import FractalFinger
from .geometry import Polygon, Pose2
from .linkage import LinkageSpec, ModeState, MountSpec, finger_base_pose, mode_transform
from .solids import SlicePlane, Solid, slice_solid


@dataclass(frozen=True)
class GripperPose:
    """World placement: origin, forward axis (toward the object), and the
    azimuth-0 radial reference direction (orthonormal to forward)."""

    origin: tuple[float, float, float]
    forward: tuple[float, float, float]
    reference: tuple[float, float, float]

    def frame(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        o = np.asarray(self.origin, dtype=float)
        fwd = np.asarray(self.forward, dtype=float)
        ref = np.asarray(self.reference, dtype=float)
        fwd = fwd / np.linalg.norm(fwd)
        ref = ref - (ref @ fwd) * fwd
        n = np.linalg.norm(ref)
        if n < 1e-9:
            raise GeometryError("gripper reference direction is parallel to the forward axis")
        ref = ref / n
        second = np.cross(fwd, ref)
        return o, ref, second, fwd

    def radial(self, azimuth_rad: float) -> np.ndarray:
        _, ref, second, _ = self.frame()
        return math.cos(azimuth_rad) * ref + math.sin(azimuth_rad) * second


#: overhead pose: vertical enclosure, axis pointing down at the scene origin
def overhead_pose(height: float) -> GripperPose:
    return GripperPose(origin=(0.0, 0.0, height), forward=(0.0, 0.0, -1.0), reference=(1.0, 0.0, 0.0))


#: lateral pose: horizontal pinch approaching along +x at a grab height
def lateral_pose(standoff: float, height: float) -> GripperPose:
    return GripperPose(origin=(-standoff, 0.0, height), forward=(1.0, 0.0, 0.0), reference=(0.0, 1.0, 0.0))


@dataclass(frozen=True)
class GripperSpec:
    """Everything fixed about the hardware (finger, linkage, drives)."""

    finger: FractalFinger
    linkage: LinkageSpec
    mount: MountSpec = DEFAULT_MOUNT
    screw: ScrewSpec = DEFAULT_SCREW
    gears: GearTrainSpec = DEFAULT_GEARS
    screw_end_axial: float = DEFAULT_SCREW_END_AXIAL


def default_gripper() -> GripperSpec:
    return GripperSpec(finger=default_finger(), linkage=default_linkage())


@dataclass
class GraspState:
    """Outcome of one closure run."""

    mode: ModeState
    travel: float  # closure progress from fully open (mm)
    nut_coordinate: float  # linkage coordinate u = L - travel
    rocker_angle_deg: float
    finger_reports: list[EquilibriumReport]
    base_poses: list[Pose2]
    profiles: list[Polygon | None]
    grip_acquired: bool

    @property
    def contacts_per_finger(self) -> list[int]:
        return [len(r.contacts) for r in self.finger_reports]


def finger_planes(pose: GripperPose, mode: ModeState) -> list[SlicePlane]:
    origin, _, _, fwd = pose.frame()
    planes = []
    for i in range(3):
        az = mode_transform(mode, i).azimuth_rad
        planes.append(SlicePlane(origin=origin, u_axis=pose.radial(az), v_axis=fwd))
    return planes


def slice_profiles(
    obj: Solid | None, pose: GripperPose, mode: ModeState, chord_tol: float = 0.05
) -> list[Polygon | None]:
    """Per-finger planar cross-sections of the object; None where the plane misses.

    Congruent slices (axisymmetric object on the gripper axis) are shared so the
    per-finger solves hit identical inputs, which also keeps them symmetric.
    """
    if obj is None:
        return [None, None, None]
    out: list[Polygon | None] = []
    for plane in finger_planes(pose, mode):
        poly = slice_solid(obj, plane, chord_tol=chord_tol)
        if poly is not None:
            for prev in out:
                if (
                    prev is not None
                    and prev.vertices.shape == poly.vertices.shape
                    and np.allclose(prev.vertices, poly.vertices, atol=1e-9)
                ):
                    poly = prev
                    break
        out.append(poly)
    return out


def pad_to_world(pose: GripperPose, azimuth_rad: float, pts_plane: np.ndarray) -> np.ndarray:
    """Lift finger-plane points (..., 2) to 3D world coordinates."""
    origin, _, _, fwd = pose.frame()
    r = pose.radial(azimuth_rad)
    pts = np.asarray(pts_plane, dtype=float)
    return origin + pts[..., 0:1] * r + pts[..., 1:2] * fwd


def _relax_all(gripper, profiles, nut_u, config, warm):
    base = finger_base_pose(gripper.linkage, gripper.mount, nut_u)
    reports = []
    for i in range(3):
        # identical profile + identical warm start -> identical settle; reuse it
        reused = None
        for j in range(i):
            same_profile = profiles[j] is profiles[i]
            same_warm = warm is None or np.array_equal(warm[j], warm[i])
            if same_profile and same_warm:
                reused = reports[j]
                break
        if reused is not None:
            reports.append(reused)
            continue
        init = warm[i] if warm is not None else None
        reports.append(relax_joints(gripper.finger, profiles[i], base, config, initial_joints=init))
    return base, reports


def close_on_object(
    gripper: GripperSpec,
    obj: Solid | None,
    mode: ModeState,
    pose: GripperPose,
    config: SolverConfig | None = None,
    profiles: list[Polygon | None] | None = None,
    schedule: np.ndarray | None = None,
) -> GraspState:
    """Drive the nut until a pad would exceed its compliance or travel runs out.

    `profiles` may be given directly (explicit per-finger polygons); otherwise
    the object is sliced by the three finger planes once up front.
    """
    cfg = config or SolverConfig()
    stroke = gripper.linkage.nut_stroke_max
    if profiles is None:
        profiles = slice_profiles(obj, pose, mode)
    if len(profiles) != 3:
        raise GeometryError("need one profile (or None) per finger")

    travels = (
        np.asarray(schedule, dtype=float)
        if schedule is not None
        else np.linspace(0.0, stroke, cfg.travel_steps + 1)
    )
    if travels[0] != 0.0 or np.any(np.diff(travels) <= 0) or travels[-1] > stroke + 1e-9:
        raise GeometryError("closure schedule must increase from 0 to at most the stroke")

    compliance = gripper.finger.pad_compliance
    # path-following steps only need to stay on the equilibrium branch; the
    # accepted state is re-settled at the full tolerance afterwards
    rough = replace(cfg, moment_tol=max(cfg.moment_tol, 1e-3))

    def over_budget(reports):
        return any(np.any(r.gaps < -compliance - 1e-9) for r in reports)

    base, reports = _relax_all(gripper, profiles, stroke - travels[0], rough, warm=None)
    if over_budget(reports):
        raise InterferenceFault("object already interferes with the gripper at the open pose")

    state = (travels[0], base, reports)
    grip = False
    for t in travels[1:]:
        warm = [r.joints for r in state[2]]
        base, reports = _relax_all(gripper, profiles, stroke - t, rough, warm=warm)
        if over_budget(reports):
            # bisect between the last valid travel and the violating one
            lo_t, lo_state = state[0], state
            hi_t = t
            for _ in range(cfg.refine_bisections):
                mid = 0.5 * (lo_t + hi_t)
                warm = [r.joints for r in lo_state[2]]
                b2, r2 = _relax_all(gripper, profiles, stroke - mid, rough, warm=warm)
                if over_budget(r2):
                    hi_t = mid
                else:
                    lo_t, lo_state = mid, (mid, b2, r2)
            state = lo_state
            grip = True
            break
        state = (t, base, reports)

    # tighten the accepted state to the configured tolerance; back off travel a
    # hair if the tightening itself tips a pad over the compliance budget
    travel = state[0]
    for _ in range(6):
        warm = [r.joints for r in state[2]]
        base, reports = _relax_all(gripper, profiles, stroke - travel, cfg, warm=warm)
        if not over_budget(reports):
            break
        travel = max(0.0, travel - stroke / max(1, cfg.travel_steps) / 2 ** cfg.refine_bisections)
    state = (travel, base, reports)

    travel, base, reports = state
    from .linkage import rocker_angle

    return GraspState(
        mode=mode,
        travel=float(travel),
        nut_coordinate=float(stroke - travel),
        rocker_angle_deg=rocker_angle(stroke - travel, gripper.linkage),
        finger_reports=reports,
        base_poses=[base, base, base],
        profiles=list(profiles),
        grip_acquired=grip,
    )
