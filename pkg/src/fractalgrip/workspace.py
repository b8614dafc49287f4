"""Grasping-space evaluation: limit positions and four-point region volumes.

Four calibration points span the reachable region: the center of the drive
screw's end face plus the midpoint of the most anterior pad of each finger.
Comparing the tetrahedron volume of those points between the open and closed
travel limits quantifies how much space a mode offers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .finger import forward_kinematics
from .geometry import tetrahedron_volume
from .gripper import GripperPose, GripperSpec, pad_to_world
from .linkage import ModeState, finger_base_pose, mode_transform

#: canonical evaluation pose (volumes are rigid-motion invariant anyway)
CANONICAL_POSE = GripperPose(origin=(0.0, 0.0, 0.0), forward=(0.0, 0.0, 1.0), reference=(1.0, 0.0, 0.0))


@dataclass(frozen=True)
class CalibrationPoints:
    """Screw end-face center plus one distal pad midpoint per finger (mm)."""

    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray

    def __post_init__(self):
        pts = np.stack([self.p0, self.p1, self.p2, self.p3])
        if not np.all(np.isfinite(pts)):
            raise GeometryError("non-finite calibration point")
        for a in range(1, 4):
            for b in range(a + 1, 4):
                if np.linalg.norm(pts[a] - pts[b]) < 1e-9:
                    raise GeometryError("finger calibration points must be distinct")

    def as_array(self) -> np.ndarray:
        return np.stack([self.p0, self.p1, self.p2, self.p3])


def calibration_points(
    gripper: GripperSpec, mode: ModeState, nut_u: float, pose: GripperPose = CANONICAL_POSE
) -> CalibrationPoints:
    """Forward kinematics at neutral joints, then extract the four markers."""
    base = finger_base_pose(gripper.linkage, gripper.mount, nut_u)
    pads = forward_kinematics(gripper.finger, gripper.finger.zero_joints(), base_pose=base)
    mids = 0.5 * (pads[:, 0, :] + pads[:, 1, :])
    anterior = mids[int(np.argmax(mids[:, 1]))]  # farthest along the gripper axis

    origin, _, _, fwd = pose.frame()
    p0 = origin + gripper.screw_end_axial * fwd
    finger_pts = []
    for i in range(3):
        az = mode_transform(mode, i).azimuth_rad
        finger_pts.append(pad_to_world(pose, az, anterior))
    return CalibrationPoints(p0=p0, p1=finger_pts[0], p2=finger_pts[1], p3=finger_pts[2])


def limit_positions(
    gripper: GripperSpec, mode: ModeState, pose: GripperPose = CANONICAL_POSE
) -> dict[str, CalibrationPoints]:
    """Calibration points at the travel limits: nut at 0 (close) and L (open)."""
    return {
        "close": calibration_points(gripper, mode, 0.0, pose),
        "open": calibration_points(gripper, mode, gripper.linkage.nut_stroke_max, pose),
    }


def four_point_volume(points: CalibrationPoints) -> float:
    """Tetrahedron volume of the calibration points in cm^3."""
    return tetrahedron_volume(points.p0, points.p1, points.p2, points.p3) / 1000.0


def expansion_percentage(open_vol: float, close_vol: float) -> float:
    """Relative growth of the four-point volume from closed to open, percent."""
    if open_vol <= 0:
        raise GeometryError("open-state volume must be positive")
    return 100.0 * (open_vol - close_vol) / open_vol


def mode_workspace(gripper: GripperSpec, mode: ModeState) -> dict[str, float]:
    lims = limit_positions(gripper, mode)
    open_vol = four_point_volume(lims["open"])
    close_vol = four_point_volume(lims["close"])
    return {
        "open_cm3": open_vol,
        "close_cm3": close_vol,
        "expansion_pct": expansion_percentage(open_vol, close_vol),
    }


def workspace_table(gripper: GripperSpec) -> dict[str, dict[str, float]]:
    """Open/close volumes and expansion for both modes."""
    return {
        "grasping": mode_workspace(gripper, ModeState.named("grasping")),
        "gripping": mode_workspace(gripper, ModeState.named("gripping")),
    }
