"""Quasi-static simulator for a three-finger fractal gripper with mode switching."""

__version__ = "0.1.0"

from .drivetrain import (  # noqa: F401
    MOTORS,
    GearTrainSpec,
    MotorSpec,
    ScrewSpec,
    gear_output_speed,
    is_self_locking,
    nut_velocity,
    revolutions_for_travel,
)
from .equilibrium import (  # noqa: F401
    ContactPoint,
    EquilibriumReport,
    detect_contacts,
    potential_energy,
    relax_joints,
)
from .finger import FractalFinger, SectorSpec, build_finger, forward_kinematics, spring_torques  # noqa: F401
from .forces import ContactForce, GraspQuality, distribute_forces, grasp_quality  # noqa: F401
from .geometry import Polygon, Pose2, segment_polygon_distance, tetrahedron_volume  # noqa: F401
from .gripper import GraspState, GripperPose, GripperSpec, close_on_object, default_gripper  # noqa: F401
from .linkage import (  # noqa: F401
    LinkageSpec,
    ModeState,
    calibrate_linkage,
    mode_transform,
    rocker_angle,
    rod_stroke_for_angle,
)
from .solids import Box, Cylinder, RevolvedProfile, SlicePlane, Sphere, slice_solid  # noqa: F401
from .workspace import expansion_percentage, four_point_volume, limit_positions  # noqa: F401
