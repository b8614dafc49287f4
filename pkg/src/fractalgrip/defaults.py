"""Default gripper geometry and solver settings.

Every number here that is not motor catalogue data is a desk-scale
calibration artifact chosen so the default gripper closes cleanly on the
bundled scenario objects. All of it can be overridden per scenario file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .drivetrain import GearTrainSpec, ScrewSpec
from .finger import SectorSpec, build_finger
from .linkage import LinkageSpec, MountSpec, calibrate_linkage

#: Published drive screw: 7 mm pitch, single start. Mean diameter and thread
#: friction are stand-ins needed only by the self-locking check.
DEFAULT_SCREW = ScrewSpec(pitch=7.0, starts=1, mean_diameter=8.0, friction_coeff=0.30)

#: Mode-switch train: bevel 20/30 into spur 18/30.
DEFAULT_GEARS = GearTrainSpec(z1=20, z2=30, z3=18, z4=30)

#: Published rocker swing target at full stroke.
DEFAULT_THETA_OPEN_DEG = 32.0

#: Arc-slot swing allowance. Tight slots are what make the lateral pinch leave
#: the outer pads splayed off a bottle-sized cylinder while the axial grasp
#: still flattens all four pads onto its flank.
DEFAULT_JOINT_LIMIT = math.radians(10.0)

#: Penetration budget of the flexible pad. Beyond about 1.2 mm a rigid pad
#: pressed flush starts shedding energy by twisting in place (the pivot sits
#: behind the face, so rotation retracts it); 1 mm keeps flush contact stable.
DEFAULT_PAD_COMPLIANCE = 1.0

#: Self-similar sector stack for the depth-2 finger (desk-scale artifact).
DEFAULT_FINGER_LEVELS = (
    SectorSpec(pivot_offset=18.0, half_span=14.0, joint_limit=DEFAULT_JOINT_LIMIT, spring_k=50.0),
    SectorSpec(pivot_offset=12.0, half_span=9.0, joint_limit=DEFAULT_JOINT_LIMIT, spring_k=30.0),
    SectorSpec(
        pivot_offset=8.0,
        half_span=6.0,
        joint_limit=DEFAULT_JOINT_LIMIT,
        spring_k=15.0,
        pad_length=10.0,
        pad_compliance=DEFAULT_PAD_COMPLIANCE,
    ),
)

DEFAULT_FINGER_DEPTH = 2

DEFAULT_MOUNT = MountSpec(rocker_length=80.0, mount_tilt_deg=20.0)

#: Axial position of the rotating screw's end face (workspace reference point).
DEFAULT_SCREW_END_AXIAL = 60.0


@dataclass(frozen=True)
class SolverConfig:
    """Contact-equilibrium and closure tuning knobs."""

    penalty: float = 10.0  # N/mm, pad penetration stiffness
    contact_tol: float = 0.02  # mm, gap below which a pad counts as contacting
    moment_tol: float = 1e-6  # N*mm, per-joint residual target
    max_iterations: int = 10_000  # relaxation sweeps
    step_cap: float = 0.15  # rad, largest single joint update
    travel_steps: int = 48  # closure schedule resolution
    refine_bisections: int = 10  # stop-travel bisection passes
    drive_force: float = 10.0  # N, per-finger force for the whiffletree split
    friction: float = 0.6  # pad/object Coulomb coefficient


DEFAULT_SOLVER = SolverConfig()


@lru_cache(maxsize=1)
def default_linkage() -> LinkageSpec:
    """Default linkage with the attach distance calibrated to the 32 deg swing."""
    return calibrate_linkage(theta_open_deg=DEFAULT_THETA_OPEN_DEG, spec=LinkageSpec())


@lru_cache(maxsize=1)
def default_finger():
    return build_finger(DEFAULT_FINGER_DEPTH, DEFAULT_FINGER_LEVELS)
