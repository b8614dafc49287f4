"""Screw-drive and gear-train arithmetic for the gripper's two actuators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType

from .errors import GeometryError


@dataclass(frozen=True)
class MotorSpec:
    """Micro gear motor catalogue data."""

    output_shaft: str  # "uniaxial" | "biaxial"
    reduction_ratio: float
    voltage: float  # V
    no_load_speed: float  # r/min
    load_speed: float  # r/min
    rated_torque: float  # N*m
    gridlock_torque: float  # N*m

    def __post_init__(self):
        if self.output_shaft not in ("uniaxial", "biaxial"):
            raise GeometryError("output_shaft must be 'uniaxial' or 'biaxial'")
        if self.load_speed > self.no_load_speed:
            raise GeometryError("load_speed cannot exceed no_load_speed")
        if self.rated_torque <= 0 or self.gridlock_torque <= 0:
            raise GeometryError("motor torques must be positive")


#: Built-in motor catalogue; immutable at runtime.
MOTORS = MappingProxyType(
    {
        "screw-drive": MotorSpec(
            output_shaft="uniaxial",
            reduction_ratio=298.0,
            voltage=12.0,
            no_load_speed=60.0,
            load_speed=40.0,
            rated_torque=0.176,
            gridlock_torque=1.07,
        ),
        "mode-switch": MotorSpec(
            output_shaft="biaxial",
            reduction_ratio=1030.0,
            voltage=12.0,
            no_load_speed=16.0,
            load_speed=14.0,
            rated_torque=0.097,
            gridlock_torque=0.32,
        ),
    }
)


@dataclass(frozen=True)
class ScrewSpec:
    """Single/multi-start drive screw."""

    pitch: float  # mm
    starts: int = 1
    mean_diameter: float = 8.0  # mm; default is a stand-in, not catalogue data
    friction_coeff: float = 0.30  # ditto

    def __post_init__(self):
        if self.pitch <= 0 or self.mean_diameter <= 0 or self.friction_coeff <= 0:
            raise GeometryError("screw parameters must be positive")
        if self.starts < 1:
            raise GeometryError("screw needs at least one thread start")


@dataclass(frozen=True)
class GearTrainSpec:
    """Bevel pair (z1/z2) plus spur pair (z3/z4) of the mode-switch train."""

    z1: int
    z2: int
    z3: int
    z4: int

    def __post_init__(self):
        for z in (self.z1, self.z2, self.z3, self.z4):
            if z < 12:
                raise GeometryError("tooth counts below 12 lack load capacity; refused")


def nut_velocity(load_speed: float, screw: ScrewSpec) -> float:
    """Linear nut speed in mm/s for a motor speed in r/min."""
    if load_speed < 0:
        raise GeometryError("load_speed must be non-negative")
    return load_speed * screw.pitch * screw.starts / 60.0


def revolutions_for_travel(travel: float, screw: ScrewSpec) -> float:
    """Screw revolutions needed to advance the nut by `travel` mm."""
    if travel < 0:
        raise GeometryError("travel must be non-negative")
    return travel / (screw.pitch * screw.starts)


def gear_output_speed(n1: float, gears: GearTrainSpec) -> float:
    """Speed of the floating gear seat for input speed n1 (both r/min)."""
    return n1 * (gears.z1 * gears.z3) / (gears.z2 * gears.z4)


@dataclass(frozen=True)
class SelfLockReport:
    locking: bool
    lead_angle: float  # rad
    friction_angle: float  # rad


def is_self_locking(screw: ScrewSpec) -> SelfLockReport:
    """Back-drive check: the screw self-locks when the lead angle stays below
    the equivalent friction angle of the thread contact."""
    lead = math.atan2(screw.pitch * screw.starts, math.pi * screw.mean_diameter)
    friction = math.atan(screw.friction_coeff)
    return SelfLockReport(locking=lead < friction, lead_angle=lead, friction_angle=friction)
