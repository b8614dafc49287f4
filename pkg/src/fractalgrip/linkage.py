"""Rocker/slider linkage and the mode-switch coupling.

Planar model per finger (x radial from the screw axis, y axial/forward):
the rocker pivots at (rocker_pivot_radius, 0) and tilts outward by the
opening angle theta measured from the screw axis. The oscillating rod couples
the rocker's middle hole, `rocker_attach_distance` up the rocker, to the
nut fitting which slides along the axis at `nut_attach_radius`. Increasing
`nut_travel` (0 = closed) opens the rocker from theta_closed to theta_max.

Mode switching rotates two of the three finger planes about the gripper axis
by +-mode_angle; the coupled motion rod slides through a pivoting eye, and
its engagement change is the published 0-19 mm stroke.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

from scipy.optimize import brentq

from .errors import GeometryError, KinematicFault
from .geometry import Pose2

GRASPING_ANGLE_DEG = 0.0
GRIPPING_ANGLE_DEG = 50.0
FINGER_BASE_AZIMUTHS_DEG = (0.0, 120.0, 240.0)


@dataclass(frozen=True)
class LinkageSpec:
    """Rocker/nut/rod geometry. Angles in degrees (config-facing type)."""

    oscillating_rod: float = 24.67  # mm
    motion_rod: float = 21.12  # mm
    nut_stroke_max: float = 15.0  # mm
    rocker_pivot_radius: float = 45.0  # mm
    nut_attach_radius: float = 41.0  # mm
    rocker_attach_distance: float | None = None  # mm; None until calibrated
    theta_closed: float = 2.0  # deg

    def __post_init__(self):
        for name in ("oscillating_rod", "motion_rod", "nut_stroke_max", "rocker_pivot_radius", "nut_attach_radius"):
            if getattr(self, name) <= 0:
                raise GeometryError(f"{name} must be positive")
        if self.rocker_attach_distance is not None and self.rocker_attach_distance <= 0:
            raise GeometryError("rocker_attach_distance must be positive")
        if not 0 < self.theta_closed < 90:
            raise GeometryError("theta_closed must lie in (0, 90) degrees")


@dataclass(frozen=True)
class MountSpec:
    """How the fractal rack sits on the rocker."""

    rocker_length: float = 80.0  # mm, pivot to rack attach point
    mount_tilt_deg: float = 20.0  # pad-facing pre-rotation relative to the rocker normal

    def __post_init__(self):
        if self.rocker_length <= 0:
            raise GeometryError("rocker_length must be positive")


def _nut_axial_at_closed(spec: LinkageSpec, d: float) -> float:
    """Axial nut position at travel 0, derived so theta(0) == theta_closed."""
    tc = math.radians(spec.theta_closed)
    dr = spec.rocker_pivot_radius - spec.nut_attach_radius + d * math.sin(tc)
    disc = spec.oscillating_rod**2 - dr * dr
    if disc < 0:
        raise KinematicFault(
            "oscillating rod cannot close at theta_closed: radial separation "
            f"{dr:.3f} mm exceeds rod length {spec.oscillating_rod:.3f} mm"
        )
    return d * math.cos(tc) + math.sqrt(disc)


def _theta_branches(spec: LinkageSpec, d: float, nut_y: float) -> tuple[float, float]:
    """Both circle-intersection solutions for the rocker angle (radians)."""
    nx = spec.nut_attach_radius - spec.rocker_pivot_radius
    ny = nut_y
    np_len = math.hypot(nx, ny)
    cos_delta = (np_len**2 + d * d - spec.oscillating_rod**2) / (2.0 * np_len * d)
    if not -1.0 <= cos_delta <= 1.0:
        raise KinematicFault(
            "linkage triangle violated: |pivot-nut| "
            f"{np_len:.3f} mm, attach {d:.3f} mm, rod {spec.oscillating_rod:.3f} mm "
            "cannot form a closed loop"
        )
    delta = math.acos(cos_delta)
    phi = math.atan2(nx, ny)  # angle of the nut direction measured from the screw axis
    return phi + delta, phi - delta


def rocker_angle(nut_travel: float, spec: LinkageSpec) -> float:
    """Rocker opening angle (deg, from the screw axis) at a nut travel in [0, L]."""
    if spec.rocker_attach_distance is None:
        raise GeometryError("LinkageSpec.rocker_attach_distance unset; run calibrate_linkage first")
    if not 0.0 <= nut_travel <= spec.nut_stroke_max + 1e-9:
        raise GeometryError(f"nut_travel {nut_travel} outside [0, {spec.nut_stroke_max}]")
    d = spec.rocker_attach_distance
    y0 = _nut_axial_at_closed(spec, d)
    hi0, lo0 = _theta_branches(spec, d, y0)
    target = math.radians(spec.theta_closed)
    sign_hi = abs(hi0 - target) <= abs(lo0 - target)
    hi, lo = _theta_branches(spec, d, y0 - nut_travel)
    return math.degrees(hi if sign_hi else lo)


def calibrate_linkage(
    theta_open_deg: float = 32.0,
    spec: LinkageSpec | None = None,
) -> LinkageSpec:
    """Solve the rocker attach distance so the stroke maps theta_closed -> theta_open.

    theta(0) == theta_closed holds by construction; the single remaining free
    parameter is found by bracketing the open-angle residual.
    """
    spec = spec or LinkageSpec()
    if not spec.theta_closed < theta_open_deg < 90.0:
        raise KinematicFault(
            f"open angle {theta_open_deg} deg must lie between theta_closed "
            f"({spec.theta_closed} deg) and 90 deg"
        )

    def residual(d: float) -> float | None:
        try:
            trial = replace(spec, rocker_attach_distance=d)
            return rocker_angle(spec.nut_stroke_max, trial) - theta_open_deg
        except KinematicFault:
            return None

    lo = None
    scan = [0.5 * 1.25**k for k in range(40)]
    for d in scan:
        r = residual(d)
        if r is None:
            continue
        if lo is not None and r * lo[1] <= 0:
            d_star = brentq(lambda x: residual(x), lo[0], d, xtol=1e-12, rtol=1e-14)
            out = replace(spec, rocker_attach_distance=float(d_star))
            # calibration is only accepted if the whole stroke closes
            for u in (0.0, 0.25, 0.5, 0.75, 1.0):
                rocker_angle(u * spec.nut_stroke_max, out)
            return out
        lo = (d, r)
    raise KinematicFault(
        f"no attach distance reaches theta_open {theta_open_deg} deg with rod "
        f"{spec.oscillating_rod} mm over a {spec.nut_stroke_max} mm stroke; "
        "the closure triangle inequality fails across the feasible range"
    )


def finger_base_pose(spec: LinkageSpec, mount: MountSpec, nut_travel: float) -> Pose2:
    """Pose of the fractal rack origin in the finger plane at a given travel."""
    theta = math.radians(rocker_angle(nut_travel, spec))
    tip_x = spec.rocker_pivot_radius + mount.rocker_length * math.sin(theta)
    tip_y = mount.rocker_length * math.cos(theta)
    alpha = math.pi / 2 - theta + math.radians(mount.mount_tilt_deg)
    return Pose2(tip_x, tip_y, alpha)


# --- mode switching -------------------------------------------------------


@dataclass(frozen=True)
class ModeCoupling:
    """Crank pin on the rotating seat driving a rod through a pivoting eye."""

    eye_radius: float = 25.0  # mm, fixed eye pivot radius
    pin_radius: float | None = None  # mm, calibrated
    start_offset_deg: float = 0.0
    full_angle_deg: float = 50.0
    full_stroke: float = 19.0  # mm


def _engagement(coupling: ModeCoupling, pin_radius: float, angle_deg: float) -> float:
    """Eye-to-pin distance: the pin rotates about the axis, the eye stays put."""
    phi = math.radians(coupling.start_offset_deg + angle_deg)
    ax, ay = coupling.eye_radius, 0.0
    bx, by = pin_radius * math.cos(phi), pin_radius * math.sin(phi)
    return math.hypot(bx - ax, by - ay)


def calibrate_mode_coupling(motion_rod: float = 21.12, coupling: ModeCoupling | None = None) -> ModeCoupling:
    """Find the pin radius giving the full stroke, then check rod reach."""
    coupling = coupling or ModeCoupling()

    def stroke(r: float) -> float:
        return _engagement(coupling, r, coupling.full_angle_deg) - _engagement(coupling, r, 0.0)

    lo, hi = 1e-3, coupling.eye_radius - 1e-6
    if stroke(hi) < coupling.full_stroke:
        raise KinematicFault(
            f"mode coupling cannot reach a {coupling.full_stroke} mm stroke over "
            f"{coupling.full_angle_deg} deg with eye radius {coupling.eye_radius} mm"
        )
    r_star = brentq(lambda r: stroke(r) - coupling.full_stroke, lo, hi, xtol=1e-12, rtol=1e-14)
    max_engagement = _engagement(coupling, r_star, coupling.full_angle_deg)
    if max_engagement > motion_rod:
        raise KinematicFault(
            f"motion rod {motion_rod} mm shorter than the {max_engagement:.2f} mm "
            "eye-to-pin reach at full deflection"
        )
    return replace(coupling, pin_radius=float(r_star))


@lru_cache(maxsize=8)
def _default_coupling(motion_rod: float) -> ModeCoupling:
    return calibrate_mode_coupling(motion_rod=motion_rod)


def rod_stroke_for_angle(mode_angle_deg: float, coupling: ModeCoupling | None = None) -> float:
    """Motion-rod sliding stroke (mm) at a mode angle in [0, 50] degrees."""
    c = coupling or _default_coupling(21.12)
    if c.pin_radius is None:
        c = calibrate_mode_coupling(coupling=c)
    if not 0.0 <= mode_angle_deg <= c.full_angle_deg + 1e-9:
        raise GeometryError(f"mode angle {mode_angle_deg} outside [0, {c.full_angle_deg}] deg")
    return _engagement(c, c.pin_radius, mode_angle_deg) - _engagement(c, c.pin_radius, 0.0)


@dataclass(frozen=True)
class ModeState:
    """Mode actuator state; angle and rod stroke stay kinematically consistent."""

    mode_angle_deg: float
    rod_stroke: float

    @classmethod
    def from_angle(cls, mode_angle_deg: float, coupling: ModeCoupling | None = None) -> "ModeState":
        return cls(mode_angle_deg=mode_angle_deg, rod_stroke=rod_stroke_for_angle(mode_angle_deg, coupling))

    @classmethod
    def named(cls, mode: str) -> "ModeState":
        try:
            angle = {"grasping": GRASPING_ANGLE_DEG, "gripping": GRIPPING_ANGLE_DEG}[mode]
        except KeyError:
            raise GeometryError(f"unknown mode {mode!r}; expected 'grasping' or 'gripping'") from None
        return cls.from_angle(angle)


@dataclass(frozen=True)
class FingerFrame:
    """Azimuthal placement of one finger plane about the gripper axis."""

    azimuth_rad: float

    def radial_in_gripper(self) -> tuple[float, float, float]:
        """Radial unit vector in gripper coordinates (x = reference azimuth)."""
        return (math.cos(self.azimuth_rad), math.sin(self.azimuth_rad), 0.0)


def mode_transform(mode: ModeState, finger_index: int) -> FingerFrame:
    """Finger plane azimuth: finger 0 is fixed; 1 and 2 counter-rotate by the mode angle."""
    if finger_index not in (0, 1, 2):
        raise GeometryError("finger_index must be 0, 1, or 2")
    base = math.radians(FINGER_BASE_AZIMUTHS_DEG[finger_index])
    swing = math.radians(mode.mode_angle_deg)
    if finger_index == 1:
        base += swing
    elif finger_index == 2:
        base -= swing
    return FingerFrame(azimuth_rad=base % (2.0 * math.pi))
