"""Scenario files: strict JSON schema, loading, resolution, serialization.

A scenario fully describes one simulation: gripper hardware, mode, object,
per-mode approach poses, and solver settings. Loading resolves every default
so the result is self-contained; serializing a resolved scenario and loading
it again yields an identical scenario (round-trip stability), which is what
report digests are computed from.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, replace
from typing import Any

import jsonschema

from .defaults import (
    DEFAULT_FINGER_LEVELS,
    DEFAULT_GEARS,
    DEFAULT_MOUNT,
    DEFAULT_SCREW,
    DEFAULT_SCREW_END_AXIAL,
    DEFAULT_THETA_OPEN_DEG,
    SolverConfig,
)
from .drivetrain import GearTrainSpec, ScrewSpec
from .errors import FractalGripError, ScenarioError
from .finger import FractalFinger, SectorSpec, build_finger
from .geometry import Polygon
from .gripper import GripperPose, GripperSpec, lateral_pose, overhead_pose
from .linkage import LinkageSpec, ModeState, MountSpec, calibrate_linkage
from .solids import Box, Cylinder, RevolvedProfile, Solid, SolidPose, Sphere

SCHEMA_VERSION = "fractalgrip/scenario-v1"

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_VEC3 = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}

_LEVEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["pivot_offset", "half_span"],
    "properties": {
        "pivot_offset": _POS,
        "half_span": _POS,
        "joint_limit_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 90},
        "spring_k": {"type": "number", "minimum": 0},
        "pad_length": _POS,
        "pad_compliance": {"type": "number", "minimum": 0},
    },
}

_POSE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"position": _VEC3, "rpy_deg": _VEC3},
}

_APPROACH_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["overhead", "lateral", "pose"]},
        "height": _NUM,
        "standoff": _NUM,
        "origin": _VEC3,
        "forward": _VEC3,
        "reference": _VEC3,
    },
}

SCENARIO_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "object"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "mode": {"enum": ["grasping", "gripping"]},
        "gripper": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "finger": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "depth": {"type": "integer", "minimum": 0, "maximum": 6},
                        "levels": {"type": "array", "items": _LEVEL_SCHEMA, "minItems": 1},
                    },
                },
                "linkage": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "oscillating_rod": _POS,
                        "motion_rod": _POS,
                        "nut_stroke_max": _POS,
                        "rocker_pivot_radius": _POS,
                        "nut_attach_radius": _POS,
                        "rocker_attach_distance": {"type": ["number", "null"], "exclusiveMinimum": 0},
                        "theta_closed_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 90},
                        "theta_open_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 90},
                    },
                },
                "mount": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"rocker_length": _POS, "mount_tilt_deg": _NUM},
                },
                "screw": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "pitch": _POS,
                        "starts": {"type": "integer", "minimum": 1},
                        "mean_diameter": _POS,
                        "friction_coeff": _POS,
                    },
                },
                "gears": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {f"z{i}": {"type": "integer", "minimum": 12} for i in (1, 2, 3, 4)},
                },
                "screw_end_axial": _POS,
            },
        },
        "object": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type"],
            "properties": {
                "type": {"enum": ["cylinder", "sphere", "box", "revolved", "polygons", "none"]},
                "radius": _POS,
                "height": _POS,
                "size": _VEC3,
                "profile": {
                    "type": "array",
                    "minItems": 2,
                    "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                },
                "profiles": {
                    "type": "array",
                    "minItems": 3,
                    "maxItems": 3,
                    "items": {
                        "type": ["array", "null"],
                        "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                    },
                },
                "pose": _POSE_SCHEMA,
            },
        },
        "approach": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"grasping": _APPROACH_SCHEMA, "gripping": _APPROACH_SCHEMA},
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "penalty": _POS,
                "contact_tol": _POS,
                "moment_tol": _POS,
                "max_iterations": {"type": "integer", "minimum": 1},
                "step_cap": _POS,
                "travel_steps": {"type": "integer", "minimum": 2},
                "refine_bisections": {"type": "integer", "minimum": 0},
                "drive_force": _POS,
                "friction": _POS,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"svg_scale": _POS},
        },
    },
}

DEFAULT_APPROACHES = {
    "grasping": {"kind": "overhead", "height": 187.0},
    "gripping": {"kind": "lateral", "standoff": 75.0, "height": 80.0},
}


@dataclass
class Scenario:
    """Fully resolved scenario ready to simulate."""

    name: str
    mode: str
    gripper: GripperSpec
    mode_state: ModeState
    solid: Solid | None
    explicit_profiles: list[Polygon | None] | None
    approach: GripperPose
    solver: SolverConfig
    svg_scale: float
    resolved: dict[str, Any]

    @property
    def digest(self) -> str:
        return hashlib.sha256(serialize(self).encode()).hexdigest()


def _locate_key(text: str, key: str) -> str:
    """Best-effort line/column of a JSON key for diagnostics."""
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if not m:
        return ""
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return f" (line {line}, column {col})"


def parse_scenario_text(text: str, name_hint: str = "scenario", mode_override: str | None = None) -> Scenario:
    def _reject_constant(s):
        raise ScenarioError(f"non-finite numeric literal {s!r} is not allowed in scenarios")

    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"malformed JSON: {e.msg} (line {e.lineno}, column {e.colno})") from None
    if mode_override is not None:
        if mode_override not in ("grasping", "gripping"):
            raise ScenarioError(f"unknown mode {mode_override!r}")
        if isinstance(raw, dict):
            raw["mode"] = mode_override

    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = ".".join(str(p) for p in e.absolute_path) or "<root>"
        loc = ""
        if e.validator == "additionalProperties":
            bad = re.findall(r"'([^']+)' (?:was|were)", e.message)
            if bad:
                loc = _locate_key(text, bad[0])
        elif e.absolute_path:
            loc = _locate_key(text, str(list(e.absolute_path)[-1]))
        raise ScenarioError(f"schema violation at {path}: {e.message}{loc}")

    try:
        return _resolve(raw, name_hint)
    except ScenarioError:
        raise
    except FractalGripError as e:
        raise ScenarioError(f"infeasible scenario: {e}") from None


def load_scenario(path: str, mode_override: str | None = None) -> Scenario:
    import pathlib
    import sys

    if path == "-":
        return parse_scenario_text(sys.stdin.read(), name_hint="stdin", mode_override=mode_override)
    p = pathlib.Path(path)
    if not p.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    return parse_scenario_text(p.read_text(), name_hint=p.stem, mode_override=mode_override)


def _level_to_dict(s: SectorSpec) -> dict[str, Any]:
    d = {
        "pivot_offset": s.pivot_offset,
        "half_span": s.half_span,
        "joint_limit_deg": math.degrees(s.joint_limit),
        "spring_k": s.spring_k,
    }
    if s.pad_length is not None:
        d["pad_length"] = s.pad_length
        d["pad_compliance"] = s.pad_compliance
    return d


def _resolve(raw: dict[str, Any], name_hint: str) -> Scenario:
    name = raw.get("name", name_hint)
    mode = raw.get("mode", "grasping")
    g = raw.get("gripper", {})

    # finger
    f = g.get("finger", {})
    default_levels = [_level_to_dict(s) for s in DEFAULT_FINGER_LEVELS]
    levels_raw = f.get("levels", default_levels)
    depth = f.get("depth", len(levels_raw) - 1)
    if len(levels_raw) != depth + 1:
        raise ScenarioError(
            f"finger depth {depth} requires {depth + 1} level entries, got {len(levels_raw)}"
        )
    levels = []
    for i, lv in enumerate(levels_raw):
        leaf = i == depth
        merged = {
            "joint_limit_deg": math.degrees(DEFAULT_FINGER_LEVELS[min(i, 2)].joint_limit),
            "spring_k": DEFAULT_FINGER_LEVELS[min(i, 2)].spring_k,
            **lv,
        }
        if leaf:
            merged.setdefault("pad_length", DEFAULT_FINGER_LEVELS[-1].pad_length)
            merged.setdefault("pad_compliance", DEFAULT_FINGER_LEVELS[-1].pad_compliance)
        try:
            levels.append(
                SectorSpec(
                    pivot_offset=merged["pivot_offset"],
                    half_span=merged["half_span"],
                    joint_limit=math.radians(merged["joint_limit_deg"]),
                    spring_k=merged["spring_k"],
                    pad_length=merged.get("pad_length") if leaf else None,
                    pad_compliance=merged.get("pad_compliance") if leaf else None,
                )
            )
        except FractalGripError as e:
            raise ScenarioError(f"gripper.finger.levels[{i}]: {e}") from None
    finger = build_finger(depth, levels)

    # linkage (calibrate the attach distance when not pinned by the file)
    lk = g.get("linkage", {})
    theta_open = lk.get("theta_open_deg", DEFAULT_THETA_OPEN_DEG)
    spec = LinkageSpec(
        oscillating_rod=lk.get("oscillating_rod", 24.67),
        motion_rod=lk.get("motion_rod", 21.12),
        nut_stroke_max=lk.get("nut_stroke_max", 15.0),
        rocker_pivot_radius=lk.get("rocker_pivot_radius", 45.0),
        nut_attach_radius=lk.get("nut_attach_radius", 41.0),
        rocker_attach_distance=lk.get("rocker_attach_distance"),
        theta_closed=lk.get("theta_closed_deg", 2.0),
    )
    if spec.rocker_attach_distance is None:
        spec = calibrate_linkage(theta_open_deg=theta_open, spec=spec)

    mnt = g.get("mount", {})
    mount = MountSpec(
        rocker_length=mnt.get("rocker_length", DEFAULT_MOUNT.rocker_length),
        mount_tilt_deg=mnt.get("mount_tilt_deg", DEFAULT_MOUNT.mount_tilt_deg),
    )

    sc = g.get("screw", {})
    screw = ScrewSpec(
        pitch=sc.get("pitch", DEFAULT_SCREW.pitch),
        starts=sc.get("starts", DEFAULT_SCREW.starts),
        mean_diameter=sc.get("mean_diameter", DEFAULT_SCREW.mean_diameter),
        friction_coeff=sc.get("friction_coeff", DEFAULT_SCREW.friction_coeff),
    )
    ge = g.get("gears", {})
    gears = GearTrainSpec(
        z1=ge.get("z1", DEFAULT_GEARS.z1),
        z2=ge.get("z2", DEFAULT_GEARS.z2),
        z3=ge.get("z3", DEFAULT_GEARS.z3),
        z4=ge.get("z4", DEFAULT_GEARS.z4),
    )
    gripper = GripperSpec(
        finger=finger,
        linkage=spec,
        mount=mount,
        screw=screw,
        gears=gears,
        screw_end_axial=g.get("screw_end_axial", DEFAULT_SCREW_END_AXIAL),
    )

    solid, explicit = _resolve_object(raw["object"])

    approaches = {**DEFAULT_APPROACHES, **raw.get("approach", {})}
    approach = _approach_pose(approaches[mode], mode)

    sv = raw.get("solver", {})
    solver = replace(SolverConfig(), **sv)

    svg_scale = raw.get("output", {}).get("svg_scale", 2.0)

    resolved = {
        "schema": SCHEMA_VERSION,
        "name": name,
        "mode": mode,
        "gripper": {
            "finger": {"depth": depth, "levels": [_level_to_dict(s) for s in levels]},
            "linkage": {
                "oscillating_rod": spec.oscillating_rod,
                "motion_rod": spec.motion_rod,
                "nut_stroke_max": spec.nut_stroke_max,
                "rocker_pivot_radius": spec.rocker_pivot_radius,
                "nut_attach_radius": spec.nut_attach_radius,
                "rocker_attach_distance": spec.rocker_attach_distance,
                "theta_closed_deg": spec.theta_closed,
                "theta_open_deg": theta_open,
            },
            "mount": {"rocker_length": mount.rocker_length, "mount_tilt_deg": mount.mount_tilt_deg},
            "screw": asdict(screw),
            "gears": asdict(gears),
            "screw_end_axial": gripper.screw_end_axial,
        },
        "object": _object_dict(raw["object"]),
        "approach": approaches,
        "solver": asdict(solver),
        "output": {"svg_scale": svg_scale},
    }

    return Scenario(
        name=name,
        mode=mode,
        gripper=gripper,
        mode_state=ModeState.named(mode),
        solid=solid,
        explicit_profiles=explicit,
        approach=approach,
        solver=solver,
        svg_scale=svg_scale,
        resolved=resolved,
    )


def _object_dict(obj: dict[str, Any]) -> dict[str, Any]:
    out = dict(obj)
    if obj["type"] not in ("polygons", "none"):
        pose = obj.get("pose", {})
        out["pose"] = {
            "position": list(pose.get("position", (0.0, 0.0, 0.0))),
            "rpy_deg": list(pose.get("rpy_deg", (0.0, 0.0, 0.0))),
        }
    return out


def _resolve_object(obj: dict[str, Any]) -> tuple[Solid | None, list[Polygon | None] | None]:
    kind = obj["type"]
    pose = obj.get("pose", {})
    sp = SolidPose(
        position=tuple(pose.get("position", (0.0, 0.0, 0.0))),
        rpy_deg=tuple(pose.get("rpy_deg", (0.0, 0.0, 0.0))),
    )

    def need(*fields):
        for fd in fields:
            if fd not in obj:
                raise ScenarioError(f"object.{fd} is required for type '{kind}'")

    try:
        if kind == "none":
            return None, None
        if kind == "cylinder":
            need("radius", "height")
            return Cylinder(radius=obj["radius"], height=obj["height"], pose=sp), None
        if kind == "sphere":
            need("radius")
            return Sphere(radius=obj["radius"], pose=sp), None
        if kind == "box":
            need("size")
            return Box(size=tuple(obj["size"]), pose=sp), None
        if kind == "revolved":
            need("profile")
            return RevolvedProfile(profile=tuple(tuple(p) for p in obj["profile"]), pose=sp), None
        if kind == "polygons":
            need("profiles")
            polys: list[Polygon | None] = []
            for i, pts in enumerate(obj["profiles"]):
                if pts is None:
                    polys.append(None)
                    continue
                try:
                    polys.append(Polygon(pts))
                except FractalGripError as e:
                    raise ScenarioError(f"object.profiles[{i}]: {e}") from None
            return None, polys
    except FractalGripError as e:
        raise ScenarioError(f"object: {e}") from None
    raise ScenarioError(f"unsupported object type {kind!r}")


def _approach_pose(a: dict[str, Any], mode: str) -> GripperPose:
    kind = a.get("kind", "overhead" if mode == "grasping" else "lateral")
    if kind == "overhead":
        return overhead_pose(height=a.get("height", DEFAULT_APPROACHES["grasping"]["height"]))
    if kind == "lateral":
        return lateral_pose(
            standoff=a.get("standoff", DEFAULT_APPROACHES["gripping"]["standoff"]),
            height=a.get("height", DEFAULT_APPROACHES["gripping"]["height"]),
        )
    for fd in ("origin", "forward", "reference"):
        if fd not in a:
            raise ScenarioError(f"approach pose needs '{fd}'")
    return GripperPose(origin=tuple(a["origin"]), forward=tuple(a["forward"]), reference=tuple(a["reference"]))


def serialize(scenario: Scenario) -> str:
    """Canonical resolved JSON (stable key order, exact float round-trip)."""
    return json.dumps(scenario.resolved, sort_keys=True, indent=1)
