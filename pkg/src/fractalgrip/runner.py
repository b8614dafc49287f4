"""Scenario execution: closure, force split, quality, and report assembly."""

from __future__ import annotations

import json
import time
from datetime import datetime, timezone
from typing import Any

import numpy as np

from . import __version__
from .drivetrain import MOTORS, gear_output_speed, is_self_locking, nut_velocity, revolutions_for_travel
from .errors import FractalGripError, SolverFault
from .forces import distribute_forces, grasp_quality
from .gripper import GraspState, close_on_object, slice_profiles
from .scenario import SCHEMA_VERSION, Scenario, serialize
from .workspace import workspace_table

REPORT_SCHEMA = "fractalgrip/report-v1"


def run_scenario(scenario: Scenario, no_meta: bool = False) -> dict[str, Any]:
    """Execute the full pipeline and build a self-contained report dict."""
    t0 = time.perf_counter()
    try:
        if scenario.explicit_profiles is not None:
            profiles = scenario.explicit_profiles
        else:
            profiles = slice_profiles(scenario.solid, scenario.approach, scenario.mode_state)
        state = close_on_object(
            scenario.gripper,
            scenario.solid,
            scenario.mode_state,
            scenario.approach,
            config=scenario.solver,
            profiles=profiles,
        )
        report = build_report(scenario, state)
    except FractalGripError as e:
        raise type(e)(f"{e} [scenario {scenario.name!r}]") from e
    if not no_meta:
        report["meta"] = {
            "generated": datetime.now(timezone.utc).isoformat(),
            "wall_time_s": time.perf_counter() - t0,
            "version": __version__,
        }
    return report


def build_report(scenario: Scenario, state: GraspState) -> dict[str, Any]:
    g = scenario.gripper
    cfg = scenario.solver

    solutions = []
    fingers = []
    for i, rep in enumerate(state.finger_reports):
        sol = distribute_forces(
            g.finger,
            rep.joints,
            rep.contacts,
            cfg.drive_force,
            base_pose=state.base_poses[i],
            mu=cfg.friction,
        )
        solutions.append(sol)
        prof = state.profiles[i]
        fingers.append(
            {
                "index": i,
                "status": rep.status,
                "stalled": rep.stalled,
                "iterations": rep.iterations,
                "joints_rad": rep.joints.tolist(),
                "residual_moment": rep.residual_moment.tolist(),
                "pad_gaps": rep.gaps.tolist(),
                "energy": rep.energy,
                "base_pose": {
                    "x": state.base_poses[i].x,
                    "y": state.base_poses[i].y,
                    "theta_rad": state.base_poses[i].theta,
                },
                "contacts": [
                    {
                        "leaf": c.leaf_index,
                        "point": c.point.tolist(),
                        "normal": c.normal.tolist(),
                        "gap": c.gap,
                    }
                    for c in rep.contacts
                ],
                "forces": [
                    {
                        "leaf": f.leaf_index,
                        "normal_force": f.normal_force,
                        "tangential_capacity": f.tangential_capacity,
                    }
                    for f in sol.forces
                ],
                "force_residual": sol.residual,
                "profile": None if prof is None else prof.vertices.tolist(),
            }
        )

    quality, lock = grasp_quality([r.contacts for r in state.finger_reports], solutions, g.screw)
    motor = MOTORS["screw-drive"]
    mode_motor = MOTORS["mode-switch"]

    return {
        "schema": REPORT_SCHEMA,
        "scenario": {
            "name": scenario.name,
            "digest": scenario.digest,
            "resolved": scenario.resolved,
        },
        "mode": {
            "name": scenario.mode,
            "angle_deg": state.mode.mode_angle_deg,
            "rod_stroke_mm": state.mode.rod_stroke,
        },
        "drive": {
            "closure_travel_mm": state.travel,
            "nut_coordinate_mm": state.nut_coordinate,
            "rocker_angle_deg": state.rocker_angle_deg,
            "grip_acquired": state.grip_acquired,
        },
        "fingers": fingers,
        "quality": {
            "contact_count": quality.contact_count,
            "uniformity": quality.uniformity,
            "wrench_residual": quality.wrench_residual,
            "self_lock_holding": quality.self_lock_holding,
        },
        "drivetrain": {
            "nut_velocity_mm_s": nut_velocity(motor.load_speed, g.screw),
            "revolutions_for_stroke": revolutions_for_travel(g.linkage.nut_stroke_max, g.screw),
            "mode_gear_output_rpm": gear_output_speed(mode_motor.load_speed, g.gears),
            "self_locking": {
                "locking": lock.locking,
                "lead_angle_rad": lock.lead_angle,
                "friction_angle_rad": lock.friction_angle,
            },
        },
        "workspace": workspace_table(g),
    }


def report_to_json(report: dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=1)


def run_scenario_to_json(scenario: Scenario, no_meta: bool = False) -> str:
    return report_to_json(run_scenario(scenario, no_meta=no_meta))
