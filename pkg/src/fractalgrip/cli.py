"""Command-line interface.

Verbs:
    run         simulate one or more scenario files (or '-' for stdin)
    drivetrain  screw/gear numbers from flags, no scenario needed
    workspace   open/close four-point volumes and expansion per mode
    calibrate   solve the rocker attach distance for given swing targets
    render      re-render a saved report as SVG

Exit codes: 0 success, 1 scenario/usage error, 2 solver fault, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys
from dataclasses import asdict, replace

from .drivetrain import (
    MOTORS,
    GearTrainSpec,
    ScrewSpec,
    gear_output_speed,
    is_self_locking,
    nut_velocity,
    revolutions_for_travel,
)
from .errors import FractalGripError, ScenarioError, SolverFault
from .gripper import GripperSpec, default_gripper
from .linkage import LinkageSpec, calibrate_linkage
from .runner import report_to_json, run_scenario
from .scenario import Scenario, load_scenario
from .svg import render_svg
from .workspace import workspace_table


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ScenarioError(f"invalid arguments: {message}")


def _shared_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="scenario file supplying gripper/solver settings")
    p.add_argument("--out", "-o", help="output path ('-' for stdout)")
    p.add_argument("--svg", help="also write an SVG rendering to this path")
    p.add_argument("--mode", choices=["grasping", "gripping"], help="override the scenario mode")
    p.add_argument("--no-meta", action="store_true", help="omit timestamps for reproducible output")
    return p


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_flags()
    parser = _Parser(prog="fractalgrip", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[shared], help="simulate scenario files")
    p_run.add_argument("scenarios", nargs="+", help="scenario JSON paths, or '-' for stdin")

    p_dt = sub.add_parser("drivetrain", parents=[shared], help="screw and gear-train numbers")
    p_dt.add_argument("--motor", choices=sorted(MOTORS), default="screw-drive")
    p_dt.add_argument("--load-speed", type=float, help="motor speed in r/min (default: catalogue)")
    p_dt.add_argument("--pitch", type=float, default=7.0)
    p_dt.add_argument("--starts", type=int, default=1)
    p_dt.add_argument("--mean-diameter", type=float, default=8.0)
    p_dt.add_argument("--friction-coeff", type=float, default=0.30)
    p_dt.add_argument("--travel", type=float, default=15.0, help="nut travel in mm")
    p_dt.add_argument("--teeth", default="20,30,18,30", help="z1,z2,z3,z4 of the mode-switch train")
    p_dt.add_argument("--input-speed", type=float, help="mode-switch input speed in r/min")

    sub.add_parser("workspace", parents=[shared], help="four-point volumes per mode")

    p_cal = sub.add_parser("calibrate", parents=[shared], help="calibrate the rocker linkage")
    p_cal.add_argument("--theta-open", type=float, default=32.0)
    p_cal.add_argument("--theta-closed", type=float, default=2.0)
    p_cal.add_argument("--stroke", type=float, default=15.0)
    p_cal.add_argument("--oscillating-rod", type=float, default=24.67)
    p_cal.add_argument("--motion-rod", type=float, default=21.12)
    p_cal.add_argument("--rocker-pivot-radius", type=float, default=45.0)
    p_cal.add_argument("--nut-attach-radius", type=float, default=41.0)

    p_ren = sub.add_parser("render", parents=[shared], help="render a saved report to SVG")
    p_ren.add_argument("--report", required=True, help="report JSON path ('-' for stdin)")
    p_ren.add_argument("--scenario", help="scenario file (defaults to the copy embedded in the report)")

    return parser


def _write(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        pathlib.Path(out).write_text(text)


def _cmd_run(args) -> int:
    many = len(args.scenarios) > 1
    out_dir = None
    if many and args.out and args.out != "-":
        out_dir = pathlib.Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    for path in args.scenarios:
        scenario = load_scenario(path, mode_override=args.mode)
        report = run_scenario(scenario, no_meta=args.no_meta)
        text = report_to_json(report)
        if out_dir is not None:
            (out_dir / f"{scenario.name}.report.json").write_text(text)
        else:
            _write(text, args.out)
        if args.svg:
            svg_path = pathlib.Path(args.svg)
            if many:
                svg_path.mkdir(parents=True, exist_ok=True)
                (svg_path / f"{scenario.name}.svg").write_text(render_svg(report, scenario))
            else:
                svg_path.write_text(render_svg(report, scenario))
    return 0


def _cmd_drivetrain(args) -> int:
    screw = ScrewSpec(
        pitch=args.pitch,
        starts=args.starts,
        mean_diameter=args.mean_diameter,
        friction_coeff=args.friction_coeff,
    )
    try:
        teeth = [int(t) for t in args.teeth.split(",")]
        gears = GearTrainSpec(*teeth)
    except (ValueError, TypeError):
        raise ScenarioError(f"--teeth must be four comma-separated integers, got {args.teeth!r}")
    motor = MOTORS[args.motor]
    load_speed = args.load_speed if args.load_speed is not None else motor.load_speed
    input_speed = args.input_speed if args.input_speed is not None else MOTORS["mode-switch"].load_speed
    lock = is_self_locking(screw)
    out = {
        "motor": args.motor,
        "load_speed_rpm": load_speed,
        "nut_velocity_mm_s": nut_velocity(load_speed, screw),
        "travel_mm": args.travel,
        "revolutions_for_travel": revolutions_for_travel(args.travel, screw),
        "gear_train": asdict(gears),
        "gear_input_rpm": input_speed,
        "gear_output_rpm": gear_output_speed(input_speed, gears),
        "self_locking": {
            "locking": lock.locking,
            "lead_angle_rad": lock.lead_angle,
            "friction_angle_rad": lock.friction_angle,
        },
    }
    _write(json.dumps(out, sort_keys=True, indent=1), args.out)
    return 0


def _gripper_from_config(args) -> GripperSpec:
    if args.config:
        return load_scenario(args.config, mode_override=args.mode).gripper
    return default_gripper()


def _cmd_workspace(args) -> int:
    table = workspace_table(_gripper_from_config(args))
    lines = [
        "Four-point area volume (cm^3)   Open state   Close state   Expansion",
        f"Grasping mode                  {table['grasping']['open_cm3']:10.3f}  {table['grasping']['close_cm3']:11.4f}   {table['grasping']['expansion_pct']:7.2f}%",
        f"Gripping mode                  {table['gripping']['open_cm3']:10.3f}  {table['gripping']['close_cm3']:11.4f}   {table['gripping']['expansion_pct']:7.2f}%",
    ]
    if args.out and args.out != "-":
        _write(json.dumps(table, sort_keys=True, indent=1), args.out)
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_calibrate(args) -> int:
    spec = LinkageSpec(
        oscillating_rod=args.oscillating_rod,
        motion_rod=args.motion_rod,
        nut_stroke_max=args.stroke,
        rocker_pivot_radius=args.rocker_pivot_radius,
        nut_attach_radius=args.nut_attach_radius,
        theta_closed=args.theta_closed,
    )
    out = calibrate_linkage(theta_open_deg=args.theta_open, spec=spec)
    payload = {
        "oscillating_rod": out.oscillating_rod,
        "motion_rod": out.motion_rod,
        "nut_stroke_max": out.nut_stroke_max,
        "rocker_pivot_radius": out.rocker_pivot_radius,
        "nut_attach_radius": out.nut_attach_radius,
        "rocker_attach_distance": out.rocker_attach_distance,
        "theta_closed_deg": out.theta_closed,
        "theta_open_deg": args.theta_open,
    }
    _write(json.dumps(payload, sort_keys=True, indent=1), args.out)
    return 0


def _cmd_render(args) -> int:
    if args.report == "-":
        report = json.loads(sys.stdin.read())
    else:
        p = pathlib.Path(args.report)
        if not p.exists():
            raise ScenarioError(f"report file not found: {args.report}")
        report = json.loads(p.read_text())
    if args.scenario:
        scenario = load_scenario(args.scenario, mode_override=args.mode)
    else:
        from .scenario import parse_scenario_text

        resolved = report.get("scenario", {}).get("resolved")
        if resolved is None:
            raise ScenarioError("report has no embedded scenario; pass --scenario")
        scenario = parse_scenario_text(json.dumps(resolved))
    _write(render_svg(report, scenario), args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "run": _cmd_run,
            "drivetrain": _cmd_drivetrain,
            "workspace": _cmd_workspace,
            "calibrate": _cmd_calibrate,
            "render": _cmd_render,
        }[args.command]
        return handler(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SolverFault as e:
        print(f"solver fault: {e}", file=sys.stderr)
        return 2
    except FractalGripError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # noqa: BLE001 - exit-code contract
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
