import json
import subprocess
import sys
from importlib import resources
from xml.etree import ElementTree as ET

import pytest

from fractalgrip.errors import ScenarioError
from fractalgrip.runner import report_to_json, run_scenario
from fractalgrip.scenario import (
    SCENARIO_SCHEMA,
    SCHEMA_VERSION,
    load_scenario,
    parse_scenario_text,
    serialize,
)
from fractalgrip.svg import render_svg

MINIMAL = json.dumps(
    {
        "schema": SCHEMA_VERSION,
        "name": "minimal",
        "mode": "grasping",
        "object": {"type": "cylinder", "radius": 30.0, "height": 120.0},
        "approach": {"grasping": {"kind": "overhead", "height": 135.0}},
    }
)


def scenario_path(name):
    return str(resources.files("fractalgrip") / "scenarios" / f"{name}.json")


class TestLoading:
    def test_minimal_scenario_resolves_defaults(self):
        sc = parse_scenario_text(MINIMAL)
        assert sc.name == "minimal"
        assert sc.gripper.finger.node_count == 7
        assert sc.gripper.linkage.rocker_attach_distance is not None
        assert sc.solver.penalty > 0
        assert sc.resolved["gripper"]["gears"]["z1"] == 20

    def test_malformed_json_diagnoses_line(self):
        with pytest.raises(ScenarioError, match=r"line \d+"):
            parse_scenario_text('{"schema": "fractalgrip/scenario-v1",,}')

    def test_unknown_key_rejected_with_location(self):
        bad = json.loads(MINIMAL)
        bad["object"]["radiis"] = 3.0
        del bad["object"]["radius"]
        text = json.dumps(bad, indent=2)
        with pytest.raises(ScenarioError, match=r"radiis.*line \d+, column \d+"):
            parse_scenario_text(text)

    def test_invalid_joint_limit_names_field(self):
        bad = json.loads(MINIMAL)
        bad["gripper"] = {
            "finger": {
                "depth": 0,
                "levels": [
                    {"pivot_offset": 10.0, "half_span": 8.0, "joint_limit_deg": -5.0,
                     "pad_length": 8.0, "pad_compliance": 1.0}
                ],
            }
        }
        with pytest.raises(ScenarioError, match="joint_limit_deg"):
            parse_scenario_text(json.dumps(bad))

    def test_wrong_schema_version_rejected(self):
        bad = json.loads(MINIMAL)
        bad["schema"] = "fractalgrip/scenario-v999"
        with pytest.raises(ScenarioError, match="schema"):
            parse_scenario_text(json.dumps(bad))

    def test_missing_object_field_rejected(self):
        bad = json.loads(MINIMAL)
        del bad["object"]["radius"]
        with pytest.raises(ScenarioError, match="radius"):
            parse_scenario_text(json.dumps(bad))

    def test_non_finite_numbers_rejected(self):
        bad = MINIMAL.replace('"radius": 30.0', '"radius": NaN')
        with pytest.raises(ScenarioError):
            parse_scenario_text(bad)

    def test_round_trip_identity(self):
        sc = parse_scenario_text(MINIMAL)
        again = parse_scenario_text(serialize(sc))
        assert again.resolved == sc.resolved
        assert serialize(again) == serialize(sc)
        assert again.digest == sc.digest

    def test_round_trip_over_bundled_corpus(self):
        for name in ("bottle", "banana", "starfruit", "egg"):
            sc = load_scenario(scenario_path(name))
            again = parse_scenario_text(serialize(sc))
            assert serialize(again) == serialize(sc)

    def test_mode_override(self):
        sc = load_scenario(scenario_path("bottle"), mode_override="gripping")
        assert sc.mode == "gripping"
        assert sc.mode_state.mode_angle_deg == 50.0

    def test_published_schema_file_matches(self):
        path = resources.files("fractalgrip") / "scenario.schema.json"
        assert json.loads(path.read_text()) == SCENARIO_SCHEMA


class TestRunner:
    def test_bottle_gripping_two_contacts_per_finger(self):
        sc = load_scenario(scenario_path("bottle"), mode_override="gripping")
        rep = run_scenario(sc, no_meta=True)
        assert [len(f["contacts"]) for f in rep["fingers"]] == [2, 2, 2]
        assert rep["quality"]["contact_count"] == 6

    def test_bottle_grasping_four_contacts_per_finger(self):
        sc = load_scenario(scenario_path("bottle"))
        rep = run_scenario(sc, no_meta=True)
        assert [len(f["contacts"]) for f in rep["fingers"]] == [4, 4, 4]
        assert rep["quality"]["contact_count"] == 12

    def test_empty_object_scenario(self):
        sc = parse_scenario_text(
            json.dumps({"schema": SCHEMA_VERSION, "object": {"type": "none"}})
        )
        rep = run_scenario(sc, no_meta=True)
        assert rep["drive"]["closure_travel_mm"] == pytest.approx(15.0)
        assert rep["quality"]["contact_count"] == 0
        assert all(f["status"] == "no-contact" for f in rep["fingers"])

    def test_report_embeds_resolved_scenario_and_paper_numbers(self):
        sc = parse_scenario_text(MINIMAL)
        rep = run_scenario(sc, no_meta=True)
        assert rep["scenario"]["resolved"] == sc.resolved
        assert rep["drivetrain"]["nut_velocity_mm_s"] == pytest.approx(4.67, abs=0.005)
        assert rep["drivetrain"]["revolutions_for_stroke"] == pytest.approx(2.14, abs=0.005)
        assert rep["drivetrain"]["mode_gear_output_rpm"] == 5.6
        assert rep["workspace"]["grasping"]["open_cm3"] > rep["workspace"]["grasping"]["close_cm3"]

    def test_no_meta_reports_are_byte_identical(self):
        sc = load_scenario(scenario_path("egg"))
        a = report_to_json(run_scenario(sc, no_meta=True))
        b = report_to_json(run_scenario(load_scenario(scenario_path("egg")), no_meta=True))
        assert a == b

    def test_meta_included_by_default(self):
        sc = parse_scenario_text(json.dumps({"schema": SCHEMA_VERSION, "object": {"type": "none"}}))
        rep = run_scenario(sc)
        assert "generated" in rep["meta"]
        assert rep["meta"]["wall_time_s"] >= 0


class TestSvg:
    def test_render_is_well_formed_svg(self):
        sc = load_scenario(scenario_path("grapes"))
        rep = run_scenario(sc, no_meta=True)
        doc = render_svg(rep, sc)
        root = ET.fromstring(doc)
        assert root.tag.endswith("svg")
        assert root.get("viewBox") is not None
        assert float(root.get("width")) > 0

    def test_contact_dots_match_contact_count(self):
        sc = load_scenario(scenario_path("bottle"))
        rep = run_scenario(sc, no_meta=True)
        doc = render_svg(rep, sc)
        root = ET.fromstring(doc)
        ns = "{http://www.w3.org/2000/svg}"
        red_dots = [c for c in root.iter(f"{ns}circle") if c.get("fill") == "#d62728"]
        assert len(red_dots) == rep["quality"]["contact_count"]

    def test_empty_report_renders_gripper_only(self):
        sc = parse_scenario_text(json.dumps({"schema": SCHEMA_VERSION, "object": {"type": "none"}}))
        rep = run_scenario(sc, no_meta=True)
        root = ET.fromstring(render_svg(rep, sc))
        assert root.tag.endswith("svg")


def run_cli(*args, stdin_text=None):
    return subprocess.run(
        [sys.executable, "-m", "fractalgrip.cli", *args],
        capture_output=True,
        text=True,
        input=stdin_text,
        timeout=300,
    )


class TestCli:
    def test_run_bottle_to_stdout(self, tmp_path):
        r = run_cli("run", scenario_path("egg"), "--no-meta")
        assert r.returncode == 0, r.stderr
        rep = json.loads(r.stdout)
        assert rep["schema"] == "fractalgrip/report-v1"

    def test_run_with_outputs(self, tmp_path):
        out = tmp_path / "r.json"
        svg = tmp_path / "r.svg"
        r = run_cli("run", scenario_path("grapes"), "--no-meta", "-o", str(out), "--svg", str(svg))
        assert r.returncode == 0, r.stderr
        assert json.loads(out.read_text())["quality"]["contact_count"] >= 0
        ET.fromstring(svg.read_text())

    def test_run_from_stdin(self):
        r = run_cli("run", "-", "--no-meta", stdin_text=MINIMAL)
        assert r.returncode == 0, r.stderr
        assert json.loads(r.stdout)["scenario"]["name"] == "minimal"

    def test_scenario_error_exit_code_1(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"schema": "nope"}')
        r = run_cli("run", str(bad))
        assert r.returncode == 1
        assert "error" in r.stderr

    def test_missing_file_exit_code_1(self):
        r = run_cli("run", "/nonexistent/foo.json")
        assert r.returncode == 1

    def test_solver_fault_exit_code_2(self):
        fat = json.dumps(
            {
                "schema": SCHEMA_VERSION,
                "object": {"type": "cylinder", "radius": 60.0, "height": 120.0},
                "approach": {"grasping": {"kind": "overhead", "height": 140.0}},
            }
        )
        r = run_cli("run", "-", stdin_text=fat)
        assert r.returncode == 2
        assert "fault" in r.stderr

    def test_drivetrain_without_scenario(self):
        r = run_cli("drivetrain")
        assert r.returncode == 0, r.stderr
        out = json.loads(r.stdout)
        assert out["nut_velocity_mm_s"] == pytest.approx(4.67, abs=0.005)
        assert out["revolutions_for_travel"] == pytest.approx(2.14, abs=0.005)
        assert out["gear_output_rpm"] == 5.6
        assert out["self_locking"]["locking"] is True

    def test_workspace_without_scenario(self):
        r = run_cli("workspace")
        assert r.returncode == 0, r.stderr
        assert "Grasping mode" in r.stdout
        assert "Gripping mode" in r.stdout

    def test_calibrate_prints_spec(self):
        r = run_cli("calibrate", "--theta-open", "32")
        assert r.returncode == 0, r.stderr
        spec = json.loads(r.stdout)
        assert spec["rocker_attach_distance"] == pytest.approx(31.0, abs=0.5)

    def test_calibrate_infeasible_exit_code(self):
        r = run_cli("calibrate", "--theta-open", "170.0")
        assert r.returncode == 1
        assert "90" in r.stderr or "closed loop" in r.stderr

    def test_render_from_saved_report(self, tmp_path):
        out = tmp_path / "rep.json"
        r = run_cli("run", scenario_path("egg"), "--no-meta", "-o", str(out))
        assert r.returncode == 0
        svg_out = tmp_path / "rep.svg"
        r2 = run_cli("render", "--report", str(out), "-o", str(svg_out))
        assert r2.returncode == 0, r2.stderr
        ET.fromstring(svg_out.read_text())

    def test_usage_error_is_exit_code_1(self):
        r = run_cli("run")  # missing scenario argument
        assert r.returncode == 1
