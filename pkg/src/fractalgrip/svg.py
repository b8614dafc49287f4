"""SVG rendering of a grasp report: one planar panel per finger.

Panels show the screw axis, rocker and oscillating rod, the sector skeleton
at the solved joint angles, pads, the object contour (dashed), contact dots,
and force arrows scaled by normal force. Everything is drawn from the report
alone so saved reports can be re-rendered later.
"""

from __future__ import annotations

import math
from typing import Any
from xml.etree import ElementTree as ET

import numpy as np

from .finger import FractalFinger, chain_frames, forward_kinematics
from .geometry import Pose2
from .scenario import Scenario

PANEL_W = 260.0  # mm of model space per panel (x in [-40, 220] roughly)
MODEL_X = (-60.0, 140.0)
MODEL_Y = (-20.0, 180.0)


def _fmt(v: float) -> str:
    return f"{v:.3f}"


class _Panel:
    """Maps one finger plane (mm) into its SVG pixel viewport."""

    def __init__(self, root, index: int, scale: float):
        self.scale = scale
        self.w = (MODEL_X[1] - MODEL_X[0]) * scale
        self.h = (MODEL_Y[1] - MODEL_Y[0]) * scale
        self.x0 = index * (self.w + 12.0)
        self.g = ET.SubElement(root, "g")
        ET.SubElement(
            self.g,
            "rect",
            x=_fmt(self.x0),
            y="0",
            width=_fmt(self.w),
            height=_fmt(self.h),
            fill="white",
            stroke="#cccccc",
        )

    def pt(self, p) -> tuple[float, float]:
        x = self.x0 + (float(p[0]) - MODEL_X[0]) * self.scale
        y = (MODEL_Y[1] - float(p[1])) * self.scale  # flip: +y model is up
        return x, y

    def line(self, a, b, stroke="#333333", width=1.2, dash=None):
        x1, y1 = self.pt(a)
        x2, y2 = self.pt(b)
        attrs = {
            "x1": _fmt(x1),
            "y1": _fmt(y1),
            "x2": _fmt(x2),
            "y2": _fmt(y2),
            "stroke": stroke,
            "stroke-width": _fmt(width),
        }
        if dash:
            attrs["stroke-dasharray"] = dash
        ET.SubElement(self.g, "line", attrs)

    def polyline(self, pts, stroke="#1f77b4", width=1.0, dash=None, close=False):
        cmds = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (self.pt(p) for p in pts))
        tag = "polygon" if close else "polyline"
        attrs = {"points": cmds, "fill": "none", "stroke": stroke, "stroke-width": _fmt(width)}
        if dash:
            attrs["stroke-dasharray"] = dash
        ET.SubElement(self.g, tag, attrs)

    def dot(self, p, r=2.5, fill="#d62728"):
        x, y = self.pt(p)
        ET.SubElement(self.g, "circle", cx=_fmt(x), cy=_fmt(y), r=_fmt(r), fill=fill)

    def text(self, p, s, size=10.0, fill="#333333"):
        x, y = self.pt(p)
        el = ET.SubElement(self.g, "text", x=_fmt(x), y=_fmt(y), fill=fill)
        el.set("font-size", _fmt(size))
        el.set("font-family", "sans-serif")
        el.text = s

    def arrow(self, p, direction, length_px, stroke="#2ca02c"):
        x, y = self.pt(p)
        dx = float(direction[0]) * length_px
        dy = -float(direction[1]) * length_px
        ET.SubElement(
            self.g,
            "line",
            x1=_fmt(x),
            y1=_fmt(y),
            x2=_fmt(x + dx),
            y2=_fmt(y + dy),
            stroke=stroke,
            **{"stroke-width": "1.6", "marker-end": "url(#arrowhead)"},
        )


def render_svg(report: dict[str, Any], scenario: Scenario) -> str:
    """Render the per-finger panels of a grasp report as an SVG document."""
    scale = scenario.svg_scale
    w = 3 * ((MODEL_X[1] - MODEL_X[0]) * scale + 12.0)
    h = (MODEL_Y[1] - MODEL_Y[0]) * scale + 40.0
    root = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=_fmt(w),
        height=_fmt(h),
        viewBox=f"0 0 {_fmt(w)} {_fmt(h)}",
    )
    defs = ET.SubElement(root, "defs")
    marker = ET.SubElement(
        defs,
        "marker",
        id="arrowhead",
        markerWidth="8",
        markerHeight="6",
        refX="7",
        refY="3",
        orient="auto",
    )
    ET.SubElement(marker, "path", d="M0,0 L8,3 L0,6 z", fill="#2ca02c")

    finger = scenario.gripper.finger
    linkage = scenario.gripper.linkage
    mount = scenario.gripper.mount
    nut_u = report["drive"]["nut_coordinate_mm"]
    theta = math.radians(report["drive"]["rocker_angle_deg"])

    for fr in report["fingers"]:
        panel = _Panel(root, fr["index"], scale)
        _draw_linkage(panel, linkage, mount, nut_u, theta)
        base = Pose2(fr["base_pose"]["x"], fr["base_pose"]["y"], fr["base_pose"]["theta_rad"])
        _draw_finger(panel, finger, np.asarray(fr["joints_rad"]), base)
        if fr["profile"] is not None:
            panel.polyline(fr["profile"], stroke="#1f77b4", width=1.2, dash="5,4", close=True)
        force_by_leaf = {f["leaf"]: f["normal_force"] for f in fr["forces"]}
        fmax = max(force_by_leaf.values(), default=0.0)
        for c in fr["contacts"]:
            panel.dot(c["point"])
            f = force_by_leaf.get(c["leaf"], 0.0)
            if f > 1e-9 and fmax > 0:
                panel.arrow(c["point"], c["normal"], 8.0 + 22.0 * f / fmax)
        panel.text(
            (MODEL_X[0] + 4, MODEL_Y[1] - 8),
            f"finger {fr['index']}  [{fr['status']}]  contacts: {len(fr['contacts'])}",
        )
        _draw_scale_bar(panel)

    title = ET.SubElement(root, "text", x="4", y=_fmt(h - 12.0), fill="#333333")
    title.set("font-size", "12")
    title.set("font-family", "sans-serif")
    title.text = (
        f"{scenario.name} | mode {report['mode']['name']} | travel "
        f"{report['drive']['closure_travel_mm']:.2f} mm | contacts {report['quality']['contact_count']}"
    )
    return ET.tostring(root, encoding="unicode", xml_declaration=False)


def _draw_linkage(panel: _Panel, linkage, mount, nut_u: float, theta: float):
    panel.line((0.0, MODEL_Y[0]), (0.0, MODEL_Y[1] - 25.0), stroke="#999999", width=1.0, dash="2,3")
    pivot = (linkage.rocker_pivot_radius, 0.0)
    tip = (
        pivot[0] + mount.rocker_length * math.sin(theta),
        mount.rocker_length * math.cos(theta),
    )
    panel.line(pivot, tip, stroke="#8c564b", width=3.0)
    panel.dot(pivot, r=3.0, fill="#8c564b")
    d = linkage.rocker_attach_distance
    if d is not None:
        from .linkage import _nut_axial_at_closed

        mid = (pivot[0] + d * math.sin(theta), d * math.cos(theta))
        nut_y = _nut_axial_at_closed(linkage, d) - nut_u
        nut = (linkage.nut_attach_radius, nut_y)
        panel.line(nut, mid, stroke="#7f7f7f", width=2.0)
        panel.dot(nut, r=2.5, fill="#7f7f7f")


def _draw_finger(panel: _Panel, finger: FractalFinger, joints: np.ndarray, base: Pose2):
    origins, _, _ = chain_frames(finger, joints, base)
    panel.dot((base.x, base.y), r=2.5, fill="#8c564b")
    panel.line((base.x, base.y), origins[0], stroke="#555555", width=1.6)
    for i in range(finger.node_count):
        p = finger.parent[i]
        if p >= 0:
            panel.line(origins[p], origins[i], stroke="#555555", width=1.6)
        panel.dot(origins[i], r=1.6, fill="#555555")
    pads = forward_kinematics(finger, joints, base_pose=base)
    for seg in pads:
        panel.line(seg[0], seg[1], stroke="#111111", width=3.0)


def _draw_scale_bar(panel: _Panel):
    y = MODEL_Y[0] + 8.0
    x0 = MODEL_X[1] - 30.0
    panel.line((x0, y), (x0 + 20.0, y), stroke="#333333", width=2.0)
    panel.text((x0, y + 4.0), "20 mm", size=8.0)
