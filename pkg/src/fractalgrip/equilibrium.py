"""Quasi-static adaptive closure of one finger against a planar profile.

The finger settles into the minimum of

    E(theta) = sum_i 1/2 k_i theta_i^2  +  penalty * sum_j w_j max(0, -gap_j)^2

subject to the joint limits. The penetration penalty is collocated at five
fixed stations along each pad (trapezoid weights, normalized per pad), which
keeps the energy smooth and symmetric for flush contact while still catching
a curved surface poking the middle of a pad. Any pad short of contact leaves
a net moment somewhere in the tree, so the solver sweeps the joints
root-to-leaf, driving each by its net moment (spring restoring torque plus
penalty contact moments) until every residual is inside tolerance or the
joint is pinned at a limit.

Contact *detection* is exact: it uses the signed segment clearance, not the
collocation stations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .defaults import SolverConfig
from .errors import InterferenceFault
from .finger import FractalFinger, chain_frames, spring_energy
from .geometry import Polygon, Pose2, SegmentGap, point_gaps, segment_gap

STATUS_CONVERGED = "converged"
STATUS_JOINT_LIMITED = "joint-limited"
STATUS_DRIVE_LIMITED = "drive-limited"
STATUS_NO_CONTACT = "no-contact"

#: pad collocation stations (fractions of the pad) and their quadrature weights
PAD_STATIONS = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
PAD_WEIGHTS = np.array([0.5, 1.0, 1.0, 1.0, 0.5]) / 4.0


@dataclass(frozen=True)
class ContactPoint:
    """One pad/object contact: position, inward normal, signed gap (mm)."""

    leaf_index: int
    point: np.ndarray
    normal: np.ndarray  # unit vector pointing into the object
    gap: float


@dataclass
class EquilibriumReport:
    joints: np.ndarray
    contacts: list[ContactPoint]
    residual_moment: np.ndarray
    iterations: int
    status: str
    energy: float
    stalled: bool = False
    gaps: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def contact_leaves(self) -> set[int]:
        return {c.leaf_index for c in self.contacts}


def _pad_segments_from_frames(finger: FractalFinger, origins, cos_acc, sin_acc, leaf_positions):
    half = finger.pad_length / 2.0
    standoff = finger.levels[finger.depth].half_span
    segs = np.zeros((len(leaf_positions), 2, 2))
    for k, pos in enumerate(leaf_positions):
        leaf = finger.leaves[pos]
        c, s = cos_acc[leaf], sin_acc[leaf]
        ox, oy = origins[leaf]
        for e, lx in enumerate((-half, half)):
            segs[k, e, 0] = ox + c * lx - s * standoff
            segs[k, e, 1] = oy + s * lx + c * standoff
    return segs


def _station_points(segs: np.ndarray) -> np.ndarray:
    """Collocation points for pads (K, 2, 2) -> (K, S, 2)."""
    a = segs[:, 0, :][:, None, :]
    b = segs[:, 1, :][:, None, :]
    return a + PAD_STATIONS[None, :, None] * (b - a)


def _station_state(finger, angles, base_pose, profile, leaf_positions):
    """Station gaps/directions/positions for the requested leaves."""
    origins, ca, sa = chain_frames(finger, angles, base_pose)
    segs = _pad_segments_from_frames(finger, origins, ca, sa, leaf_positions)
    pts = _station_points(segs)
    flat = pts.reshape(-1, 2)
    gaps, dirs = point_gaps(flat, profile)
    k = len(leaf_positions)
    return origins, pts, gaps.reshape(k, -1), dirs.reshape(k, -1, 2)


def potential_energy(
    finger: FractalFinger,
    joints: np.ndarray,
    profile: Polygon | None,
    penalty: float,
    base_pose: Pose2 | None = None,
) -> float:
    """Spring energy plus collocated penetration penalty (N*mm)."""
    joints = np.asarray(joints, dtype=float)
    finger.validate_joints(joints)
    e = spring_energy(finger, joints)
    if profile is None:
        return e
    _, _, gaps, _ = _station_state(finger, joints, base_pose, profile, range(finger.leaf_count))
    pen = np.maximum(0.0, -gaps)
    return e + penalty * float(np.sum(PAD_WEIGHTS[None, :] * pen * pen))


def exact_pad_gaps(
    finger: FractalFinger,
    joints: np.ndarray,
    profile: Polygon,
    base_pose: Pose2 | None = None,
) -> list[SegmentGap]:
    """Signed segment clearance per pad (leaf order)."""
    origins, ca, sa = chain_frames(finger, joints, base_pose)
    segs = _pad_segments_from_frames(finger, origins, ca, sa, range(finger.leaf_count))
    return [segment_gap(segs[k, 0], segs[k, 1], profile) for k in range(finger.leaf_count)]


def detect_contacts(
    finger: FractalFinger,
    joints: np.ndarray,
    profile: Polygon,
    base_pose: Pose2 | None = None,
    contact_tol: float = 0.02,
    on_interference: str = "raise",
) -> list[ContactPoint]:
    """Contacting pads: gap at most `contact_tol`, penetration within compliance.

    Flush contacts (pad lying on an edge) place the contact point at the middle
    of the overlap so a force resultant there is torque-free about the leaf pivot.
    """
    joints = np.asarray(joints, dtype=float)
    finger.validate_joints(joints)
    origins, ca, sa = chain_frames(finger, joints, base_pose)
    segs = _pad_segments_from_frames(finger, origins, ca, sa, range(finger.leaf_count))
    contacts = []
    for k in range(finger.leaf_count):
        info = segment_gap(segs[k, 0], segs[k, 1], profile)
        if info.gap < -finger.pad_compliance - 1e-9:
            if on_interference == "raise":
                raise InterferenceFault(
                    f"pad {k} penetrates {-info.gap:.3f} mm, beyond the "
                    f"{finger.pad_compliance:.3f} mm compliance budget"
                )
        if info.gap > contact_tol:
            continue
        point, normal = _resolve_contact_geometry(segs[k], info, profile, contact_tol)
        contacts.append(ContactPoint(leaf_index=k, point=point, normal=normal, gap=info.gap))
    return contacts


def _resolve_contact_geometry(seg, info: SegmentGap, profile: Polygon, tol: float):
    a, b = seg[0], seg[1]
    pad_dir = (b - a) / np.linalg.norm(b - a)
    e = info.edge
    e0 = profile._e0[e]
    ev = profile._ev[e]
    edge_dir = ev / np.linalg.norm(ev)
    flush = (
        profile.boundary_distance(a) <= tol + 1e-9
        and profile.boundary_distance(b) <= tol + 1e-9
        and abs(pad_dir[0] * edge_dir[1] - pad_dir[1] * edge_dir[0]) < 0.05
    )
    if flush:
        # overlap of the pad with the closest edge, measured along the pad
        s_edge0 = float((e0 - a) @ pad_dir)
        s_edge1 = float((e0 + ev - a) @ pad_dir)
        lo = max(0.0, min(s_edge0, s_edge1))
        hi = min(float(np.linalg.norm(b - a)), max(s_edge0, s_edge1))
        if hi > lo:
            point = a + pad_dir * (0.5 * (lo + hi))
            normal = -profile._outward[e]
            return point, normal
    return info.point.copy(), -info.direction


def relax_joints(
    finger: FractalFinger,
    profile: Polygon | None,
    base_pose: Pose2,
    config: SolverConfig | None = None,
    initial_joints: np.ndarray | None = None,
) -> EquilibriumReport:
    """Settle the joint tree against a profile at a fixed base pose.

    Cold starts anneal the penalty stiffness upward so pads can slide around
    profile corners instead of snagging on them; warm starts (closure steps)
    go straight to the target stiffness.
    """
    cfg = config or SolverConfig()

    if profile is None:
        # springs alone: the exact minimum is the neutral pose
        return EquilibriumReport(
            joints=finger.zero_joints(),
            contacts=[],
            residual_moment=np.zeros(finger.node_count),
            iterations=0,
            status=STATUS_NO_CONTACT,
            energy=0.0,
            gaps=np.full(finger.leaf_count, np.inf),
        )

    if initial_joints is None:
        # cold start: a few deterministic seeds guard against corner-snag minima;
        # ties keep the earliest seed so the symmetric cases stay symmetric
        best = None
        for seed_scale in (0.0, 0.5, -0.5):
            angles = finger.joint_limits * seed_scale
            sweeps = 0
            for soft in (64.0, 8.0):
                rep = _relax_fixed_penalty(finger, profile, base_pose, cfg, angles, cfg.penalty / soft)
                angles = rep.joints
                sweeps += rep.iterations
            rep = _relax_fixed_penalty(finger, profile, base_pose, cfg, angles, cfg.penalty)
            rep.iterations += sweeps
            if best is None or rep.energy < best.energy - 1e-12:
                best = rep
        return best
    return _relax_fixed_penalty(
        finger, profile, base_pose, cfg, finger.clamp_joints(np.array(initial_joints)), cfg.penalty
    )


def _relax_fixed_penalty(
    finger: FractalFinger,
    profile: Polygon,
    base_pose: Pose2,
    cfg: SolverConfig,
    start: np.ndarray,
    p: float,
) -> EquilibriumReport:
    angles = start.astype(float).copy()
    limits = finger.joint_limits
    ks = finger.spring_k
    iterations = 0
    residual = np.zeros(finger.node_count)
    stalled = True

    def node_moment(i, origins, pts, gaps, dirs):
        """Net moment about joint i and a Gauss-Newton curvature estimate."""
        m = -ks[i] * angles[i]
        h = ks[i]
        px, py = origins[i]
        depth = np.maximum(0.0, -gaps)
        rx = pts[..., 0] - px
        ry = pts[..., 1] - py
        arm = rx * dirs[..., 1] - ry * dirs[..., 0]
        w = PAD_WEIGHTS[None, : gaps.shape[1]]
        m += float(np.sum(2.0 * p * w * depth * arm))
        h += float(np.sum(2.0 * p * w * (depth > 0) * arm * arm))
        return m, h

    def subtree_energy(i, gaps):
        depth = np.maximum(0.0, -gaps)
        return 0.5 * ks[i] * angles[i] ** 2 + p * float(np.sum(PAD_WEIGHTS[None, :] * depth * depth))

    violated = list(range(finger.node_count))
    for sweep in range(cfg.max_iterations):
        iterations = sweep + 1
        max_delta = 0.0
        for i in violated:
            under = finger.leaves_under[i]
            origins, pts, gaps, dirs = _station_state(finger, angles, base_pose, profile, under)
            m, h = node_moment(i, origins, pts, gaps, dirs)
            pinned = (angles[i] >= limits[i] - 1e-12 and m > 0) or (
                angles[i] <= -limits[i] + 1e-12 and m < 0
            )
            if abs(m) < cfg.moment_tol or pinned:
                continue
            step = max(-cfg.step_cap, min(cfg.step_cap, m / h))
            old = angles[i]
            e_old = subtree_energy(i, gaps)
            for _ in range(12):
                new = max(-limits[i], min(limits[i], old + step))
                angles[i] = new
                _, _, gaps_new, _ = _station_state(finger, angles, base_pose, profile, under)
                if subtree_energy(i, gaps_new) <= e_old + 1e-12 or new == old:
                    break
                angles[i] = old
                step *= 0.5
            max_delta = max(max_delta, abs(angles[i] - old))

        # one full pass scores every node; only violators are revisited next sweep
        origins, pts, gaps, dirs = _station_state(finger, angles, base_pose, profile, range(finger.leaf_count))
        violated = []
        for i in range(finger.node_count):
            under = finger.leaves_under[i]
            m, _ = node_moment(i, origins, pts[under], gaps[under], dirs[under])
            residual[i] = m
            pinned = (angles[i] >= limits[i] - 1e-12 and m > 0) or (
                angles[i] <= -limits[i] + 1e-12 and m < 0
            )
            if abs(m) >= cfg.moment_tol and not pinned:
                violated.append(i)
        if not violated:
            stalled = False
            break
        if max_delta < 1e-15 and sweep > 0:
            break

    contacts = detect_contacts(
        finger, angles, profile, base_pose, contact_tol=cfg.contact_tol, on_interference="flag"
    )
    exact = exact_pad_gaps(finger, angles, profile, base_pose)
    gaps_arr = np.array([g.gap for g in exact])
    status = _classify(finger, angles, contacts, stalled)
    energy = potential_energy(finger, angles, profile, p, base_pose)
    return EquilibriumReport(
        joints=angles,
        contacts=contacts,
        residual_moment=residual.copy(),
        iterations=iterations,
        status=status,
        energy=energy,
        stalled=stalled,
        gaps=gaps_arr,
    )


def _classify(finger, angles, contacts, stalled):
    if not contacts:
        return STATUS_NO_CONTACT
    touching = {c.leaf_index for c in contacts}
    if len(touching) == finger.leaf_count:
        return STATUS_DRIVE_LIMITED if stalled else STATUS_CONVERGED
    limits = finger.joint_limits
    saturated = np.abs(np.abs(angles) - limits) <= 1e-9
    for k in range(finger.leaf_count):
        if k in touching:
            continue
        chain = finger.ancestors(int(finger.leaves[k]))
        if not any(saturated[i] for i in chain):
            return STATUS_DRIVE_LIMITED
    return STATUS_JOINT_LIMITED
