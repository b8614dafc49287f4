"""Whiffletree force propagation and grasp quality scoring.

The drive presses the rack along its facing axis; every free pivot whose two
child subtrees both touch the object splits the transmitted force so the
subtree contact resultants balance moments about the pivot. Spring torques
are orders of magnitude below drive loads and are ignored here; a saturated
joint simply stops splitting and lets the structure carry the imbalance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .drivetrain import ScrewSpec, SelfLockReport, is_self_locking
from .equilibrium import ContactPoint
from .errors import InconsistencyFault
from .finger import FractalFinger, chain_frames
from .geometry import Pose2


@dataclass(frozen=True)
class ContactForce:
    leaf_index: int
    normal_force: float  # N, along the contact normal (into the object)
    tangential_capacity: float  # N, mu * normal_force


@dataclass(frozen=True)
class GraspQuality:
    contact_count: int
    uniformity: float | None  # min/max normal force over contacting leaves
    wrench_residual: float  # combined N / N*mm least-squares residual
    self_lock_holding: bool


@dataclass(frozen=True)
class ForceSolution:
    forces: list[ContactForce]
    residual: float
    transmitted: float  # N along the drive direction


def distribute_forces(
    finger: FractalFinger,
    joints: np.ndarray,
    contacts: list[ContactPoint],
    f_applied: float,
    base_pose: Pose2 | None = None,
    mu: float = 0.6,
) -> ForceSolution:
    """Split the drive force across leaf contacts by pivot-wise moment balance.

    Returns zero forces (flagged by transmitted == 0) when nothing touches.
    Raises InconsistencyFault when a parallel-normal system that must balance
    exactly does not: that indicates broken contact data, not physics.
    """
    if f_applied <= 0:
        raise InconsistencyFault("applied drive force must be positive")
    base = base_pose if base_pose is not None else finger.base_pose
    if not contacts:
        return ForceSolution(
            forces=[ContactForce(k, 0.0, 0.0) for k in range(finger.leaf_count)],
            residual=0.0,
            transmitted=0.0,
        )

    joints = np.asarray(joints, dtype=float)
    origins, _, _ = chain_frames(finger, joints, base)
    by_leaf = {c.leaf_index: c for c in contacts}
    sat = np.abs(np.abs(joints) - finger.joint_limits) <= 1e-9

    c0, s0 = math.cos(base.theta), math.sin(base.theta)
    facing = np.array([-s0, c0])

    # Active-set lift-off: a pivot loaded on one lateral side only cannot
    # balance in the rigid (spring-free) idealization; the joint would rotate
    # and shed a contact. Release whichever contact lets the rest balance best
    # (ties by leaf index) until the split is consistent.
    active = sorted(by_leaf)
    while True:
        a, b = _assemble(finger, origins, by_leaf, active, sat, facing, f_applied)
        x, rnorm = nnls(a, b)
        if rnorm <= 1e-8 * max(1.0, f_applied) or len(active) <= 1:
            break
        best = None
        for drop in range(len(active)):
            trial = [k for j, k in enumerate(active) if j != drop]
            a2, b2 = _assemble(finger, origins, by_leaf, trial, sat, facing, f_applied)
            _, r2 = nnls(a2, b2)
            if best is None or r2 < best[0] - 1e-12:
                best = (r2, trial)
        active = best[1]

    normals = np.array([by_leaf[k].normal for k in active])
    transmittable = float(np.max(np.abs(normals @ facing))) > 1e-6
    if (
        _normals_parallel(normals)
        and transmittable
        and not np.any(sat)
        and rnorm > 1e-9 * max(1.0, f_applied)
    ):
        raise InconsistencyFault(
            f"parallel-normal whiffletree failed to balance (residual {rnorm:.3e}); "
            "contact data is inconsistent with a static split"
        )

    forces = []
    for k in range(finger.leaf_count):
        f = float(x[active.index(k)]) if k in active else 0.0
        forces.append(ContactForce(k, f, mu * f))
    transmitted = float(x @ (normals @ facing))
    return ForceSolution(forces=forces, residual=float(rnorm), transmitted=transmitted)


def _assemble(finger, origins, by_leaf, active, sat, facing, f_applied):
    """Moment rows for free two-sided pivots plus the drive transmission row."""
    nf = len(active)
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    first_leaf = int(finger.leaves[0])
    for i in range(first_leaf):
        if sat[i]:
            continue
        left, right = 2 * i + 1, 2 * i + 2
        if not (
            any(k in active for k in finger.leaves_under[left])
            and any(k in active for k in finger.leaves_under[right])
        ):
            continue
        row = np.zeros(nf)
        px, py = origins[i]
        in_subtree = set(finger.leaves_under[i].tolist())
        for j, k in enumerate(active):
            if k not in in_subtree:
                continue
            cp = by_leaf[k]
            rx, ry = cp.point[0] - px, cp.point[1] - py
            row[j] = rx * cp.normal[1] - ry * cp.normal[0]
        rows.append(row)
        rhs.append(0.0)
    rows.append(np.array([float(by_leaf[k].normal @ facing) for k in active]))
    rhs.append(f_applied)
    return np.vstack(rows), np.array(rhs)


def _normals_parallel(normals: np.ndarray, tol: float = 1e-9) -> bool:
    if len(normals) < 2:
        return True
    n0 = normals[0]
    cross = normals[:, 0] * n0[1] - normals[:, 1] * n0[0]
    return bool(np.all(np.abs(cross) < tol))


def grasp_quality(
    contacts_per_finger: list[list[ContactPoint]],
    finger_solutions: list[ForceSolution],
    screw: ScrewSpec,
) -> tuple[GraspQuality, SelfLockReport]:
    """Aggregate per-finger force splits into gripper-level quality metrics.

    Uniformity (min/max contacting force) is this artifact's measurable proxy
    for evenly spread pressure; it is only defined once something touches.
    """
    touching: list[float] = []
    for contacts, sol in zip(contacts_per_finger, finger_solutions):
        by_leaf = {f.leaf_index: f.normal_force for f in sol.forces}
        touching.extend(by_leaf[c.leaf_index] for c in contacts)
    residual = math.sqrt(sum(sol.residual**2 for sol in finger_solutions))
    lock = is_self_locking(screw)
    uniformity = (min(touching) / max(touching)) if touching and max(touching) > 0 else None
    quality = GraspQuality(
        contact_count=len(touching),
        uniformity=uniformity,
        wrench_residual=residual,
        self_lock_holding=lock.locking,
    )
    return quality, lock
