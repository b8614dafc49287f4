import math

import numpy as np
import pytest

from oracles import grid_energy_oracle, random_convex_profile
from test_finger import make_levels

from fractalgrip.defaults import SolverConfig, default_finger
from fractalgrip.equilibrium import (
    STATUS_CONVERGED,
    STATUS_DRIVE_LIMITED,
    STATUS_NO_CONTACT,
    detect_contacts,
    potential_energy,
    relax_joints,
)
from fractalgrip.errors import InterferenceFault
from fractalgrip.finger import build_finger, forward_kinematics
from fractalgrip.geometry import Polygon, Pose2, regular_polygon

WALL = Polygon([(-60.0, 44.0), (60.0, 44.0), (60.0, 64.0), (-60.0, 64.0)])


def inclined_wall(pad_y, deg, press=0.2):
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    y0 = pad_y + press
    return Polygon(
        [
            (-80 * c, y0 - 80 * s),
            (80 * c, y0 + 80 * s),
            (80 * c - 30 * s, y0 + 80 * s + 30 * c),
            (-80 * c - 30 * s, y0 - 80 * s + 30 * c),
        ]
    )


class TestDetectContacts:
    def test_separated_pads_give_no_contacts(self):
        f = default_finger()
        far = Polygon([(-20.0, 49.0), (20.0, 49.0), (20.0, 60.0), (-20.0, 60.0)])
        assert detect_contacts(f, f.zero_joints(), far) == []

    def test_flush_pad_contact_normal_perpendicular(self):
        f = default_finger()
        contacts = detect_contacts(f, f.zero_joints(), WALL)
        assert len(contacts) == 4
        for c in contacts:
            assert c.normal == pytest.approx([0.0, 1.0], abs=1e-9)
            assert abs(c.gap) <= 0.02

    def test_flush_contact_point_centered_behind_leaf_pivot(self):
        f = default_finger()
        contacts = detect_contacts(f, f.zero_joints(), WALL)
        # neutral pad centers sit at x = -23, -5, +5, +23
        xs = sorted(c.point[0] for c in contacts)
        assert xs == pytest.approx([-23.0, -5.0, 5.0, 23.0], abs=1e-9)

    def test_interference_raises(self):
        f = default_finger()
        deep = Polygon([(-60.0, 40.0), (60.0, 40.0), (60.0, 60.0), (-60.0, 60.0)])  # 4 mm proud
        with pytest.raises(InterferenceFault):
            detect_contacts(f, f.zero_joints(), deep)

    def test_classification_matches_signed_distance(self):
        from fractalgrip.geometry import segment_polygon_distance

        rng = np.random.default_rng(99)
        f = default_finger()
        pads = forward_kinematics(f, f.zero_joints())
        tol = 0.02
        for _ in range(20):
            prof = random_convex_profile(rng, pads[0, 0, 1], abs(pads[0, 0, 0]), press_range=(-1.0, 1.5))
            angles = f.clamp_joints(rng.uniform(-0.2, 0.2, f.node_count))
            try:
                contacts = detect_contacts(f, angles, prof, contact_tol=tol)
            except InterferenceFault:
                continue
            touching = {c.leaf_index for c in contacts}
            segs = forward_kinematics(f, angles)
            for k in range(f.leaf_count):
                d = segment_polygon_distance(segs[k, 0], segs[k, 1], prof)
                assert (k in touching) == (d <= tol)


class TestPotentialEnergy:
    def test_datum_zero(self):
        f = default_finger()
        assert potential_energy(f, f.zero_joints(), None, 10.0) == 0.0

    def test_single_spring_energy(self):
        f = default_finger()
        angles = f.zero_joints()
        angles[3] = 0.12
        k = f.spring_k[3]
        assert potential_energy(f, angles, None, 10.0) == pytest.approx(0.5 * k * 0.12**2, rel=1e-12)

    def test_recompute_from_primitives(self):
        from fractalgrip.equilibrium import _station_state, PAD_WEIGHTS
        from fractalgrip.finger import spring_energy

        f = default_finger()
        rng = np.random.default_rng(4)
        angles = f.clamp_joints(rng.uniform(-0.3, 0.3, f.node_count))
        prof = regular_polygon((0.0, 60.0), 18.0, n=40)
        want = spring_energy(f, angles)
        _, _, gaps, _ = _station_state(f, angles, None, prof, range(f.leaf_count))
        pen = np.maximum(0.0, -gaps)
        want += 10.0 * float(np.sum(PAD_WEIGHTS[None, :] * pen * pen))
        got = potential_energy(f, angles, prof, 10.0)
        assert got == pytest.approx(want, rel=1e-9)


class TestRelaxJoints:
    def test_flat_wall_square_on(self):
        f = default_finger()
        rep = relax_joints(f, WALL, Pose2())
        assert rep.status == STATUS_CONVERGED
        assert len(rep.contacts) == f.leaf_count
        assert np.allclose(rep.joints, 0.0, atol=1e-9)

    def test_inclined_wall_matches_fine_grid(self):
        f1 = build_finger(1, make_levels(1))
        pads = forward_kinematics(f1, f1.zero_joints())
        prof = inclined_wall(pads[0, 0, 1], 10.0)
        rep = relax_joints(f1, prof, Pose2())
        assert rep.status == STATUS_CONVERGED
        assert len(rep.contacts) == 2
        assert math.degrees(rep.joints[0]) == pytest.approx(10.0, abs=0.5)
        e_oracle, _ = grid_energy_oracle(f1, prof, Pose2(), SolverConfig().penalty, 0.25, 0.25, 3)
        assert rep.energy == pytest.approx(e_oracle, abs=1e-3)

    def test_no_contact_resets_to_neutral(self):
        f = default_finger()
        rep = relax_joints(f, None, Pose2(), initial_joints=np.full(f.node_count, 0.2))
        assert rep.status == STATUS_NO_CONTACT
        assert np.all(rep.joints == 0.0)

    def test_oracle_equivalence_n1(self):
        f1 = build_finger(1, make_levels(1))
        pads = forward_kinematics(f1, f1.zero_joints())
        rng = np.random.default_rng(1234)
        cfg = SolverConfig()
        for _ in range(10):
            prof = random_convex_profile(rng, pads[0, 0, 1], abs(pads[0, 0, 0]))
            rep = relax_joints(f1, prof, Pose2(), cfg)
            e_oracle, _ = grid_energy_oracle(f1, prof, Pose2(), cfg.penalty, 0.25, 0.25, 3)
            assert rep.energy == pytest.approx(e_oracle, abs=1e-3)

    def test_oracle_equivalence_n0(self):
        f0 = build_finger(0, make_levels(0))
        pads = forward_kinematics(f0, f0.zero_joints())
        rng = np.random.default_rng(51)
        cfg = SolverConfig()
        for _ in range(6):
            prof = random_convex_profile(rng, pads[0, 0, 1], 10.0)
            rep = relax_joints(f0, prof, Pose2(), cfg)
            e_oracle, _ = grid_energy_oracle(f0, prof, Pose2(), cfg.penalty, 0.25, 0.25, 3)
            assert rep.energy == pytest.approx(e_oracle, abs=1e-3)

    def test_oracle_equivalence_n2_coarse(self):
        f = default_finger()
        pads = forward_kinematics(f, f.zero_joints())
        rng = np.random.default_rng(77)
        cfg = SolverConfig()
        for _ in range(6):
            prof = random_convex_profile(rng, pads[0, 0, 1], abs(pads[0, 0, 0]))
            rep = relax_joints(f, prof, Pose2(), cfg)
            e_oracle, _ = grid_energy_oracle(f, prof, Pose2(), cfg.penalty, 2.5, 0.5, 6)
            assert rep.energy == pytest.approx(e_oracle, abs=1e-2)

    def test_deterministic_bitwise(self):
        f = default_finger()
        prof = regular_polygon((2.0, 68.0), 25.0, n=48)
        a = relax_joints(f, prof, Pose2())
        b = relax_joints(f, prof, Pose2())
        assert np.array_equal(a.joints, b.joints)
        assert a.energy == b.energy
        assert a.status == b.status
        assert np.array_equal(a.gaps, b.gaps)
        assert [(c.leaf_index, tuple(c.point), tuple(c.normal), c.gap) for c in a.contacts] == [
            (c.leaf_index, tuple(c.point), tuple(c.normal), c.gap) for c in b.contacts
        ]

    def test_converged_status_implies_residuals_in_tolerance(self):
        f = default_finger()
        cfg = SolverConfig()
        rep = relax_joints(f, WALL, Pose2(0, 0.4, 0), cfg)
        assert rep.status == STATUS_CONVERGED
        lim = f.joint_limits
        for i, m in enumerate(rep.residual_moment):
            pinned = (rep.joints[i] >= lim[i] - 1e-12 and m > 0) or (
                rep.joints[i] <= -lim[i] + 1e-12 and m < 0
            )
            assert abs(m) < cfg.moment_tol or pinned

    def test_partial_contact_without_saturation_is_drive_limited(self):
        f = default_finger()
        circle = regular_polygon((0.0, 44.0 + 25.0), 25.0, n=48)  # just grazing
        rep = relax_joints(f, circle, Pose2(0, 0.3, 0))
        assert rep.status == STATUS_DRIVE_LIMITED
        assert 1 <= len(rep.contacts) < f.leaf_count
