import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from armteleop import quat
from armteleop.kinematics import (
    DimensionMismatch,
    HumanArmModel,
    JointDescriptor,
    JointLimits,
    KinematicChain,
    clamp_to_limits,
    default_limits,
    forward_kinematics,
    fr3_chain,
    human_arm_fk,
    robot_elbow_wrist,
)
from armteleop.retarget import JointFlag, RetargetConfig, joint_vector, retarget_frame

RNG = np.random.default_rng(42)


def quat_to_matrix(q):
    return Rotation.from_quat([q[1], q[2], q[3], q[0]]).as_matrix()


def homogeneous(q, t):
    m = np.eye(4)
    m[:3, :3] = quat_to_matrix(q)
    m[:3, 3] = np.asarray(t, dtype=float)
    return m


def oracle_fk(chain, theta):
    """Independent pose computation via 4x4 matrix products."""
    frames = []
    m = homogeneous(chain.base_orientation, chain.base_position)
    for desc, angle in zip(chain.joints, theta):
        m = m @ homogeneous(desc.rotation, desc.translation)
        rot = np.eye(4)
        rot[:3, :3] = Rotation.from_rotvec(angle * np.asarray(desc.axis)).as_matrix()
        m = m @ rot
        frames.append(m.copy())
    m = m @ homogeneous(chain.tool_rotation, chain.tool_translation)
    frames.append(m.copy())
    return frames


def single_joint_chain():
    j = JointDescriptor(axis=[0.0, 1.0, 0.0], translation=[0.0, 0.0, 0.0], rotation=quat.IDENTITY)
    return KinematicChain(
        joints=(j,), tool_translation=np.array([1.0, 0.0, 0.0]),
        elbow_link=0, wrist_link=0, ee_link=1,
    )


class TestForwardKinematics:
    def test_zero_angles_accumulate_fixed_transforms(self):
        chain = fr3_chain()
        poses = forward_kinematics(chain, np.zeros(7))
        oracle = oracle_fk(chain, np.zeros(7))
        for pose, m in zip(poses, oracle):
            assert np.allclose(pose.position, m[:3, 3], atol=1e-12)
            assert np.allclose(quat_to_matrix(pose.orientation), m[:3, :3], atol=1e-12)

    def test_single_joint_half_turn(self):
        poses = forward_kinematics(single_joint_chain(), [math.pi])
        assert np.allclose(poses[-1].position, [-1.0, 0.0, 0.0], atol=1e-12)

    def test_matches_matrix_oracle_random(self):
        chain = fr3_chain()
        for _ in range(50):
            theta = RNG.uniform(-math.pi, math.pi, size=7)
            poses = forward_kinematics(chain, theta)
            oracle = oracle_fk(chain, theta)
            for pose, m in zip(poses, oracle):
                assert np.allclose(pose.position, m[:3, 3], atol=1e-9)
                assert np.allclose(quat_to_matrix(pose.orientation), m[:3, :3], atol=1e-9)

    def test_rotations_stay_orthonormal(self):
        chain = fr3_chain()
        for _ in range(50):
            theta = RNG.uniform(-math.pi, math.pi, size=7)
            for pose in forward_kinematics(chain, theta):
                r = quat_to_matrix(pose.orientation)
                assert np.allclose(r @ r.T, np.eye(3), atol=1e-9)
                assert abs(np.linalg.det(r) - 1.0) < 1e-9

    def test_base_equivariance(self):
        chain = fr3_chain()
        theta = RNG.uniform(-math.pi, math.pi, size=7)
        shift = np.array([0.3, -0.2, 1.1])
        turn = quat.from_axis_angle([0.0, 1.0, 0.0], 0.7)
        moved = KinematicChain(
            joints=chain.joints,
            base_position=chain.base_position + shift,
            base_orientation=quat.qmul(turn, chain.base_orientation),
            tool_translation=chain.tool_translation,
            tool_rotation=chain.tool_rotation,
            elbow_link=chain.elbow_link,
            wrist_link=chain.wrist_link,
            ee_link=chain.ee_link,
        )
        # rigid transform T about the original base position
        for a, b in zip(forward_kinematics(chain, theta), forward_kinematics(moved, theta)):
            expected = quat.qrotate(turn, a.position - chain.base_position) + chain.base_position + shift
            assert np.allclose(b.position, expected, atol=1e-9)

    def test_link_lengths_joint_independent(self):
        chain = fr3_chain()
        ref = None
        for _ in range(20):
            poses = forward_kinematics(chain, RNG.uniform(-math.pi, math.pi, size=7))
            pts = [chain.base_position] + [p.position for p in poses]
            lengths = [float(np.linalg.norm(b - a)) for a, b in zip(pts, pts[1:])]
            if ref is None:
                ref = lengths
            assert np.allclose(lengths, ref, atol=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            forward_kinematics(fr3_chain(), np.zeros(6))


class TestElbowWrist:
    def test_zero_pose_positions(self):
        chain = fr3_chain()
        elbow, wrist = robot_elbow_wrist(chain, np.zeros(7))
        oracle = oracle_fk(chain, np.zeros(7))
        assert np.allclose(elbow, oracle[chain.elbow_link][:3, 3], atol=1e-12)
        assert np.allclose(wrist, oracle[chain.wrist_link][:3, 3], atol=1e-12)

    def test_elbow_ee_aliasing(self):
        j = single_joint_chain()
        aliased = KinematicChain(
            joints=j.joints, tool_translation=j.tool_translation,
            elbow_link=1, wrist_link=1, ee_link=1,
        )
        elbow, _ = robot_elbow_wrist(aliased, [0.3])
        ee = forward_kinematics(aliased, [0.3])[-1].position
        assert np.allclose(elbow, ee)

    def test_elbow_fixed_under_theta4(self):
        chain = fr3_chain()
        base = np.array([0.2, -0.4, 0.1, -1.2, 0.3, 0.5, -0.6])
        elbows, wrists = [], []
        for t4 in np.linspace(-2.5, -0.2, 7):
            theta = base.copy()
            theta[3] = t4
            e, w = robot_elbow_wrist(chain, theta)
            elbows.append(e)
            wrists.append(w)
        assert max(np.linalg.norm(e - elbows[0]) for e in elbows) < 1e-12
        assert max(np.linalg.norm(w - wrists[0]) for w in wrists) > 0.05


class TestClamp:
    def test_within_limits_unchanged(self):
        lim = default_limits()
        jv = joint_vector([0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0])
        out = clamp_to_limits(jv, lim)
        assert np.array_equal(out.theta, jv.theta)
        assert all(f is JointFlag.OK for f in out.flags)

    def test_above_upper_clamps(self):
        lim = default_limits()
        jv = joint_vector([3.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0])
        out = clamp_to_limits(jv, lim)
        assert out.theta[0] == lim.upper[0]
        assert out.flags[0] is JointFlag.CLAMPED

    def test_idempotent(self):
        lim = default_limits()
        jv = joint_vector([5.0, -5.0, 1.0, 1.0, -9.0, 9.0, 0.1])
        once = clamp_to_limits(jv, lim)
        twice = clamp_to_limits(once, lim)
        assert np.array_equal(once.theta, twice.theta)

    def test_limit_validation(self):
        with pytest.raises(ValueError):
            JointLimits(np.ones(7), np.ones(7), np.ones(7))


class TestHumanArmFk:
    def test_straight_neutral_pose(self):
        m = HumanArmModel(shoulder_origin=np.zeros(3))
        f = human_arm_fk(m, [0.0, 0.0, 0.0, math.pi, 0.0, 0.0, 0.0])
        assert np.allclose(f.elbow, [m.upper_length, 0.0, 0.0], atol=1e-12)
        assert np.allclose(f.wrist, [m.upper_length + m.fore_length, 0.0, 0.0], atol=1e-12)
        assert quat.qdist(f.q_upper, quat.IDENTITY) < 1e-12

    def test_vertical_elevation(self):
        m = HumanArmModel(shoulder_origin=np.zeros(3))
        f = human_arm_fk(m, [math.pi / 2, 0.0, 0.0, math.pi, 0.0, 0.0, 0.0])
        assert np.allclose(f.elbow, [0.0, m.upper_length, 0.0], atol=1e-12)

    def test_segment_lengths_exact(self):
        m = HumanArmModel()
        for _ in range(200):
            params = RNG.uniform(
                [-1.4, -3.0, -3.0, 0.1, -3.0, -3.0, -3.0],
                [1.4, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0],
            )
            f = human_arm_fk(m, params)
            assert abs(np.linalg.norm(f.elbow - f.shoulder) - m.upper_length) < 1e-12
            assert abs(np.linalg.norm(f.wrist - f.elbow) - m.fore_length) < 1e-12

    def test_round_trip_interior(self):
        m = HumanArmModel()
        cfg = RetargetConfig()
        lo = np.array([-math.pi / 2 + 0.1, -math.pi + 0.1, -math.pi + 0.1, 0.1,
                       -math.pi + 0.1, -math.pi + 0.1, -math.pi + 0.1])
        hi = np.array([math.pi / 2 - 0.1, math.pi - 0.1, math.pi - 0.1, math.pi - 0.1,
                       math.pi - 0.1, math.pi - 0.1, math.pi - 0.1])
        worst = 0.0
        for _ in range(500):
            params = RNG.uniform(lo, hi)
            recovered = retarget_frame(human_arm_fk(m, params), cfg)
            worst = max(worst, float(np.max(np.abs(recovered.theta - params))))
        assert worst < 1e-6


class TestChainValidation:
    def test_attachment_ordering_enforced(self):
        j = JointDescriptor(axis=[0, 0, 1], translation=[0, 0, 0.1], rotation=quat.IDENTITY)
        with pytest.raises(ValueError):
            KinematicChain(joints=(j, j), elbow_link=1, wrist_link=0, ee_link=2)

    def test_needs_one_joint(self):
        with pytest.raises(ValueError):
            KinematicChain(joints=())
