"""Forward kinematics and the pick/handover/orientation constraint constructors."""
import numpy as np
import pytest

from seqmp import kinematics as kin
from seqmp.manifolds import evaluate, project

RNG = np.random.default_rng(7)


def planar_two_link(base=(0.0, 0.0, 0.0)):
    """Two revolute z-joints with unit links; tool at the second link tip."""
    return kin.SerialChain(
        joints=(
            kin.Joint((0.0, 0.0, 1.0), kin.REVOLUTE, (0.0, 0.0, 0.0)),
            kin.Joint((0.0, 0.0, 1.0), kin.REVOLUTE, (1.0, 0.0, 0.0)),
        ),
        base=base,
        tool=(1.0, 0.0, 0.0),
    )


def _oracle_fk(chain, q):
    """Independent FK via homogeneous transforms."""
    def rot_h(axis, angle):
        T = np.eye(4)
        T[:3, :3] = _rodrigues(axis, angle)
        return T

    def trans_h(v):
        T = np.eye(4)
        T[:3, 3] = v
        return T

    def _rodrigues(axis, angle):
        a = np.asarray(axis, dtype=float)
        K = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
        return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K

    T = trans_h(chain.base)
    for joint, qi in zip(chain.joints, q):
        T = T @ trans_h(joint.origin)
        if joint.type == kin.REVOLUTE:
            T = T @ rot_h(joint.axis, qi)
        else:
            T = T @ trans_h(np.asarray(joint.axis) * qi)
    T = T @ trans_h(chain.tool)
    return T[:3, 3]


class TestForwardKinematics:
    def test_stretched_out_pose(self):
        sys = kin.MultiRobotSystem(chains=(planar_two_link(),))
        assert kin.fk_position(sys, 0, (0, 0, 0), np.zeros(2)) == pytest.approx([2.0, 0.0, 0.0])

    def test_quarter_turn(self):
        sys = kin.MultiRobotSystem(chains=(planar_two_link(),))
        p = kin.fk_position(sys, 0, (0, 0, 0), np.array([np.pi / 2, 0.0]))
        assert p == pytest.approx([0.0, 2.0, 0.0], abs=1e-12)

    def test_matches_homogeneous_transform_oracle(self):
        from seqmp.scene import _transport_a_system, _transport_b_system

        for sys in (_transport_a_system(), _transport_b_system()):
            for chain_idx, chain in enumerate(sys.chains):
                for _ in range(20):
                    q_full = RNG.uniform(-1.5, 1.5, size=sys.dof)
                    q = sys.chain_config(q_full, chain_idx)
                    p = kin.fk_position(sys, chain_idx, (0, 0, 0), q_full)
                    assert p == pytest.approx(_oracle_fk(chain, q), abs=1e-10)

    def test_invalid_chain_index(self):
        sys = kin.MultiRobotSystem(chains=(planar_two_link(),))
        with pytest.raises(IndexError):
            sys.chain_config(np.zeros(2), 3)

    def test_prismatic_joint(self):
        chain = kin.SerialChain(
            joints=(kin.Joint((1.0, 0.0, 0.0), kin.PRISMATIC, (0.0, 0.0, 0.0)),),
            tool=(0.0, 0.0, 0.5),
        )
        sys = kin.MultiRobotSystem(chains=(chain,))
        assert kin.fk_position(sys, 0, (0, 0, 0), np.array([0.7])) == pytest.approx([0.7, 0.0, 0.5])

    def test_joint_axis_must_be_unit(self):
        with pytest.raises(ValueError):
            kin.Joint((1.0, 1.0, 0.0), kin.REVOLUTE)

    def test_joint_limits(self):
        sys = kin.MultiRobotSystem(chains=(planar_two_link(),))
        lim = sys.joint_limits()
        assert lim.shape == (2, 2)
        assert sys.within_limits(np.zeros(2))
        assert not sys.within_limits(np.array([4.0, 0.0]))


class TestPickConstraint:
    def test_zero_residual_at_target(self):
        sys = kin.MultiRobotSystem(chains=(planar_two_link(),))
        q = np.array([0.3, -0.4])
        x_g = kin.fk_position(sys, 0, (0, 0, 0), q)
        m = kin.pick_constraint(sys, 0, x_g)
        assert evaluate(m, q) == pytest.approx(np.zeros(3), abs=1e-12)

    def test_definitional_residual(self):
        sys = kin.MultiRobotSystem(chains=(planar_two_link(),))
        x_g = np.array([1.0, 0.5, 0.0])
        m = kin.pick_constraint(sys, 0, x_g)
        for _ in range(10):
            q = RNG.uniform(-2, 2, size=2)
            expected = x_g - kin.fk_position(sys, 0, (0, 0, 0), q)
            assert evaluate(m, q) == pytest.approx(expected, abs=1e-12)

    def test_projection_reaches_target(self):
        sys = kin.MultiRobotSystem(chains=(planar_two_link(),))
        x_g = np.array([1.2, 0.7, 0.0])
        m = kin.pick_constraint(sys, 0, x_g)
        hits = 0
        for _ in range(10):
            q = project(RNG.uniform(-2, 2, size=2), m, eps=1e-6)
            if q is not None:
                hits += 1
                assert np.linalg.norm(x_g - kin.fk_position(sys, 0, (0, 0, 0), q)) <= 1e-6
        assert hits >= 5


class TestHandoverConstraint:
    def _mirrored(self):
        return kin.MultiRobotSystem(chains=(
            planar_two_link(base=(-2.0, 0.0, 0.0)),
            planar_two_link(base=(2.0, 0.0, 0.0)),
        ))

    def test_symmetric_meeting_at_midpoint(self):
        sys = self._mirrored()
        # both arms folded onto the x axis, tips meeting at the origin
        q = np.array([0.0, 0.0, np.pi, 0.0])
        m = kin.handover_constraint(sys, 0, 1)
        assert evaluate(m, q) == pytest.approx(np.zeros(3), abs=1e-12)

    def test_antisymmetric_under_role_swap(self):
        sys = self._mirrored()
        m12 = kin.handover_constraint(sys, 0, 1)
        m21 = kin.handover_constraint(sys, 1, 0)
        for _ in range(10):
            q = RNG.uniform(-2, 2, size=4)
            assert evaluate(m12, q) == pytest.approx(-evaluate(m21, q), abs=1e-12)

    def test_projection_coincidence(self):
        sys = self._mirrored()
        m = kin.handover_constraint(sys, 0, 1)
        hits = 0
        for _ in range(10):
            q = project(RNG.uniform(-2, 2, size=4), m, eps=1e-6)
            if q is not None:
                hits += 1
                p1 = kin.fk_position(sys, 0, (0, 0, 0), q)
                p2 = kin.fk_position(sys, 1, (0, 0, 0), q)
                assert np.linalg.norm(p1 - p2) <= 1e-6
        assert hits >= 5


class TestOrientationConstraint:
    def _tilting(self):
        # one pitch joint; tool z-axis tilts by the joint angle
        chain = kin.SerialChain(
            joints=(kin.Joint((0.0, 1.0, 0.0), kin.REVOLUTE, (0.0, 0.0, 0.0)),),
            tool=(0.0, 0.0, 0.0),
        )
        return kin.MultiRobotSystem(chains=(chain,))

    def test_identity_orientation(self):
        m = kin.orientation_constraint(self._tilting(), 0)
        assert evaluate(m, np.zeros(1)) == pytest.approx([0.0], abs=1e-12)

    def test_quarter_turn_residual(self):
        m = kin.orientation_constraint(self._tilting(), 0)
        assert evaluate(m, np.array([np.pi / 2])) == pytest.approx([-1.0], abs=1e-12)

    def test_residual_is_cos_theta_minus_one(self):
        m = kin.orientation_constraint(self._tilting(), 0)
        for theta in RNG.uniform(-np.pi, np.pi, size=20):
            assert evaluate(m, np.array([theta])) == pytest.approx([np.cos(theta) - 1.0], abs=1e-12)

    def test_residual_range(self):
        from seqmp.scene import _transport_a_system

        sys = _transport_a_system()
        m = kin.orientation_constraint(sys, 0)
        for _ in range(50):
            q = RNG.uniform(-2.2, 2.2, size=sys.dof)
            r = evaluate(m, q)[0]
            assert -2.0 - 1e-12 <= r <= 1e-12


def test_fk_smoothness_smoke():
    from seqmp.scene import _transport_a_system

    sys = _transport_a_system()
    delta = 1e-4
    for _ in range(20):
        q = RNG.uniform(-2, 2, size=sys.dof)
        dq = RNG.normal(size=sys.dof)
        dq *= delta / np.linalg.norm(dq)
        move = np.linalg.norm(
            kin.fk_position(sys, 0, (0, 0, 0), q + dq) - kin.fk_position(sys, 0, (0, 0, 0), q)
        )
        assert move <= 5.0 * delta  # total link length bounds the FK Lipschitz constant
