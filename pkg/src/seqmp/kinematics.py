"""Serial-chain forward kinematics and task constraint constructors.

Chains are lists of revolute/prismatic joints given by an axis and a fixed
origin offset. A MultiRobotSystem stacks several chains into one
configuration vector. Constraint Jacobians go through the finite-difference
fallback of the manifold layer; codimensions here are small, so this keeps
the constructors simple and uniform.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .manifolds import FunctionManifold

REVOLUTE = "revolute"
PRISMATIC = "prismatic"


def _rotation(axis, angle):
    """Rotation matrix about a unit axis (Rodrigues)."""
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    C = 1.0 - c
    return np.array([
        [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
        [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
        [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
    ])


@dataclass(frozen=True)
class Joint:
    axis: tuple
    type: str = REVOLUTE
    origin: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        if not np.isclose(np.linalg.norm(a), 1.0):
            raise ValueError("joint axis must be unit-norm")
        if self.type not in (REVOLUTE, PRISMATIC):
            raise ValueError(f"unknown joint type {self.type!r}")


@dataclass(frozen=True)
class SerialChain:
    """Kinematic chain of joints with a base position and a tool offset."""

    joints: tuple
    base: tuple = (0.0, 0.0, 0.0)
    tool: tuple = (0.0, 0.0, 0.0)
    limits: tuple = None  # per-joint (lo, hi); defaults to (-pi, pi)

    def __post_init__(self):
        if self.limits is not None:
            if len(self.limits) != len(self.joints):
                raise ValueError("limits must match the number of joints")
            for lo, hi in self.limits:
                if lo > hi:
                    raise ValueError("joint limit lo must be <= hi")

    @property
    def dof(self):
        return len(self.joints)

    def joint_limits(self):
        if self.limits is not None:
            return np.asarray(self.limits, dtype=float)
        return np.tile([-np.pi, np.pi], (self.dof, 1))

    def fk_frames(self, q):
        """World positions of the base, each joint frame, and the tool point.

        Returns (positions, R) where positions has shape (dof + 2, 3) and R is
        the orientation of the tool frame.
        """
        q = np.asarray(q, dtype=float)
        p = np.asarray(self.base, dtype=float).copy()
        R = np.eye(3)
        pts = [p.copy()]
        for joint, qi in zip(self.joints, q):
            p = p + R @ np.asarray(joint.origin, dtype=float)
            axis = np.asarray(joint.axis, dtype=float)
            if joint.type == REVOLUTE:
                R = R @ _rotation(axis, qi)
            else:
                p = p + R @ (axis * qi)
            pts.append(p.copy())
        p = p + R @ np.asarray(self.tool, dtype=float)
        pts.append(p.copy())
        return np.array(pts), R

    def fk_point(self, q, local=(0.0, 0.0, 0.0)):
        pts, R = self.fk_frames(q)
        return pts[-1] + R @ np.asarray(local, dtype=float)

    def fk_tool_axis(self, q, local_axis=(0.0, 0.0, 1.0)):
        _, R = self.fk_frames(q)
        return R @ np.asarray(local_axis, dtype=float)


@dataclass(frozen=True)
class MultiRobotSystem:
    """Several chains sharing one stacked configuration vector."""

    chains: tuple
    offsets: tuple = field(init=False, default=None)

    def __post_init__(self):
        offs, total = [], 0
        for c in self.chains:
            offs.append(total)
            total += c.dof
        object.__setattr__(self, "offsets", tuple(offs))
        object.__setattr__(self, "dof", total)

    def chain_config(self, q, chain):
        q = np.asarray(q, dtype=float)
        if not 0 <= chain < len(self.chains):
            raise IndexError(f"chain index {chain} out of range")
        lo = self.offsets[chain]
        return q[lo:lo + self.chains[chain].dof]

    def joint_limits(self):
        return np.vstack([c.joint_limits() for c in self.chains])

    def within_limits(self, q):
        lim = self.joint_limits()
        return bool(np.all(q >= lim[:, 0]) and np.all(q <= lim[:, 1]))

    def body_points(self, q):
        """Collision sample points: every joint frame plus link midpoints."""
        pts = []
        for i, chain in enumerate(self.chains):
            frames, _ = chain.fk_frames(self.chain_config(q, i))
            pts.append(frames)
            pts.append(0.5 * (frames[:-1] + frames[1:]))
        return np.vstack(pts)


def fk_position(sys, chain, point, q):
    """World position of a point given in the tool frame of one chain."""
    return sys.chains[chain].fk_point(sys.chain_config(q, chain), point)


def pick_constraint(sys, chain, x_g, name=None):
    """Constraint pinning the end effector of one chain to a world point x_g."""
    x_g = np.asarray(x_g, dtype=float)
    if name is None:
        name = f"pick[{chain}]"

    def h(q):
        return x_g - fk_position(sys, chain, (0.0, 0.0, 0.0), q)

    return FunctionManifold(sys.dof, 3, h, name=name)


def handover_constraint(sys, chain1, chain2, name=None):
    """Constraint that two end effectors coincide."""
    if name is None:
        name = f"handover[{chain1},{chain2}]"

    def h(q):
        return fk_position(sys, chain1, (0.0, 0.0, 0.0), q) - fk_position(sys, chain2, (0.0, 0.0, 0.0), q)

    return FunctionManifold(sys.dof, 3, h, name=name)


def orientation_constraint(sys, chain, e_z=(0.0, 0.0, 1.0), name=None):
    """Alignment constraint: tool z-axis dotted with e_z equals 1 (residual in [-2, 0])."""
    e_z = np.asarray(e_z, dtype=float)
    if name is None:
        name = f"upright[{chain}]"

    def h(q):
        axis = sys.chains[chain].fk_tool_axis(sys.chain_config(q, chain))
        return np.array([axis @ e_z - 1.0])

    return FunctionManifold(sys.dof, 1, h, name=name)
