"""Implicit constraint manifolds: evaluation, Jacobians, projection, tangent bases.

A manifold is the zero level set of a smooth map h: R^k -> R^l with l <= k.
All operations are pure functions on immutable manifold objects, so they are
safe to share between planner runs.
"""
from __future__ import annotations

import numpy as np

DEFAULT_FD_STEP = 1e-6
DEFAULT_SV_TOL = 1e-9
DEFAULT_MAX_ITERS = 200
DIVERGENCE_PATIENCE = 10


class Manifold:
    """Base class for an implicit constraint h(q) = 0.

    Subclasses must set ``ambient_dim`` and ``codim`` and implement ``h``.
    If no analytic ``jacobian`` is provided, a central finite-difference
    fallback is used.
    """

    name = "manifold"

    def __init__(self, ambient_dim, codim, name=None):
        # Stacked constraints (intersections) may be overdetermined, so codim
        # is only required to be positive, not bounded by the ambient dim.
        if codim < 1 or ambient_dim < 1:
            raise ValueError(f"need k >= 1 and l >= 1, got l={codim}, k={ambient_dim}")
        self.ambient_dim = int(ambient_dim)
        self.codim = int(codim)
        if name is not None:
            self.name = name

    def h(self, q):
        raise NotImplementedError

    def jacobian(self, q):
        return fd_jacobian(self, q, DEFAULT_FD_STEP)

    def __repr__(self):
        return f"{type(self).__name__}(k={self.ambient_dim}, l={self.codim}, name={self.name!r})"


def evaluate(m, q):
    """Evaluate the constraint residual h(q), shape (l,)."""
    q = np.asarray(q, dtype=float)
    if q.shape != (m.ambient_dim,):
        raise ValueError(f"configuration has shape {q.shape}, expected ({m.ambient_dim},)")
    out = np.atleast_1d(np.asarray(m.h(q), dtype=float))
    if out.shape != (m.codim,):
        raise ValueError(f"constraint {m.name} returned shape {out.shape}, expected ({m.codim},)")
    return out


def fd_jacobian(m, q, step=1e-5):
    """Central finite-difference Jacobian of ``m.h`` at ``q``, shape (l, k)."""
    q = np.asarray(q, dtype=float)
    if step <= 0:
        raise ValueError("step must be positive")
    J = np.empty((m.codim, m.ambient_dim))
    for j in range(m.ambient_dim):
        dq = np.zeros_like(q)
        dq[j] = step
        J[:, j] = (np.atleast_1d(m.h(q + dq)) - np.atleast_1d(m.h(q - dq))) / (2.0 * step)
    return J


def project(q, m, eps, max_iters=DEFAULT_MAX_ITERS, sv_tol=DEFAULT_SV_TOL):
    """Newton-style projection of ``q`` onto the manifold ``m``.

    Iterates q <- q - pinv(J(q)) h(q) until ||h(q)|| <= eps. Returns the
    projected configuration, or None when the iteration does not converge
    (the caller discards the sample). The pseudo-inverse is SVD-based with
    singular values below ``sv_tol`` relative to the largest treated as zero.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    q = np.array(q, dtype=float)
    res = evaluate(m, q)
    norm = np.linalg.norm(res)
    if norm <= eps:
        return q
    increases = 0
    for _ in range(max_iters):
        J = np.asarray(m.jacobian(q), dtype=float)
        try:
            step = np.linalg.pinv(J, rcond=sv_tol) @ res
        except np.linalg.LinAlgError:
            return None
        q = q - step
        if not np.all(np.isfinite(q)):
            return None
        res = evaluate(m, q)
        new_norm = np.linalg.norm(res)
        if not np.isfinite(new_norm):
            return None
        if new_norm <= eps:
            return q
        if new_norm >= norm:
            increases += 1
            if increases >= DIVERGENCE_PATIENCE:
                return None
        else:
            increases = 0
        norm = new_norm
    return None


def tangent_nullspace(m, q, sv_tol=DEFAULT_SV_TOL):
    """Orthonormal basis of the tangent space null(J(q)), shape (k, k - rank).

    Rank is the number of singular values above ``sv_tol`` times the largest.
    A zero Jacobian yields the full identity basis.
    """
    if sv_tol <= 0:
        raise ValueError("sv_tol must be positive")
    J = np.asarray(m.jacobian(q), dtype=float)
    _, s, Vt = np.linalg.svd(J, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(m.ambient_dim)
    rank = int(np.sum(s > sv_tol * s[0]))
    return Vt[rank:].T


class Paraboloid(Manifold):
    """h(q) = coeff * (q1^2 + q2^2) + offset - q3 in R^3."""

    def __init__(self, coeff, offset, name="paraboloid"):
        super().__init__(3, 1, name)
        self.coeff = float(coeff)
        self.offset = float(offset)

    def h(self, q):
        return np.array([self.coeff * (q[0] ** 2 + q[1] ** 2) + self.offset - q[2]])

    def jacobian(self, q):
        return np.array([[2.0 * self.coeff * q[0], 2.0 * self.coeff * q[1], -1.0]])


class Cylinder(Manifold):
    """h(q) = coeff * (q1^2 + q2^2) - rhs in R^3 (axis-aligned with z)."""

    def __init__(self, coeff, rhs, name="cylinder"):
        super().__init__(3, 1, name)
        self.coeff = float(coeff)
        self.rhs = float(rhs)

    def h(self, q):
        return np.array([self.coeff * (q[0] ** 2 + q[1] ** 2) - self.rhs])

    def jacobian(self, q):
        return np.array([[2.0 * self.coeff * q[0], 2.0 * self.coeff * q[1], 0.0]])


class Sphere(Manifold):
    """h(q) = ||q - center|| - radius."""

    def __init__(self, radius=1.0, center=None, dim=3, name="sphere"):
        super().__init__(dim, 1, name)
        self.radius = float(radius)
        self.center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def h(self, q):
        return np.array([np.linalg.norm(q - self.center) - self.radius])

    def jacobian(self, q):
        d = q - self.center
        n = np.linalg.norm(d)
        if n == 0.0:
            return np.zeros((1, self.ambient_dim))
        return (d / n)[None, :]


class PointGoal(Manifold):
    """h(q) = q - target; the goal manifold for a fixed configuration."""

    def __init__(self, target, name="goal_point"):
        target = np.asarray(target, dtype=float)
        super().__init__(target.size, target.size, name)
        self.target = target

    def h(self, q):
        return q - self.target

    def jacobian(self, q):
        return np.eye(self.ambient_dim)


class AffinePlane(Manifold):
    """Linear constraint h(q) = A q - b."""

    def __init__(self, A, b, name="plane"):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        super().__init__(A.shape[1], A.shape[0], name)
        self.A = A
        self.b = b

    def h(self, q):
        return self.A @ q - self.b

    def jacobian(self, q):
        return self.A


class FunctionManifold(Manifold):
    """Manifold defined by a user-supplied constraint function.

    The Jacobian falls back to central finite differences when ``jac_fn``
    is not given, so constraints can be specified by h alone.
    """

    def __init__(self, ambient_dim, codim, h_fn, jac_fn=None, name="function_manifold", fd_step=DEFAULT_FD_STEP):
        super().__init__(ambient_dim, codim, name)
        self._h_fn = h_fn
        self._jac_fn = jac_fn
        self.fd_step = fd_step

    def h(self, q):
        return np.atleast_1d(np.asarray(self._h_fn(q), dtype=float))

    def jacobian(self, q):
        if self._jac_fn is not None:
            return np.asarray(self._jac_fn(q), dtype=float)
        return fd_jacobian(self, q, self.fd_step)


class Intersection(Manifold):
    """Stack of two constraints: h = [h1; h2], the manifold M1 ∩ M2."""

    def __init__(self, first, second, name=None):
        if first.ambient_dim != second.ambient_dim:
            raise ValueError("intersecting manifolds must share the ambient dimension")
        if name is None:
            name = f"{first.name}&{second.name}"
        super().__init__(first.ambient_dim, first.codim + second.codim, name)
        self.first = first
        self.second = second

    def h(self, q):
        return np.concatenate([np.atleast_1d(self.first.h(q)), np.atleast_1d(self.second.h(q))])

    def jacobian(self, q):
        return np.vstack([np.atleast_2d(self.first.jacobian(q)), np.atleast_2d(self.second.jacobian(q))])
