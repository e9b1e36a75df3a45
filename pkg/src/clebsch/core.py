"""Finite-dimensional Clebsch-Lagrange / Clebsch-Hamilton engine.

Configuration spaces are open subsets of R^n carrying a linear G-action and
the flat connection, so covariant time derivatives are ordinary derivatives
and ``nabla_v xi_*`` is the Jacobian of ``q -> xi.q`` applied to ``v``.

Covectors and dual algebra elements are stored as plain coordinate arrays:
``<p, v>`` is ``p @ v`` and ``kappa(mu, xi)`` is ``mu @ xi``.  The Lie algebra
variable ``xi`` is prescribed data along trajectories (a constant or a
function of time); the momentum-map constraint is exposed as a diagnostic and
never solved for.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import HypothesisViolation, NonConvergence
from .lie import SO3, SU2, U1, LieGroup, get_group, hat

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50


# ---------------------------------------------------------------------------
# configuration spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConfigurationSpace:
    """A vector space ``R^dim`` with a G-action.

    ``action(g, q)`` acts with a group matrix, ``algebra_action(xi, q)`` is the
    fundamental vector field ``xi.q``, ``cotangent_algebra_action(xi, q, p)`` is
    the fibre part ``Kbar(xi.p)`` of the lifted action and
    ``cotangent_action(g, q, p)`` the lifted group action on momenta.
    """

    group: LieGroup
    dim: int
    action: Callable
    algebra_action: Callable
    cotangent_algebra_action: Callable
    cotangent_action: Callable
    name: str = "space"

    def basis(self):
        return np.eye(self.group.dim)


def linear_space(group, generators, representation, name="linear"):
    """Configuration space for a linear representation.

    ``generators[a]`` is the ``dim x dim`` matrix of the basis element ``e_a``
    and ``representation(g)`` the matrix of a group element.
    """
    gens = np.asarray(generators, dtype=float)
    if gens.ndim != 3 or gens.shape[0] != group.dim or gens.shape[1] != gens.shape[2]:
        raise ValueError(f"need {group.dim} square generator matrices, got shape {gens.shape}")

    def gen(xi):
        return np.tensordot(np.asarray(xi, dtype=float), gens, axes=1)

    def action(g, q):
        return representation(g) @ q

    def algebra_action(xi, q):
        return gen(xi) @ q

    def cotangent_algebra_action(xi, q, p):
        return -gen(xi).T @ p

    def cotangent_action(g, q, p):
        return np.linalg.solve(representation(g).T, p)

    return ConfigurationSpace(
        group=group,
        dim=gens.shape[1],
        action=action,
        algebra_action=algebra_action,
        cotangent_algebra_action=cotangent_algebra_action,
        cotangent_action=cotangent_action,
        name=name,
    )


def _block_diag(block, copies):
    n = block.shape[-1]
    out = np.zeros(block.shape[:-2] + (n * copies, n * copies), dtype=block.dtype)
    for b in range(copies):
        out[..., b * n : (b + 1) * n, b * n : (b + 1) * n] = block
    return out


def rotation_space(bodies=1, group=SO3):
    """SO(3) (or SU(2) through its adjoint image) rotating ``bodies`` points of R^3."""
    gens = _block_diag(hat(np.eye(3)), bodies)
    return linear_space(
        group,
        gens,
        lambda g: _block_diag(group.adjoint_matrix(g), bodies),
        name=f"{group.name}-R3x{bodies}",
    )


def planar_space(bodies=1):
    """U(1) rotating ``bodies`` points of R^2."""
    j = np.array([[0.0, -1.0], [1.0, 0.0]])
    gens = _block_diag(j, bodies)[None]

    def rep(g):
        z = complex(np.asarray(g).reshape(-1)[0])
        rot = np.array([[z.real, -z.imag], [z.imag, z.real]])
        return _block_diag(rot, bodies)

    return linear_space(U1, gens, rep, name=f"u1-R2x{bodies}")


def standard_space(group, bodies=1):
    """Default space for a group name or object: planar for U(1), R^3 otherwise."""
    group = get_group(group) if isinstance(group, str) else group
    if group is U1:
        return planar_space(bodies)
    if group in (SO3, SU2):
        return rotation_space(bodies, group)
    raise ValueError(f"no standard space for {group!r}")


def body_dim(space):
    return 2 if space.group is U1 else 3


# ---------------------------------------------------------------------------
# states, Hamiltonians, Lagrangians
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClebschState:
    q: np.ndarray
    p: np.ndarray
    xi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("q", "p", "xi"):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=float).reshape(-1))
        if self.q.shape != self.p.shape:
            raise ValueError(f"q and p dimensions differ: {self.q.shape} vs {self.p.shape}")

    def check(self, space):
        if self.q.size != space.dim or self.xi.size != space.group.dim:
            raise ValueError(
                f"state dimensions (q {self.q.size}, xi {self.xi.size}) do not match "
                f"space (dim {space.dim}, algebra {space.group.dim})"
            )
        return self


@dataclass(frozen=True, eq=False)
class ClebschHamiltonian:
    """``H(q, p, xi)`` with its partial derivatives.

    ``dq`` returns a covector, ``dp`` a tangent vector and ``dxi`` a dual
    algebra element.  ``is_G_invariant`` asserts
    ``H(g.q, g.p, Ad_g xi) = H(q, p, xi)``; ``is_xi_independent`` asserts that
    ``dxi`` vanishes identically.
    """

    value: Callable
    dq: Callable
    dp: Callable
    dxi: Callable
    is_G_invariant: bool = False
    is_xi_independent: bool = False


@dataclass(frozen=True, eq=False)
class ClebschLagrangian:
    """``L(q, v, xi)`` with partials; ``dv`` is the fibre derivative.

    ``dv_jacobian(q, v, xi)`` (optional) is the Hessian in ``v``, used by the
    inverse Legendre solve instead of finite differences.
    """

    value: Callable
    dv: Callable
    dq: Callable
    dxi: Callable
    dv_jacobian: Callable | None = None


@dataclass(frozen=True, eq=False)
class Potential:
    value: Callable
    dq: Callable
    dxi: Callable
    xi_independent: bool = False


def invariant_potential(space, stiffness=1.0, quartic=0.0, pair=0.0, xi_weight=0.0, xi_coupling=0.0):
    """A rotation-invariant potential on ``bodies`` copies of R^2 or R^3.

    ``V = sum_b (k/2 |q_b|^2 + lam/4 |q_b|^4) + pair sum_{b<c} (q_b . q_c)^2
          + xi_weight/2 |xi|^2 + xi_coupling * f(q, xi)``

    The last term couples ``q`` and ``xi`` and is invariant only when ``xi``
    is transformed with ``Ad``: ``f = sum_b <xi, q_b x q_b'>`` is not available
    for single bodies, so it is ``sum_b |q_b|^2 |xi|^2 / 2``.
    """
    d = body_dim(space)
    nb = space.dim // d

    def bodies(q):
        return np.asarray(q, dtype=float).reshape(nb, d)

    def value(q, xi):
        qb = bodies(q)
        r2 = np.sum(qb**2, axis=1)
        gram = qb @ qb.T
        v = np.sum(0.5 * stiffness * r2 + 0.25 * quartic * r2**2)
        v += pair * np.sum(np.triu(gram, 1) ** 2)
        x2 = float(np.dot(xi, xi))
        v += 0.5 * xi_weight * x2 + 0.5 * xi_coupling * np.sum(r2) * x2
        return float(v)

    def dq(q, xi):
        qb = bodies(q)
        r2 = np.sum(qb**2, axis=1)
        gram = qb @ qb.T
        off = np.triu(gram, 1)
        off = off + off.T
        grad = (stiffness + quartic * r2)[:, None] * qb + 2.0 * pair * off @ qb
        grad += xi_coupling * float(np.dot(xi, xi)) * qb
        return grad.reshape(-1)

    def dxi(q, xi):
        xi = np.asarray(xi, dtype=float)
        r2 = float(np.sum(np.asarray(q, dtype=float) ** 2))
        return (xi_weight + xi_coupling * r2) * xi

    return Potential(value, dq, dxi, xi_independent=(xi_weight == 0 and xi_coupling == 0))


def mechanical_lagrangian(mass, potential):
    """``L(q, v, xi) = m/2 |v|^2 - V(q, xi)``."""

    def value(q, v, xi):
        return 0.5 * mass * float(np.dot(v, v)) - potential.value(q, xi)

    return ClebschLagrangian(
        value=value,
        dv=lambda q, v, xi: mass * np.asarray(v, dtype=float),
        dq=lambda q, v, xi: -potential.dq(q, xi),
        dxi=lambda q, v, xi: -potential.dxi(q, xi),
        dv_jacobian=lambda q, v, xi: mass * np.eye(np.size(v)),
    )


def mechanical_hamiltonian(mass, potential, is_G_invariant=False):
    """``H(q, p, xi) = |p|^2 / (2m) + V(q, xi)``, the Legendre transform of
    :func:`mechanical_lagrangian`."""

    def value(q, p, xi):
        return float(np.dot(p, p)) / (2.0 * mass) + potential.value(q, xi)

    return ClebschHamiltonian(
        value=value,
        dq=lambda q, p, xi: potential.dq(q, xi),
        dp=lambda q, p, xi: np.asarray(p, dtype=float) / mass,
        dxi=lambda q, p, xi: potential.dxi(q, xi),
        is_G_invariant=is_G_invariant,
        is_xi_independent=potential.xi_independent,
    )


# ---------------------------------------------------------------------------
# momentum map and Legendre transform
# ---------------------------------------------------------------------------


def momentum_map(space, q, p):
    """``J(q, p)`` with ``kappa(J, e_a) = <p, e_a . q>`` on the basis of g."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    return np.array([p @ space.algebra_action(e, q) for e in space.basis()])


def momentum_matrix(space, q):
    """Matrix ``M(q)`` with ``J(q, p) = M(q) @ p`` (rows ``e_a . q``)."""
    q = np.asarray(q, dtype=float)
    return np.array([space.algebra_action(e, q) for e in space.basis()])


def project_to_momentum_level(space, q, p, level=None):
    """Closest ``p'`` (Euclidean) to ``p`` with ``J(q, p') = level`` (default 0)."""
    m = momentum_matrix(space, q)
    target = np.zeros(space.group.dim) if level is None else np.asarray(level, dtype=float)
    resid = m @ np.asarray(p, dtype=float) - target
    return np.asarray(p, dtype=float) - m.T @ np.linalg.lstsq(m @ m.T, resid, rcond=None)[0]


def effective_velocity(space, q, qdot, xi):
    return np.asarray(qdot, dtype=float) + space.algebra_action(xi, q)


def clebsch_legendre(space, lagrangian, q, qdot, xi):
    """``(q, qdot, xi) -> (q, dL/dv(q, qdot + xi.q, xi), xi)``."""
    v = effective_velocity(space, q, qdot, xi)
    return ClebschState(q, lagrangian.dv(q, v, xi), xi)


def _fd_jacobian(f, v, h=1e-6):
    n = v.size
    jac = np.empty((n, n))
    for j in range(n):
        step = h * max(1.0, abs(v[j]))
        e = np.zeros(n)
        e[j] = step
        jac[:, j] = (f(v + e) - f(v - e)) / (2.0 * step)
    return jac


def solve_velocity(lagrangian, q, p, xi, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER):
    """Solve ``p = dL/dv(q, v, xi)`` for ``v`` by damped Newton from ``v = 0``.

    Returns ``(v, iterations)``.  Raises :class:`NonConvergence` when the
    fibre derivative is singular or the iteration stalls.
    """
    p = np.asarray(p, dtype=float)
    v = np.zeros_like(p)

    def resid(v):
        return lagrangian.dv(q, v, xi) - p

    r = resid(v)
    scale = max(1.0, float(np.max(np.abs(p)))) if p.size else 1.0
    for it in range(1, max_iter + 1):
        if lagrangian.dv_jacobian is not None:
            jac = np.asarray(lagrangian.dv_jacobian(q, v, xi), dtype=float)
        else:
            jac = _fd_jacobian(resid, v)
        if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > 1e13:
            raise NonConvergence(
                "fibre derivative is singular: the Lagrangian is not regular here",
                iterations=it,
                residual=float(np.max(np.abs(r))),
            )
        dv = np.linalg.solve(jac, r)
        norm0 = float(np.linalg.norm(r))
        damping = 1.0
        while True:
            v_new = v - damping * dv
            r_new = resid(v_new)
            if np.linalg.norm(r_new) < norm0 or damping < 1e-4:
                break
            damping *= 0.5
        v, r = v_new, r_new
        if float(np.max(np.abs(r))) <= tol * scale:
            return v, it
    raise NonConvergence(
        f"inverse fibre derivative did not converge in {max_iter} iterations",
        iterations=max_iter,
        residual=float(np.max(np.abs(r))),
    )


def inverse_clebsch_legendre(space, lagrangian, state):
    """Inverse of :func:`clebsch_legendre`: returns ``(q, qdot, xi)``."""
    v, _ = solve_velocity(lagrangian, state.q, state.p, state.xi)
    return state.q, v - space.algebra_action(state.xi, state.q), state.xi


def hamiltonian_from_lagrangian(lagrangian, is_G_invariant=False, is_xi_independent=False):
    """Clebsch-Hamiltonian ``H = <p, v> - L(q, v, xi)`` of a regular Lagrangian.

    The partials follow from the envelope relations: ``dH/dq = -dL/dq``,
    ``dH/dp = v`` and ``dH/dxi = -dL/dxi``, all at the solved velocity.
    """

    def vel(q, p, xi):
        return solve_velocity(lagrangian, q, p, xi)[0]

    def value(q, p, xi):
        v = vel(q, p, xi)
        return float(np.dot(p, v)) - lagrangian.value(q, v, xi)

    return ClebschHamiltonian(
        value=value,
        dq=lambda q, p, xi: -lagrangian.dq(q, vel(q, p, xi), xi),
        dp=vel,
        dxi=lambda q, p, xi: -lagrangian.dxi(q, vel(q, p, xi), xi),
        is_G_invariant=is_G_invariant,
        is_xi_independent=is_xi_independent,
    )


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------


def clebsch_hamilton_rhs(space, hamiltonian, state):
    """``qdot = dH/dp - xi.q``, ``pdot = -dH/dq - Kbar(xi.p)`` at fixed ``xi``."""
    q, p, xi = state.q, state.p, state.xi
    qdot = hamiltonian.dp(q, p, xi) - space.algebra_action(xi, q)
    pdot = -hamiltonian.dq(q, p, xi) - space.cotangent_algebra_action(xi, q, p)
    return qdot, pdot


def as_xi_function(xi):
    """Normalise a constant or callable ``xi`` to a function of time."""
    if callable(xi):
        return xi
    const = np.array(xi, dtype=float).reshape(-1)
    return lambda t: const


def pack(q, p):
    return np.concatenate([np.asarray(q, dtype=float), np.asarray(p, dtype=float)])


def unpack(y, n):
    return y[:n], y[n:]


def clebsch_vector_field(space, hamiltonian, xi):
    """Right-hand side ``f(t, y)`` on packed ``y = (q, p)`` for prescribed ``xi(t)``."""
    xi_of_t = as_xi_function(xi)
    n = space.dim

    def rhs(t, y):
        q, p = unpack(y, n)
        qdot, pdot = clebsch_hamilton_rhs(space, hamiltonian, ClebschState(q, p, xi_of_t(t), t))
        return pack(qdot, pdot)

    return rhs


def momentum_constraint_residual(space, hamiltonian, state):
    """``C(q, p, xi) = J(q, p) - dH/dxi(q, p, xi)``."""
    return momentum_map(space, state.q, state.p) - np.asarray(
        hamiltonian.dxi(state.q, state.p, state.xi), dtype=float
    )


# ---------------------------------------------------------------------------
# Lagrangian-side diagnostics
# ---------------------------------------------------------------------------


def _flat_connection_term(space, xi, q, covector):
    """``<covector, nabla xi_*>`` as a covector: ``-Kbar(xi.covector)`` by duality."""
    return -space.cotangent_algebra_action(xi, q, covector)


def cel_residual(space, lagrangian, qs, qdots, xis, dt):
    """Clebsch-Euler-Lagrange residuals at the interior samples of a path.

    ``qs``, ``qdots`` and ``xis`` hold at least three consecutive, uniformly
    spaced samples.  Returns ``(evolution, constraint)`` arrays with one row per
    interior sample:

    * ``d/dt(dL/dv) - <dL/dv, nabla xi_*> - dL/dq`` (time derivative by central
      differences),
    * ``<dL/dv, e_a . q> + kappa(dL/dxi, e_a)`` for the basis ``e_a``.
    """
    qs, qdots, xis = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (qs, qdots, xis))
    if len(qs) < 3:
        raise ValueError("need at least three consecutive samples")
    momenta = []
    for q, qd, xi in zip(qs, qdots, xis):
        v = effective_velocity(space, q, qd, xi)
        momenta.append(lagrangian.dv(q, v, xi))
    momenta = np.array(momenta)
    evol, cons = [], []
    for k in range(1, len(qs) - 1):
        q, qd, xi = qs[k], qdots[k], xis[k]
        v = effective_velocity(space, q, qd, xi)
        pk = momenta[k]
        dpdt = (momenta[k + 1] - momenta[k - 1]) / (2.0 * dt)
        evol.append(dpdt - _flat_connection_term(space, xi, q, pk) - lagrangian.dq(q, v, xi))
        cons.append(momentum_map(space, q, pk) + lagrangian.dxi(q, v, xi))
    return np.array(evol), np.array(cons)


def action_functional(space, lagrangian, qs, xis, dt):
    """``S = int L(q, qdot + xi.q, xi) dt`` by the trapezoidal rule.

    ``qdot`` comes from second-order differences (central inside, one-sided at
    the ends).
    """
    qs = np.asarray(qs, dtype=float)
    xis = np.asarray(xis, dtype=float)
    if len(qs) < 3:
        raise ValueError("action needs at least three samples")
    qdots = np.gradient(qs, dt, axis=0, edge_order=2)
    vals = np.array(
        [
            lagrangian.value(q, effective_velocity(space, q, qd, xi), xi)
            for q, qd, xi in zip(qs, qdots, xis)
        ]
    )
    return float(dt * (vals.sum() - 0.5 * (vals[0] + vals[-1])))


# ---------------------------------------------------------------------------
# Hamiltonian-side diagnostics
# ---------------------------------------------------------------------------


def euler_poincare_residual(space, hamiltonian, qs, ps, xis, dt):
    """Max over interior samples of ``|dJ/dt + Coad_xi J|``.

    ``Coad`` is the infinitesimal coadjoint representation, ``-ad*``, so the
    quantity evaluated is ``|dJ/dt - ad*_xi J|`` with central differences; it
    is O(dt^2) along solutions when ``H(g.q, g.p, xi) = H(q, p, xi)``.
    """
    if not hamiltonian.is_G_invariant:
        raise HypothesisViolation("Euler-Poincare residual needs a G-invariant Hamiltonian")
    js = np.array([momentum_map(space, q, p) for q, p in zip(qs, ps)])
    xis = np.asarray(xis, dtype=float)
    djdt = (js[2:] - js[:-2]) / (2.0 * dt)
    resid = djdt + space.group.coad(xis[1:-1], js[1:-1])
    return float(np.max(np.linalg.norm(resid, axis=-1))) if len(resid) else 0.0


def constraint_drift_residual(space, hamiltonian, qs, ps, xis, dt):
    """Max over interior samples of ``|dC/dt + Coad_xi C + d/dt dH/dxi|``."""
    if not hamiltonian.is_G_invariant:
        raise HypothesisViolation("constraint drift identity needs a G-invariant Hamiltonian")
    xis = np.asarray(xis, dtype=float)
    cs, hx = [], []
    for q, p, xi in zip(qs, ps, xis):
        cs.append(momentum_map(space, q, p) - hamiltonian.dxi(q, p, xi))
        hx.append(hamiltonian.dxi(q, p, xi))
    cs, hx = np.array(cs), np.array(hx)
    resid = (
        (cs[2:] - cs[:-2]) / (2.0 * dt)
        + space.group.coad(xis[1:-1], cs[1:-1])
        + (hx[2:] - hx[:-2]) / (2.0 * dt)
    )
    return float(np.max(np.linalg.norm(resid, axis=-1))) if len(resid) else 0.0


def invariance_defect(space, hamiltonian, rng, samples=20, transform_xi=True):
    """Largest relative change of ``H`` under random group translations.

    With ``transform_xi`` the test is ``H(g.q, g.p, Ad_g xi) = H(q, p, xi)``,
    otherwise ``H(g.q, g.p, xi) = H(q, p, xi)``.
    """
    group = space.group
    worst = 0.0
    for _ in range(samples):
        q = rng.normal(size=space.dim)
        p = rng.normal(size=space.dim)
        xi = rng.normal(size=group.dim)
        g = group.exp(rng.normal(size=group.dim) * 2.0)
        xi_g = group.adjoint(g, xi) if transform_xi else xi
        h0 = hamiltonian.value(q, p, xi)
        h1 = hamiltonian.value(space.action(g, q), space.cotangent_action(g, q, p), xi_g)
        worst = max(worst, abs(h1 - h0) / max(1.0, abs(h0)))
    return worst
