"""Extended phase space ``T*Q x (g x g*)`` and its constraint structure.

Points are ``(q, p, xi, nu)``.  The tangent group ``g x| G`` acts by
``(zeta, g).(q, p, xi, nu) = (g.q, g.p, Ad_g xi + zeta, CoAd_g nu)`` with
momentum map ``J_ext = (nu, J(q, p) + Coad_xi nu)`` where ``Coad = -ad*``.
The constraint chain is hard-coded in its two-stage form: the primary
constraint ``nu = 0`` and the secondary ``dH/dxi - J = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    ClebschHamiltonian,
    ClebschState,
    as_xi_function,
    clebsch_vector_field,
    momentum_map,
    pack,
)
from .errors import ConstraintViolation, GroupMismatch, HypothesisViolation
from .integrators import StepperSpec, integrate

CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ExtendedState:
    q: np.ndarray
    p: np.ndarray
    xi: np.ndarray
    nu: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("q", "p", "xi", "nu"):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=float).reshape(-1))
        if self.q.shape != self.p.shape:
            raise ValueError(f"q and p dimensions differ: {self.q.shape} vs {self.p.shape}")
        if self.xi.shape != self.nu.shape:
            raise ValueError(f"xi and nu dimensions differ: {self.xi.shape} vs {self.nu.shape}")

    def clebsch(self):
        return ClebschState(self.q, self.p, self.xi, self.t)


def tangent_group_act(space, elem, state):
    """Lifted action of ``elem = (zeta, g)`` on an extended state."""
    if elem.group is not space.group:
        raise GroupMismatch(f"element of {elem.group.name} cannot act on a {space.group.name} space")
    group = space.group
    g = elem.g.matrix
    return ExtendedState(
        q=space.action(g, state.q),
        p=space.cotangent_action(g, state.q, state.p),
        xi=group.adjoint(g, state.xi) + elem.xi.coords,
        nu=group.coadjoint(g, state.nu),
        t=state.t,
    )


def extended_momentum_map(space, state):
    """``(nu, J(q, p) + Coad_xi nu)``."""
    j = momentum_map(space, state.q, state.p)
    return state.nu.copy(), j + space.group.coad(state.xi, state.nu)


def extended_hamiltonian(space, hamiltonian):
    """``H_ext(q, p, xi) = H(q, p, xi) - kappa(J(q, p), xi)`` with partials.

    ``dH_ext/dq = dH/dq + Kbar(xi.p)``, ``dH_ext/dp = dH/dp - xi.q`` and
    ``dH_ext/dxi = dH/dxi - J``.
    """

    def value(q, p, xi):
        return hamiltonian.value(q, p, xi) - float(momentum_map(space, q, p) @ np.asarray(xi, dtype=float))

    def dq(q, p, xi):
        return hamiltonian.dq(q, p, xi) + space.cotangent_algebra_action(xi, q, p)

    def dp(q, p, xi):
        return hamiltonian.dp(q, p, xi) - space.algebra_action(xi, q)

    def dxi(q, p, xi):
        return np.asarray(hamiltonian.dxi(q, p, xi), dtype=float) - momentum_map(space, q, p)

    return ClebschHamiltonian(
        value=value,
        dq=dq,
        dp=dp,
        dxi=dxi,
        is_G_invariant=hamiltonian.is_G_invariant,
        is_xi_independent=False,
    )


def extended_hamilton_rhs(space, hamiltonian, state, h_ext=None):
    """Plain Hamilton equations of ``H_ext`` in ``(q, p)``; ``nu`` does not move."""
    h_ext = h_ext or extended_hamiltonian(space, hamiltonian)
    return h_ext.dp(state.q, state.p, state.xi), -h_ext.dq(state.q, state.p, state.xi)


def dirac_constraints(space, hamiltonian, state):
    """``(primary, secondary) = (nu, dH/dxi - J(q, p))``."""
    secondary = np.asarray(hamiltonian.dxi(state.q, state.p, state.xi), dtype=float) - momentum_map(
        space, state.q, state.p
    )
    return state.nu.copy(), secondary


def extended_vector_field(space, hamiltonian, xi):
    """``f(t, y)`` on packed ``y = (q, p, nu)`` for prescribed ``xi(t)``."""
    xi_of_t = as_xi_function(xi)
    h_ext = extended_hamiltonian(space, hamiltonian)
    n = space.dim

    def rhs(t, y):
        q, p, nu = y[:n], y[n : 2 * n], y[2 * n :]
        qdot, pdot = extended_hamilton_rhs(
            space, hamiltonian, ExtendedState(q, p, xi_of_t(t), nu, t), h_ext=h_ext
        )
        return np.concatenate([qdot, pdot, np.zeros_like(nu)])

    return rhs


@dataclass
class EquivalenceReport:
    """Outcome of :func:`equivalence_check`.

    ``trajectory_discrepancy`` compares the two formulations pointwise in
    ``(q, p)``; ``gauge_discrepancy`` and ``alt_xi_discrepancy`` compare the
    invariant observables of the reference run with a gauge-shifted run and a
    run with a different ``xi(t)`` (NaN when not requested).
    """

    trajectory_discrepancy: float
    nu_drift: float
    secondary_drift: float
    gauge_discrepancy: float = float("nan")
    alt_xi_discrepancy: float = float("nan")
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    observables: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))


def _observable_series(observables, states, n):
    return np.array([[f(y[:n], y[n : 2 * n]) for f in observables] for y in states]).reshape(len(states), -1)


def equivalence_check(
    space,
    hamiltonian,
    q0,
    p0,
    xi,
    horizon,
    dt,
    observables=(),
    gauge=None,
    alt_xi=None,
    scheme="rk4",
):
    """Integrate the Clebsch-Hamilton and the extended systems side by side.

    ``xi`` is a constant or a function of time shared by both runs.  ``gauge``
    (a :class:`~clebsch.lie.GroupElement`) requests a run from ``(g.q0, g.p0)``
    with ``Ad_g xi(t)``; ``alt_xi`` a run from the same data with another
    ``xi(t)``.  Both are compared through the invariant ``observables``, each a
    function ``f(q, p) -> float``.
    """
    if not (hamiltonian.is_G_invariant and hamiltonian.is_xi_independent):
        raise HypothesisViolation("equivalence check needs a xi-independent, G-invariant Hamiltonian")
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    xi_of_t = as_xi_function(xi)
    n = space.dim
    nu0 = np.zeros(space.group.dim)
    start = ExtendedState(q0, p0, xi_of_t(0.0), nu0)
    primary, secondary = dirac_constraints(space, hamiltonian, start)
    worst = max(float(np.max(np.abs(primary))), float(np.max(np.abs(secondary))))
    if worst > CONSTRAINT_TOL:
        raise ConstraintViolation(f"initial data violate the constraints by {worst:.3e} (> {CONSTRAINT_TOL})")

    spec = StepperSpec(dt=dt, scheme=scheme)
    ref = integrate(clebsch_vector_field(space, hamiltonian, xi_of_t), pack(q0, p0), horizon, spec)
    ext = integrate(
        extended_vector_field(space, hamiltonian, xi_of_t), np.concatenate([q0, p0, nu0]), horizon, spec
    )
    traj = float(np.max(np.abs(ref.states - ext.states[:, : 2 * n])))
    nu_drift = float(np.max(np.abs(ext.states[:, 2 * n :])))
    sec = []
    for t, y in zip(ext.times, ext.states):
        sec.append(dirac_constraints(space, hamiltonian, ExtendedState(y[:n], y[n : 2 * n], xi_of_t(t), y[2 * n :]))[1])
    report = EquivalenceReport(
        trajectory_discrepancy=traj,
        nu_drift=nu_drift,
        secondary_drift=float(np.max(np.linalg.norm(sec, axis=-1))),
        times=ref.times,
    )
    if not observables:
        return report
    base = _observable_series(observables, ref.states, n)
    report.observables = base

    if gauge is not None:
        g = gauge.matrix
        group = space.group
        shifted = integrate(
            clebsch_vector_field(space, hamiltonian, lambda t: group.adjoint(g, xi_of_t(t))),
            pack(space.action(g, q0), space.cotangent_action(g, q0, p0)),
            horizon,
            spec,
        )
        report.gauge_discrepancy = float(np.max(np.abs(_observable_series(observables, shifted.states, n) - base)))
    if alt_xi is not None:
        alt = integrate(clebsch_vector_field(space, hamiltonian, alt_xi), pack(q0, p0), horizon, spec)
        report.alt_xi_discrepancy = float(np.max(np.abs(_observable_series(observables, alt.states, n) - base)))
    return report
