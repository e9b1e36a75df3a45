"""Spatially homogeneous vacuum gravity on a flat 3-torus in ADM variables.

The spatial metric ``g`` is a constant SPD matrix, so the scalar curvature
and every spatial derivative vanish; the shift drops out and only the lapse
``l`` (prescribed) enters.  ``pi_bar`` is the momentum density coefficient,
``pi = sqrt(det g) pi_bar``, stored with raised indices.  The coordinate
volume is 1.

Matrix conventions: ``|k|^2_g = tr(g^-1 k g^-1 k)`` and ``tr_g k = tr(g^-1 k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularMetric

SYMMETRY_TOL = 1e-12


def _sym_check(m, name):
    m = np.array(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"{name} must be 3x3, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(m)))):
        raise ValueError(f"{name} is not symmetric")
    return 0.5 * (m + m.T)


def metric_factor(g):
    """Cholesky factor of ``g``; raises :class:`SingularMetric` if ``g`` is not SPD."""
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise SingularMetric(
            f"metric lost positive definiteness (eigenvalues {np.linalg.eigvalsh(0.5 * (g + g.T))})"
        ) from None


@dataclass(frozen=True, eq=False)
class AdmState:
    g: np.ndarray
    pi_bar: np.ndarray
    lapse: float = 1.0
    shift: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "g", _sym_check(self.g, "g"))
        object.__setattr__(self, "pi_bar", _sym_check(self.pi_bar, "pi_bar"))
        object.__setattr__(self, "shift", np.array(self.shift, dtype=float).reshape(3))
        if not (np.isfinite(self.lapse) and self.lapse > 0):
            raise ValueError(f"lapse must be positive, got {self.lapse!r}")
        metric_factor(self.g)

    @property
    def volume_density(self):
        return float(np.sqrt(np.linalg.det(self.g)))


@dataclass(frozen=True, eq=False)
class ExtrinsicData:
    k: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k", _sym_check(self.k, "k"))


def _k(k):
    return k.k if isinstance(k, ExtrinsicData) else np.asarray(k, dtype=float)


def gr_effective_velocity(state, gdot):
    """``k = g_dot / (2 l)`` (the shift term vanishes for homogeneous data)."""
    return ExtrinsicData(np.asarray(gdot, dtype=float) / (2.0 * state.lapse))


def gr_lagrangian(state, k):
    """``l sqrt(det g) (|k|^2_g - (tr_g k)^2)``."""
    gi = np.linalg.inv(state.g)
    m = gi @ _k(k)
    return float(state.lapse * state.volume_density * (np.trace(m @ m) - np.trace(m) ** 2))


def gr_legendre(state, k):
    """``pi_bar = g^-1 k g^-1 - (tr_g k) g^-1``."""
    gi = np.linalg.inv(state.g)
    kk = _k(k)
    return gi @ kk @ gi - np.trace(gi @ kk) * gi


def gr_inverse_legendre(state, pi_bar=None):
    """``k = g pi_bar g - 1/2 tr(g pi_bar) g``."""
    pb = state.pi_bar if pi_bar is None else np.asarray(pi_bar, dtype=float)
    g = state.g
    return ExtrinsicData(g @ pb @ g - 0.5 * np.trace(g @ pb) * g)


def gr_momentum_map(state):
    """``2 (div_g pi)_flat``: zero for homogeneous data."""
    return np.zeros(3)


def momentum_map_field(g, pi_field, spacing):
    """``2 g_jk d_i pi^{ik}`` on a periodic grid for a constant metric.

    ``pi_field`` has shape ``(N, N, N, 3, 3)``; derivatives are central
    differences with step ``spacing``.  Christoffel terms vanish because the
    metric is constant.
    """
    pi_field = np.asarray(pi_field, dtype=float)
    div = np.zeros(pi_field.shape[:3] + (3,))
    for i in range(3):
        d = (np.roll(pi_field, -1, axis=i) - np.roll(pi_field, 1, axis=i)) / (2.0 * spacing)
        div += d[..., i, :]
    return 2.0 * div @ np.asarray(g, dtype=float).T


def hamiltonian_constraint(state):
    """``(tr_g k)^2 - |k|^2_g`` with ``k`` recovered from ``pi_bar``."""
    gi = np.linalg.inv(state.g)
    m = gi @ gr_inverse_legendre(state).k
    return float(np.trace(m) ** 2 - np.trace(m @ m))


def gr_constraints(state):
    """``(diffeomorphism residual, Hamiltonian residual)``; the former is 0."""
    return gr_momentum_map(state), hamiltonian_constraint(state)


def adm_hamiltonian(state):
    """``l sqrt(det g) (tr(g pi_bar g pi_bar) - 1/2 tr(g pi_bar)^2)``."""
    gp = state.g @ state.pi_bar
    return float(state.lapse * state.volume_density * (np.trace(gp @ gp) - 0.5 * np.trace(gp) ** 2))


def adm_hamiltonian_canonical(g, pi, lapse=1.0):
    """The same Hamiltonian in the canonical pair ``(g, pi)`` with ``pi`` a density."""
    g = np.asarray(g, dtype=float)
    pi = np.asarray(pi, dtype=float)
    s = np.sqrt(np.linalg.det(g))
    gp = g @ pi
    return float(lapse / s * (np.trace(gp @ gp) - 0.5 * np.trace(gp) ** 2))


def adm_partials(g, pi, lapse=1.0):
    """Closed-form ``(dH/dg, dH/dpi)`` of :func:`adm_hamiltonian_canonical`.

    Gradients are with respect to the trace pairing ``dH = tr(G dg) + tr(P dpi)``
    over symmetric variations.
    """
    g = np.asarray(g, dtype=float)
    pi = np.asarray(pi, dtype=float)
    s = np.sqrt(np.linalg.det(g))
    gi = np.linalg.inv(g)
    gp = g @ pi
    q = np.trace(gp @ gp) - 0.5 * np.trace(gp) ** 2
    d_pi = lapse / s * (2.0 * g @ pi @ g - np.trace(gp) * g)
    d_g = lapse / s * (-0.5 * q * gi + 2.0 * pi @ g @ pi - np.trace(gp) * pi)
    return d_g, d_pi


def _rhs_arrays(g, pi_bar, lapse):
    s = np.sqrt(np.linalg.det(g))
    gi = np.linalg.inv(g)
    gp = g @ pi_bar
    tr_gp = np.trace(gp)
    q = np.trace(gp @ gp) - 0.5 * tr_gp**2
    g_dot = lapse * (2.0 * g @ pi_bar @ g - tr_gp * g)
    # pi_dot / s with pi = s pi_bar
    pi_dot_over_s = -lapse * (-0.5 * q * gi + 2.0 * pi_bar @ g @ pi_bar - tr_gp * pi_bar)
    return g_dot, pi_dot_over_s - 0.5 * pi_bar * np.trace(gi @ g_dot)


def adm_rhs(state, lapse=None):
    """``(g_dot, pi_bar_dot)`` from Hamilton's equations in ``(g, pi)``.

    ``g_dot = dH/dpi`` and ``pi_dot = -dH/dg``, then
    ``pi_bar_dot = pi_dot / s - 1/2 pi_bar tr(g^-1 g_dot)`` with ``s = sqrt(det g)``.
    """
    lapse = state.lapse if lapse is None else lapse
    return _rhs_arrays(state.g, state.pi_bar, lapse)


def pack(state):
    return np.concatenate([state.g.ravel(), state.pi_bar.ravel()])


def unpack(y, lapse=1.0, t=0.0):
    g = y[:9].reshape(3, 3)
    pb = y[9:].reshape(3, 3)
    g = 0.5 * (g + g.T)
    pb = 0.5 * (pb + pb.T)
    return AdmState(g, pb, lapse=lapse, t=t)


def _lapse_function(lapse):
    if callable(lapse):
        return lapse
    value = float(lapse)
    return lambda t: value


def adm_vector_field(lapse=1.0):
    """``f(t, y)`` on packed ``(g, pi_bar)`` with a constant or time-dependent lapse."""
    lapse_of_t = _lapse_function(lapse)

    def rhs(t, y):
        g = y[:9].reshape(3, 3)
        metric_factor(g)
        g_dot, pib_dot = _rhs_arrays(g, y[9:].reshape(3, 3), lapse_of_t(t))
        return np.concatenate([g_dot.ravel(), pib_dot.ravel()])

    return rhs


# ---------------------------------------------------------------------------
# Kasner family
# ---------------------------------------------------------------------------


def check_kasner_exponents(p, tol=1e-10):
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError("Kasner exponents need three components")
    if abs(p.sum() - 1.0) > tol or abs(np.dot(p, p) - 1.0) > tol:
        raise ValueError(f"Kasner exponents must satisfy sum p = sum p^2 = 1, got {p.tolist()}")
    return p


def kasner_metric(p, t):
    return np.diag(np.asarray(t, dtype=float) ** (2.0 * np.asarray(p, dtype=float)))


def kasner_state(p, t0=1.0):
    """Data on the Kasner solution at time ``t0`` with unit lapse."""
    p = np.asarray(p, dtype=float)
    g = kasner_metric(p, t0)
    k = np.diag(p * t0 ** (2.0 * p - 1.0))
    base = AdmState(g, np.zeros((3, 3)), t=t0)
    return AdmState(g, gr_legendre(base, k), t=t0)


def fitted_kasner_exponents(g, t, t0=1.0, g0=None):
    """``p_i = log(g_ii(t) / g_ii(t0)) / (2 log(t / t0))`` for diagonal evolutions."""
    g0 = np.eye(3) if g0 is None else np.asarray(g0, dtype=float)
    return np.log(np.diag(g) / np.diag(g0)) / (2.0 * np.log(t / t0))
