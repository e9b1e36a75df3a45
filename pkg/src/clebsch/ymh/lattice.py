"""Yang-Mills-Higgs fields on a periodic N^3 lattice.

Layout (site-major, direction-minor):

* ``A``, ``D``: ``(N, N, N, 3, d)`` real, spatial connection and its momentum,
  ``d`` = 1 for U(1) and 3 for SU(2).
* ``phi``, ``pi``: ``(N, N, N)`` complex for U(1) (charge one) and
  ``(N, N, N, 3)`` real for the SU(2) adjoint triplet.
* ``A0``: ``(N, N, N, d)``, the algebra variable of the evolution.

Derivatives are central differences ``(f(x+i) - f(x-i)) / 2a``.  For SU(2)
the covariant derivative adds the algebra action of the link value,
``D_i f = Delta_i f + A_i x f``.  For U(1) the matter difference transports
the neighbours with the link phase,

    D_i phi(x) = (e^{i a A_i(x)} phi(x+i) - e^{-i a A_i(x)} phi(x-i)) / 2a,

which agrees with ``Delta_i phi + i A_i phi`` to O(a^2) and has an exactly
gauge-invariant modulus, so the lattice Gauss law is an exact conserved
quantity of the semi-discrete U(1) system.  Complex fields pair through
``Re(conj(u) w)``.  Metric and lapse are flat and static, so all Hodge stars
are identities and the volume weight ``a^3`` only appears in sums.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..lie import SU2, U1

GROUPS = ("u1", "su2")
REPRESENTATIONS = {"u1": "charge1", "su2": "adjoint"}
_PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class LatticeGeometry:
    n: int
    a: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need at least 2 sites per axis, got n={self.n!r}")
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"lattice spacing must be positive, got a={self.a!r}")

    @property
    def shape(self):
        return (self.n, self.n, self.n)

    @property
    def volume(self):
        return self.a**3

    def coordinates(self):
        """Site positions ``x_k = a * index`` as an ``(N, N, N, 3)`` array."""
        idx = np.indices(self.shape).astype(float) * self.a
        return np.moveaxis(idx, 0, -1)

    def shift(self, f, axis, step):
        """``f(x + step * e_axis)`` with periodic wrap."""
        return np.roll(f, -step, axis=axis)

    def diff(self, f, axis):
        """Central difference along ``axis`` (0, 1, 2)."""
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * self.a)


@dataclass(frozen=True)
class HiggsPotential:
    """``V(phi) = mu (|phi|^2 - v^2)^2``."""

    mu: float = 0.0
    v: float = 0.0

    def value(self, phi):
        return self.mu * (_norm2(phi) - self.v**2) ** 2

    def gradient(self, phi):
        factor = 4.0 * self.mu * (_norm2(phi) - self.v**2)
        if np.isrealobj(phi):
            factor = factor[..., None]
        return factor * phi


@dataclass(frozen=True, eq=False)
class LatticeState:
    group: str
    A: np.ndarray
    D: np.ndarray
    phi: np.ndarray
    pi: np.ndarray
    A0: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"lattice group must be one of {GROUPS}, got {self.group!r}")
        n = self.A.shape[0]
        d = 1 if self.group == "u1" else 3
        site = (n, n, n)
        want = {
            "A": site + (3, d),
            "D": site + (3, d),
            "phi": site if self.group == "u1" else site + (3,),
            "pi": site if self.group == "u1" else site + (3,),
            "A0": site + (d,),
        }
        for name, shape in want.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape} for {self.group}")
        if self.group == "su2" and (np.iscomplexobj(self.phi) or np.iscomplexobj(self.pi)):
            raise ValueError("adjoint Higgs fields must be real")

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def lie_group(self):
        return U1 if self.group == "u1" else SU2

    def replace(self, **changes):
        return replace(self, **changes)


def zero_state(geom, group):
    d = 1 if group == "u1" else 3
    site = geom.shape
    matter = site if group == "u1" else site + (3,)
    dtype = complex if group == "u1" else float
    return LatticeState(
        group=group,
        A=np.zeros(site + (3, d)),
        D=np.zeros(site + (3, d)),
        phi=np.zeros(matter, dtype=dtype),
        pi=np.zeros(matter, dtype=dtype),
        A0=np.zeros(site + (d,)),
    )


def _norm2(f):
    if np.iscomplexobj(f):
        return np.abs(f) ** 2
    return np.sum(f * f, axis=-1)


def _check_group(group):
    if group not in GROUPS:
        raise ValueError(f"lattice group must be one of {GROUPS}, got {group!r}")


# ---------------------------------------------------------------------------
# algebra actions
# ---------------------------------------------------------------------------


def algebra_bracket(group, x, y):
    """Site-wise bracket of algebra fields (zero for U(1))."""
    if group == "u1":
        return np.zeros(np.broadcast_shapes(x.shape, y.shape))
    return np.cross(x, y)


def matter_action(group, xi, f):
    """``xi . f``: ``i xi f`` for the charged scalar, ``xi x f`` for the triplet."""
    if group == "u1":
        return 1j * xi[..., 0] * f
    return np.cross(xi, f)


def diamond(group, phi, pi):
    """Dual algebra field with ``kappa(xi, phi <> pi) = <xi . phi, pi>``."""
    if group == "u1":
        return np.imag(np.conj(phi) * pi)[..., None]
    return np.cross(phi, pi)


def covariant_difference(geom, group, A, field, direction):
    """Covariant central difference of a matter or algebra field along ``direction``.

    ``field`` is a Higgs-type field (complex scalar for U(1), triplet for
    SU(2)) or, for SU(2), any algebra-valued site field.
    """
    _check_group(group)
    if direction not in (0, 1, 2):
        raise ValueError(f"direction must be 0, 1 or 2, got {direction!r}")
    link = A[..., direction, :]
    if group == "u1" and np.iscomplexobj(field):
        phase = np.exp(1j * geom.a * link[..., 0])
        fwd = geom.shift(field, direction, 1)
        bwd = geom.shift(field, direction, -1)
        return (phase * fwd - np.conj(phase) * bwd) / (2.0 * geom.a)
    if group == "u1":
        return geom.diff(field, direction)
    return geom.diff(field, direction) + np.cross(link, field)


def algebra_covariant_difference(geom, group, A, xi):
    """``d_A xi`` for an algebra-valued site field; returns ``(N, N, N, 3, d)``."""
    out = np.empty(A.shape)
    for i in range(3):
        out[..., i, :] = geom.diff(xi, i)
        if group == "su2":
            out[..., i, :] += np.cross(A[..., i, :], xi)
    return out


def higgs_gradient_field(geom, group, A, phi):
    """``G_i = D_i phi`` stacked along a direction axis (before the matter axes)."""
    return np.stack([covariant_difference(geom, group, A, phi, i) for i in range(3)], axis=3)


def curvature_b(geom, group, A):
    """``B_ij = Delta_i A_j - Delta_j A_i + [A_i, A_j]`` for (ij) in (01, 02, 12).

    Returns ``(N, N, N, 3, d)`` indexed by plane; use :func:`plane_component`
    for an arbitrary ordered pair.
    """
    _check_group(group)
    out = np.empty(A.shape)
    for k, (i, j) in enumerate(_PAIRS):
        out[..., k, :] = geom.diff(A[..., j, :], i) - geom.diff(A[..., i, :], j)
        if group == "su2":
            out[..., k, :] += np.cross(A[..., i, :], A[..., j, :])
    return out


def plane_component(b, i, j):
    """``B_ij`` from the packed plane array, antisymmetric in ``(i, j)``."""
    if i == j:
        return np.zeros(b.shape[:3] + b.shape[4:])
    if (i, j) in _PAIRS:
        return b[..., _PAIRS.index((i, j)), :]
    return -b[..., _PAIRS.index((j, i)), :]


# ---------------------------------------------------------------------------
# Hamiltonian and gradients
# ---------------------------------------------------------------------------


def energy_density(geom, state, potential):
    """``1/2 (|D|^2 + |B|^2 + |pi|^2 + |D phi|^2) + V(phi)`` per site."""
    g = state.group
    b = curvature_b(geom, g, state.A)
    dphi = higgs_gradient_field(geom, g, state.A, state.phi)
    dens = 0.5 * np.sum(state.D**2, axis=(-2, -1)) + 0.5 * np.sum(b**2, axis=(-2, -1))
    dens += 0.5 * _norm2(state.pi)
    if g == "u1":
        dens += 0.5 * np.sum(np.abs(dphi) ** 2, axis=-1)
    else:
        dens += 0.5 * np.sum(dphi**2, axis=(-2, -1))
    return dens + potential.value(state.phi)


def ymh_hamiltonian(geom, state, potential=HiggsPotential()):
    return float(geom.volume * np.sum(energy_density(geom, state, potential)))


def hamiltonian_gradients(geom, state, potential):
    """Per-volume gradients ``(dH/dA, dH/dphi)``; ``dH/dD = D`` and ``dH/dpi = pi``."""
    g = state.group
    A, phi = state.A, state.phi
    a = geom.a
    grad_a = np.zeros(A.shape)

    # magnetic term: dH/dA_j = -sum_i (Delta_i B_ij + A_i x B_ij)
    b = curvature_b(geom, g, A)
    for j in range(3):
        acc = np.zeros(A.shape[:3] + A.shape[4:])
        for i in range(3):
            if i == j:
                continue
            bij = plane_component(b, i, j)
            acc -= geom.diff(bij, i)
            if g == "su2":
                acc -= np.cross(A[..., i, :], bij)
        grad_a[..., j, :] = acc

    # Higgs kinetic term
    if g == "u1":
        grad_phi = np.zeros(phi.shape, dtype=complex)
        for i in range(3):
            phase = np.exp(1j * a * A[..., i, 0])
            fwd = geom.shift(phi, i, 1)
            bwd = geom.shift(phi, i, -1)
            gi = (phase * fwd - np.conj(phase) * bwd) / (2.0 * a)
            # adjoint of the transported difference
            grad_phi += (geom.shift(np.conj(phase) * gi, i, -1) - geom.shift(phase * gi, i, 1)) / (2.0 * a)
            s = 0.5 * (phase * fwd + np.conj(phase) * bwd)
            grad_a[..., i, 0] -= np.imag(np.conj(gi) * s)
    else:
        grad_phi = np.zeros(phi.shape)
        for i in range(3):
            gi = geom.diff(phi, i) + np.cross(A[..., i, :], phi)
            grad_phi += -geom.diff(gi, i) + np.cross(gi, A[..., i, :])
            grad_a[..., i, :] += np.cross(phi, gi)

    grad_phi = grad_phi + potential.gradient(phi)
    return grad_a, grad_phi


def ymh_rhs(geom, state, potential=HiggsPotential()):
    """Plain time derivatives ``(A_dot, D_dot, phi_dot, pi_dot)`` at fixed ``A0``.

    ``A_dot = D + d_A A0``, ``D_dot = -dH/dA - A0 . D``,
    ``phi_dot = pi - A0 . phi`` and ``pi_dot = -dH/dphi - A0 . pi``.
    """
    g = state.group
    grad_a, grad_phi = hamiltonian_gradients(geom, state, potential)
    a0 = state.A0
    a_dot = state.D + algebra_covariant_difference(geom, g, state.A, a0)
    d_dot = -grad_a
    if g == "su2":
        d_dot = d_dot - np.cross(a0[..., None, :], state.D)
    phi_dot = state.pi - matter_action(g, a0, state.phi)
    pi_dot = -grad_phi - matter_action(g, a0, state.pi)
    return a_dot, d_dot, phi_dot, pi_dot


# ---------------------------------------------------------------------------
# constraints and identities
# ---------------------------------------------------------------------------


def gauss_residual(geom, state):
    """``sum_i (Delta_i D_i + A_i x D_i) + phi <> pi`` per site, shape ``(N, N, N, d)``."""
    g = state.group
    out = diamond(g, state.phi, state.pi).astype(float)
    for i in range(3):
        out += geom.diff(state.D[..., i, :], i)
        if g == "su2":
            out += np.cross(state.A[..., i, :], state.D[..., i, :])
    return out


def total_charge(geom, state):
    """``a^3 sum_x J(x)``, the integrated Gauss residual."""
    return geom.volume * np.sum(gauss_residual(geom, state), axis=(0, 1, 2))


def infinitesimal_gauge_action(geom, state, xi):
    """``xi . (A, phi) = (-d_A xi, xi . phi)`` for an algebra field ``xi``."""
    return -algebra_covariant_difference(geom, state.group, state.A, xi), matter_action(state.group, xi, state.phi)


def field_pairing(geom, momentum, tangent):
    """``a^3 sum <momentum, tangent>`` with the real part for complex fields."""
    return float(geom.volume * np.sum(np.real(np.conj(momentum) * tangent)))


def electric_field(geom, state, a_dot):
    """``E = d_A A0 - A_dot``; equals ``-D`` along the evolution."""
    return algebra_covariant_difference(geom, state.group, state.A, state.A0) - a_dot


def _exterior_one_form(geom, group, A, form):
    """``(d_A form)_ij`` for an algebra-valued one-form, packed by plane."""
    out = np.empty(form.shape)
    for k, (i, j) in enumerate(_PAIRS):
        out[..., k, :] = geom.diff(form[..., j, :], i) - geom.diff(form[..., i, :], j)
        if group == "su2":
            out[..., k, :] += np.cross(A[..., i, :], form[..., j, :]) - np.cross(A[..., j, :], form[..., i, :])
    return out


def bianchi_field(geom, group, A):
    """Cyclic ``(d_A B)_{012}`` per site."""
    b = curvature_b(geom, group, A)
    out = np.zeros(A.shape[:3] + A.shape[4:])
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        bjk = plane_component(b, j, k)
        out += geom.diff(bjk, i)
        if group == "su2":
            out += np.cross(A[..., i, :], bjk)
    return out


def faraday_bianchi_residual(geom, samples, dt):
    """Faraday and Bianchi residual norms at the middle of three samples.

    ``samples`` are three consecutive :class:`LatticeState` values ``dt``
    apart.  Faraday: ``d_A E + B_dot + [A0, B]`` with ``E = d_A A0 - A_dot``
    and time derivatives by central differences.  Returns the root mean
    square over sites of each residual.
    """
    if len(samples) != 3:
        raise ValueError("need exactly three consecutive samples")
    prev, mid, nxt = samples
    g = mid.group
    a_dot = (nxt.A - prev.A) / (2.0 * dt)
    b_dot = (curvature_b(geom, g, nxt.A) - curvature_b(geom, g, prev.A)) / (2.0 * dt)
    e = electric_field(geom, mid, a_dot)
    far = _exterior_one_form(geom, g, mid.A, e) + b_dot
    if g == "su2":
        far = far + np.cross(mid.A0[..., None, :], curvature_b(geom, g, mid.A))
    bianchi = bianchi_field(geom, g, mid.A)
    return float(np.sqrt(np.mean(np.sum(far**2, axis=(-2, -1))))), float(
        np.sqrt(np.mean(np.sum(bianchi**2, axis=-1)))
    )


# ---------------------------------------------------------------------------
# gauge transformations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaugeTransformation:
    """Site field of group elements: ``(N, N, N, 1, 1)`` complex for U(1) and
    ``(N, N, N, 2, 2)`` for SU(2)."""

    group: str
    values: np.ndarray

    def __post_init__(self):
        _check_group(self.group)
        lie = U1 if self.group == "u1" else SU2
        err = lie.constraint_error(self.values)
        if err > 1e-12:
            raise ValueError(f"gauge transformation violates the {self.group} constraint by {err:.3e}")

    @classmethod
    def from_algebra(cls, group, chi):
        """``lambda = exp(chi)`` site-wise from an ``(N, N, N, d)`` algebra field."""
        lie = U1 if group == "u1" else SU2
        return cls(group, lie.exp(np.asarray(chi, dtype=float)))


def gauge_transform(geom, state, lam):
    """``A -> Ad A - d(lam) lam^-1``, ``phi -> lam phi``, ``D -> CoAd D``,
    ``pi -> lam pi``, ``A0 -> Ad A0`` (time-independent ``lam``).

    The logarithmic derivative is a principal value, so ``lam`` at sites two
    apart must be closer than a half turn.
    """
    if lam.group != state.group:
        raise ValueError(f"gauge group {lam.group} does not match state group {state.group}")
    g = state.group
    lie = state.lie_group
    vals = lam.values
    ad = lie.adjoint_matrix(vals)
    a_new = np.empty(state.A.shape)
    for i in range(3):
        dlog = lie.right_log_derivative(geom.shift(vals, i, 1), geom.shift(vals, i, -1), vals, 2.0 * geom.a)
        a_new[..., i, :] = np.einsum("...ab,...b->...a", ad, state.A[..., i, :]) - dlog
    # kappa is Ad-invariant, so CoAd acts on dual coordinates like Ad
    d_new = np.einsum("...ab,...ib->...ia", ad, state.D)
    a0_new = np.einsum("...ab,...b->...a", ad, state.A0)
    if g == "u1":
        z = vals[..., 0, 0]
        phi_new, pi_new = z * state.phi, z * state.pi
    else:
        phi_new = np.einsum("...ab,...b->...a", ad, state.phi)
        pi_new = np.einsum("...ab,...b->...a", ad, state.pi)
    return state.replace(A=a_new, D=d_new, phi=phi_new, pi=pi_new, A0=a0_new)


# ---------------------------------------------------------------------------
# packing for the integrators
# ---------------------------------------------------------------------------


def _real_view(f):
    if np.iscomplexobj(f):
        return np.stack([f.real, f.imag], axis=-1)
    return f


def _from_real(f, group):
    if group == "u1":
        return f[..., 0] + 1j * f[..., 1]
    return f


def pack_state(state):
    """Flat float vector of ``(A, D, phi, pi)``; ``A0`` is carried separately."""
    return np.concatenate(
        [state.A.ravel(), state.D.ravel(), _real_view(state.phi).ravel(), _real_view(state.pi).ravel()]
    )


def unpack_state(y, template, t=None):
    """Inverse of :func:`pack_state` using ``template`` for shapes, group and ``A0``."""
    sizes = [template.A.size, template.D.size, _real_view(template.phi).size]
    a = y[: sizes[0]].reshape(template.A.shape)
    d = y[sizes[0] : sizes[0] + sizes[1]].reshape(template.D.shape)
    rest = y[sizes[0] + sizes[1] :]
    mshape = _real_view(template.phi).shape
    phi = _from_real(rest[: sizes[2]].reshape(mshape), template.group)
    pi = _from_real(rest[sizes[2] :].reshape(mshape), template.group)
    return template.replace(A=a, D=d, phi=phi, pi=pi, t=template.t if t is None else t)


def lattice_vector_field(geom, template, potential=HiggsPotential()):
    """``f(t, y)`` on packed states with ``A0`` frozen to ``template.A0``."""

    def rhs(t, y):
        s = unpack_state(y, template, t)
        a_dot, d_dot, phi_dot, pi_dot = ymh_rhs(geom, s, potential)
        return np.concatenate(
            [a_dot.ravel(), d_dot.ravel(), _real_view(phi_dot).ravel(), _real_view(pi_dot).ravel()]
        )

    return rhs
