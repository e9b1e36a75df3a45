"""Concrete Lie groups U(1), SO(3), SU(2) and the tangent group g x| G.

Every algebra is identified with R^d through a fixed orthonormal basis and the
pairing kappa between g* and g is the coordinate dot product.

Bases
-----
* u(1): the single generator ``i``; ``exp(t xi) = e^{i t xi}``.
* so(3): ``e_a`` with ``hat(e_a) v = e_a x v``, so ``[e1, e2] = e3`` cyclically.
* su(2): ``tau_a = -i sigma_a / 2`` with ``[tau_1, tau_2] = tau_3`` cyclically.
  The adjoint representation is routed through the isomorphism su(2) = so(3),
  which keeps all adjoint-type data real.

The group objects expose array-level methods that broadcast over leading
axes (the lattice code calls them once per sweep over all sites).  The small
value types at the bottom of the module wrap those methods with group
bookkeeping for the public, element-level API.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GroupMismatch

_PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

GROUP_TOL = 1e-12


def hat(v):
    """Antisymmetric 3x3 matrix(es) with ``hat(v) @ w == cross(v, w)``."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def vee(m):
    """Inverse of :func:`hat` (uses the antisymmetric part only)."""
    m = np.asarray(m)
    return 0.5 * np.stack(
        [m[..., 2, 1] - m[..., 1, 2], m[..., 0, 2] - m[..., 2, 0], m[..., 1, 0] - m[..., 0, 1]],
        axis=-1,
    )


def _rodrigues(w):
    """exp(hat(w)) for an array of rotation vectors."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w, axis=-1)[..., None, None]
    k = hat(w)
    small = theta < 1e-6
    th = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta**2 / 6.0 + theta**4 / 120.0, np.sin(th) / th)
    b = np.where(small, 0.5 - theta**2 / 24.0 + theta**4 / 720.0, (1.0 - np.cos(th)) / th**2)
    eye = np.broadcast_to(np.eye(3), k.shape)
    return eye + a * k + b * (k @ k)


class LieGroup:
    """Array-level operations of a matrix Lie group in fixed coordinates."""

    name = "abstract"
    dim = 0

    def __repr__(self):
        return f"<LieGroup {self.name}>"

    def __reduce__(self):
        return (get_group, (self.name,))

    # algebra ---------------------------------------------------------------
    def bracket(self, x, y):
        raise NotImplementedError

    def ad_star(self, xi, mu):
        """``ad*_xi mu`` defined by ``kappa(ad*_xi mu, zeta) = kappa(mu, [xi, zeta])``."""
        raise NotImplementedError

    def coad(self, xi, mu):
        """Infinitesimal coadjoint representation ``d/dt CoAd_{exp(t xi)} mu = -ad*_xi mu``."""
        return -self.ad_star(xi, mu)

    # group -----------------------------------------------------------------
    def identity(self):
        raise NotImplementedError

    def exp(self, xi):
        raise NotImplementedError

    def multiply(self, g, h):
        return g @ h

    def inverse(self, g):
        return np.conj(np.swapaxes(g, -1, -2))

    def constraint_error(self, g):
        raise NotImplementedError

    def adjoint_matrix(self, g):
        """Matrix of ``Ad_g`` acting on algebra coordinates."""
        raise NotImplementedError

    def adjoint(self, g, zeta):
        return np.einsum("...ab,...b->...a", self.adjoint_matrix(g), zeta)

    def coadjoint(self, g, mu):
        """``CoAd_g mu`` with ``kappa(CoAd_g mu, zeta) = kappa(mu, Ad_{g^-1} zeta)``."""
        m = self.adjoint_matrix(self.inverse(g))
        return np.einsum("...ba,...b->...a", m, mu)

    def right_log_derivative(self, g_plus, g_minus, g_center, step):
        """Central-difference estimate of ``(dg) g^-1`` in algebra coordinates.

        ``g_plus``/``g_minus`` are the values one step either side and ``step``
        is the distance between them.
        """
        raise NotImplementedError


class U1Group(LieGroup):
    name = "u1"
    dim = 1

    def bracket(self, x, y):
        return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))

    def ad_star(self, xi, mu):
        return np.zeros(np.broadcast_shapes(np.shape(xi), np.shape(mu)))

    def identity(self):
        return np.ones((1, 1), dtype=complex)

    def exp(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(1j * xi)[..., None]

    def constraint_error(self, g):
        return float(np.max(np.abs(np.abs(g) - 1.0)))

    def adjoint_matrix(self, g):
        return np.ones(np.shape(g)[:-2] + (1, 1))

    def right_log_derivative(self, g_plus, g_minus, g_center, step):
        # exact phase difference, valid while neighbouring phases differ by < pi
        ratio = g_plus[..., 0, 0] * np.conj(g_minus[..., 0, 0])
        return (np.angle(ratio) / step)[..., None]


class SO3Group(LieGroup):
    name = "so3"
    dim = 3

    def bracket(self, x, y):
        return np.cross(x, y)

    def ad_star(self, xi, mu):
        return np.cross(mu, xi)

    def identity(self):
        return np.eye(3)

    def exp(self, xi):
        return _rodrigues(xi)

    def inverse(self, g):
        return np.swapaxes(g, -1, -2)

    def constraint_error(self, g):
        g = np.asarray(g)
        eye = np.eye(3)
        orth = np.max(np.abs(np.swapaxes(g, -1, -2) @ g - eye))
        det = np.max(np.abs(np.linalg.det(g) - 1.0))
        return float(max(orth, det))

    def adjoint_matrix(self, g):
        return np.asarray(g, dtype=float)

    def right_log_derivative(self, g_plus, g_minus, g_center, step):
        rel = g_plus @ self.inverse(g_minus)
        return _so3_log(rel) / step


def _so3_log(r):
    cos = np.clip((np.trace(r, axis1=-2, axis2=-1) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos)
    small = theta < 1e-6
    th = np.where(small, 1.0, theta)
    factor = np.where(small, 0.5 + theta**2 / 12.0, th / (2.0 * np.sin(th)))
    return factor[..., None] * 2.0 * vee(r)


class SU2Group(LieGroup):
    name = "su2"
    dim = 3

    def bracket(self, x, y):
        return np.cross(x, y)

    def ad_star(self, xi, mu):
        return np.cross(mu, xi)

    def identity(self):
        return np.eye(2, dtype=complex)

    def algebra_matrix(self, xi):
        """``sum_a xi_a tau_a`` as 2x2 anti-Hermitian matrices."""
        xi = np.asarray(xi, dtype=float)
        return -0.5j * np.einsum("...a,aij->...ij", xi, _PAULI)

    def algebra_coords(self, m):
        """Inverse of :meth:`algebra_matrix` (projects onto su(2))."""
        # tr(tau_a tau_b) = -delta_ab / 2
        return np.real(np.einsum("...ij,aji->...a", m, _PAULI) * 1j)

    def exp(self, xi):
        xi = np.asarray(xi, dtype=float)
        theta = np.linalg.norm(xi, axis=-1)
        half = 0.5 * theta
        small = theta < 1e-8
        th = np.where(small, 1.0, theta)
        sinc = np.where(small, 0.5 - theta**2 / 48.0, np.sin(half) / th)
        eye = np.broadcast_to(np.eye(2, dtype=complex), xi.shape[:-1] + (2, 2))
        n_sigma = np.einsum("...a,aij->...ij", xi, _PAULI)
        return np.cos(half)[..., None, None] * eye - 1j * sinc[..., None, None] * n_sigma

    def constraint_error(self, g):
        g = np.asarray(g)
        unit = np.max(np.abs(self.inverse(g) @ g - np.eye(2)))
        det = np.max(np.abs(np.linalg.det(g) - 1.0))
        return float(max(unit, det))

    def adjoint_matrix(self, g):
        # R_ab = 1/2 tr(sigma_a U sigma_b U^dagger)
        g = np.asarray(g)
        gd = self.inverse(g)
        r = 0.5 * np.einsum("aij,...jk,bkl,...li->...ab", _PAULI, g, _PAULI, gd)
        return np.real(r)

    def right_log_derivative(self, g_plus, g_minus, g_center, step):
        rel = self.adjoint_matrix(g_plus @ self.inverse(g_minus))
        return _so3_log(rel) / step


U1 = U1Group()
SO3 = SO3Group()
SU2 = SU2Group()
_GROUPS = {g.name: g for g in (U1, SO3, SU2)}


def get_group(name):
    """Look up one of the supported groups by name (``u1``, ``so3``, ``su2``)."""
    try:
        return _GROUPS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown group {name!r}; expected one of {sorted(_GROUPS)}") from None


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


def _coords(group, coords, what):
    arr = np.array(coords, dtype=float).reshape(-1)
    if arr.shape != (group.dim,):
        raise ValueError(f"{what} for {group.name} needs {group.dim} coordinates, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} coordinates must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LieAlgebraElement:
    group: LieGroup
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _coords(self.group, self.coords, "algebra element"))

    def __add__(self, other):
        _same(self, other)
        return LieAlgebraElement(self.group, self.coords + other.coords)

    def __neg__(self):
        return LieAlgebraElement(self.group, -self.coords)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return LieAlgebraElement(self.group, float(s) * self.coords)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DualAlgebraElement:
    group: LieGroup
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _coords(self.group, self.coords, "dual element"))


@dataclass(frozen=True, eq=False)
class GroupElement:
    group: LieGroup
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex if self.group is not SO3 else float)
        err = self.group.constraint_error(m)
        if err > GROUP_TOL:
            raise ValueError(f"matrix violates the {self.group.name} constraint by {err:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other):
        _same(self, other)
        return GroupElement(self.group, self.group.multiply(self.matrix, other.matrix))

    def inverse(self):
        return GroupElement(self.group, self.group.inverse(self.matrix))


@dataclass(frozen=True, eq=False)
class TangentGroupElement:
    """``(xi, g)`` in the right trivialisation ``TG = g x|_Ad G``."""

    xi: LieAlgebraElement
    g: GroupElement

    def __post_init__(self):
        _same(self.xi, self.g)

    @property
    def group(self):
        return self.g.group


def _same(*elements):
    groups = {e.group.name for e in elements}
    if len(groups) != 1:
        raise GroupMismatch(f"operands belong to different groups: {sorted(groups)}")
    return elements[0].group


def identity(group):
    return GroupElement(group, group.identity())


def pairing(mu, xi):
    """kappa(mu, xi): the coordinate dot product."""
    _same(mu, xi)
    return float(mu.coords @ xi.coords)


def bracket(xi, zeta):
    """Lie bracket ``[xi, zeta]``."""
    group = _same(xi, zeta)
    return LieAlgebraElement(group, group.bracket(xi.coords, zeta.coords))


def adjoint(g, zeta):
    """``Ad_g zeta``."""
    group = _same(g, zeta)
    return LieAlgebraElement(group, group.adjoint(g.matrix, zeta.coords))


def coadjoint(g, mu):
    """``CoAd_g mu``, the dual of ``Ad_{g^-1}``."""
    group = _same(g, mu)
    return DualAlgebraElement(group, group.coadjoint(g.matrix, mu.coords))


def coadjoint_star(xi, mu):
    """``ad*_xi mu`` with ``kappa(ad*_xi mu, zeta) = kappa(mu, [xi, zeta])`` (no sign)."""
    group = _same(xi, mu)
    return DualAlgebraElement(group, group.ad_star(xi.coords, mu.coords))


def group_exp(xi, t=1.0):
    """``exp(t xi)``."""
    return GroupElement(xi.group, xi.group.exp(float(t) * xi.coords))


def tangent_group_multiply(a, b):
    """``(xi, a) . (zeta, b) = (xi + Ad_a zeta, a b)``."""
    group = _same(a, b)
    xi = a.xi.coords + group.adjoint(a.g.matrix, b.xi.coords)
    return TangentGroupElement(LieAlgebraElement(group, xi), a.g @ b.g)


def tangent_group_inverse(a):
    """``(xi, a)^-1 = (-Ad_{a^-1} xi, a^-1)``."""
    inv = a.g.inverse()
    return TangentGroupElement(-adjoint(inv, a.xi), inv)


def tangent_group_identity(group):
    return TangentGroupElement(LieAlgebraElement(group, np.zeros(group.dim)), identity(group))


def tangent_group_adjoint(a, eta, chi):
    """Adjoint action of ``a = (zeta, g)`` on the tangent-group algebra element ``(eta, chi)``.

    Returns coordinates ``(Ad_g eta + [zeta, Ad_g chi], Ad_g chi)``.
    """
    group = a.group
    g = a.g.matrix
    chi_new = group.adjoint(g, chi)
    eta_new = group.adjoint(g, eta) + group.bracket(a.xi.coords, chi_new)
    return eta_new, chi_new
