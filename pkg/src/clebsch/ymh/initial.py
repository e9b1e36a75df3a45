"""Smooth lattice initial data satisfying the Gauss constraint.

The Gauss residual ``J = M (D, pi)`` is linear in the momenta at fixed
``(A, phi)``, and ``M^T psi`` is the infinitesimal gauge action of ``psi``.
Constraint-satisfying momenta are obtained by the orthogonal projection
``(D, pi) -> (D, pi) - M^T psi`` with ``M M^T psi = J`` solved by conjugate
gradients.  ``M M^T`` is the covariant Laplacian ``-d_A^* d_A`` plus the
matter mass term, symmetric positive semidefinite; ``J`` lies in its range.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from ..errors import NonConvergence
from .lattice import gauss_residual, infinitesimal_gauge_action, zero_state

GAUSS_TOL = 1e-12


def smooth_field(geom, rng, shape, amplitude, modes=2, complex_valued=False):
    """Sum of a few low Fourier modes per component, periodic on the lattice."""
    x = geom.coordinates() / (geom.n * geom.a)
    out = np.zeros(geom.shape + tuple(shape), dtype=complex if complex_valued else float)
    flat = out.reshape(geom.shape + (-1,))
    for c in range(flat.shape[-1]):
        for _ in range(modes):
            k = rng.integers(-1, 2, size=3)
            if not np.any(k):
                k[rng.integers(3)] = 1
            phase = 2.0 * np.pi * (x @ k) + rng.uniform(0, 2 * np.pi)
            flat[..., c] += amplitude * rng.normal() * np.cos(phase)
            if complex_valued:
                flat[..., c] += 1j * amplitude * rng.normal() * np.sin(phase)
    return out


def _gauss_operator(geom, state):
    """``psi -> M M^T psi`` on flattened algebra fields."""
    d = state.A0.shape[-1]
    shape = geom.shape + (d,)

    def apply(vec):
        psi = vec.reshape(shape)
        da, dphi = infinitesimal_gauge_action(geom, state, psi)
        moved = state.replace(D=da, pi=dphi)
        return gauss_residual(geom, moved).ravel()

    n = int(np.prod(shape))
    return LinearOperator((n, n), matvec=apply, dtype=float)


def project_gauss(geom, state, tol=GAUSS_TOL, max_rounds=5):
    """Remove the Gauss residual by projecting ``(D, pi)`` at fixed ``(A, phi)``.

    Raises :class:`NonConvergence` when the site-wise residual cannot be
    pushed below ``tol``.
    """
    op = _gauss_operator(geom, state)
    d = state.A0.shape[-1]
    resid = gauss_residual(geom, state)
    for rounds in range(1, max_rounds + 1):
        psi, _ = cg(op, resid.ravel(), rtol=1e-15, atol=0.0, maxiter=10 * op.shape[0])
        psi = psi.reshape(geom.shape + (d,))
        da, dphi = infinitesimal_gauge_action(geom, state, psi)
        state = state.replace(D=state.D - da, pi=state.pi - dphi)
        resid = gauss_residual(geom, state)
        worst = float(np.max(np.abs(resid)))
        if worst < tol:
            return state
    raise NonConvergence(
        f"Gauss projection left a residual of {worst:.3e} after {max_rounds} rounds",
        iterations=rounds,
        residual=worst,
    )


def smooth_initial_state(geom, group, rng, amplitude=0.1, higgs_vev=1.0, matter_amplitude=None, project=True):
    """Small-amplitude smooth data around the Higgs vacuum, projected onto Gauss = 0.

    ``A``, ``D`` and the momentum ``pi`` are sums of low Fourier modes of size
    ``amplitude``; ``phi`` fluctuates around the vacuum value ``higgs_vev``
    (along the third axis for the triplet).  ``A0`` is zero (temporal gauge).
    """
    if matter_amplitude is None:
        matter_amplitude = amplitude
    s = zero_state(geom, group)
    cx = group == "u1"
    a = smooth_field(geom, rng, s.A.shape[3:], amplitude)
    dfield = smooth_field(geom, rng, s.D.shape[3:], amplitude)
    mshape = () if cx else (3,)
    phi = smooth_field(geom, rng, mshape, matter_amplitude, complex_valued=cx)
    pi = smooth_field(geom, rng, mshape, matter_amplitude, complex_valued=cx)
    if cx:
        phi = phi + higgs_vev
    else:
        phi[..., 2] += higgs_vev
    s = s.replace(A=a, D=dfield, phi=phi, pi=pi)
    return project_gauss(geom, s) if project else s

