"""Lattice Yang-Mills-Higgs backend."""

from .checkpoint import read_checkpoint, write_checkpoint
from .initial import project_gauss, smooth_field, smooth_initial_state
from .lattice import (
    GaugeTransformation,
    HiggsPotential,
    LatticeGeometry,
    LatticeState,
    covariant_difference,
    curvature_b,
    diamond,
    energy_density,
    faraday_bianchi_residual,
    gauge_transform,
    gauss_residual,
    lattice_vector_field,
    pack_state,
    total_charge,
    unpack_state,
    ymh_hamiltonian,
    ymh_rhs,
    zero_state,
)

__all__ = [
    "GaugeTransformation",
    "HiggsPotential",
    "LatticeGeometry",
    "LatticeState",
    "covariant_difference",
    "curvature_b",
    "diamond",
    "energy_density",
    "faraday_bianchi_residual",
    "gauge_transform",
    "gauss_residual",
    "lattice_vector_field",
    "pack_state",
    "project_gauss",
    "read_checkpoint",
    "smooth_field",
    "smooth_initial_state",
    "total_charge",
    "unpack_state",
    "write_checkpoint",
    "ymh_hamiltonian",
    "ymh_rhs",
    "zero_state",
]
