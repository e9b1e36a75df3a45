"""Clebsch-Lagrange / Clebsch-Hamilton mechanics with symmetry constraints.

Backends: finite-dimensional rotation-invariant systems (:mod:`clebsch.core`,
:mod:`clebsch.extended`), lattice Yang-Mills-Higgs (:mod:`clebsch.ymh`) and
homogeneous ADM gravity (:mod:`clebsch.gr`).
"""

from .errors import (
    ClebschError,
    ConstraintViolation,
    GroupMismatch,
    HypothesisViolation,
    NonConvergence,
    SingularMetric,
)
from .lie import SO3, SU2, U1, get_group

__version__ = "0.1.0"

__all__ = [
    "ClebschError",
    "ConstraintViolation",
    "GroupMismatch",
    "HypothesisViolation",
    "NonConvergence",
    "SingularMetric",
    "SO3",
    "SU2",
    "U1",
    "get_group",
]
