"""Exact verification of local irreducibility and strong nonlocality.

Sets of mutually orthogonal multipartite kets with Gaussian-rational
amplitudes are checked by solving the linear conditions an
orthogonality-preserving local measurement must satisfy, entirely in exact
rational arithmetic.
"""

from .constructions import build, names
from .exactmath import GaussianRational, RationalMatrix, nullspace_basis, rref
from .opm import certificate, constraint_system, replay, solution_space
from .partitions import Grouping, bipartitions, coarse_grain
from .reduction import check_projective_reduction, find_coordinate_reduction, run_protocol
from .states import DimensionProfile, Ket, StateSet, validate_state_set
from .verdicts import (
    Irreducibility,
    StrongNonlocality,
    local_irreducibility_report,
    strong_nonlocality_report,
)

__version__ = "0.1.0"

__all__ = [
    "DimensionProfile",
    "GaussianRational",
    "Grouping",
    "Irreducibility",
    "Ket",
    "RationalMatrix",
    "StateSet",
    "StrongNonlocality",
    "bipartitions",
    "build",
    "certificate",
    "check_projective_reduction",
    "coarse_grain",
    "constraint_system",
    "find_coordinate_reduction",
    "local_irreducibility_report",
    "names",
    "nullspace_basis",
    "replay",
    "rref",
    "run_protocol",
    "solution_space",
    "strong_nonlocality_report",
    "validate_state_set",
]
