"""Central values of level-one modular L-functions, computed from exact q-expansions."""

from .characters import KroneckerChar, chi, is_fundamental, kronecker, parity_matches
from .eigenforms import HeckeEigenform, eigenforms, hecke_matrix
from .exactseries import QSeries, delta, dim_cusp_forms, eisenstein, victor_miller_basis
from .lcentral import CentralValue, HarmonicWeight, central_value, moment_sum, omega_star
from .petersson import TraceReport, kloosterman, trace_check, trace_lhs, trace_rhs
from .specialfn import V, ErrBoundedReal, bessel_j

__all__ = [
    "CentralValue", "ErrBoundedReal", "HarmonicWeight", "HeckeEigenform", "KroneckerChar", "QSeries",
    "TraceReport", "V", "bessel_j", "central_value", "chi", "delta", "dim_cusp_forms", "eigenforms",
    "eisenstein", "hecke_matrix", "is_fundamental", "kloosterman", "kronecker", "moment_sum", "omega_star",
    "parity_matches", "trace_check", "trace_lhs", "trace_rhs", "victor_miller_basis",
]
