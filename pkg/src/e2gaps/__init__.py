"""Certified sieve computations for gaps between E2-numbers."""

from .basis import BasisTerm, SymmetricPolynomialSpec, basis_sequence, q_polynomial
from .forms import SieveConfig, build_forms, evaluate_ratio
from .optimizer import Certificate, certify, max_rayleigh, optimize_and_certify, rationalize
from .scalars import Interval, LogLinear, lambda_n, mu
from .tuples import Tuple, greedy_search, is_admissible, load_bundled

__version__ = "0.1.0"

__all__ = [
    "BasisTerm", "SymmetricPolynomialSpec", "basis_sequence", "q_polynomial",
    "SieveConfig", "build_forms", "evaluate_ratio",
    "Certificate", "certify", "max_rayleigh", "optimize_and_certify", "rationalize",
    "Interval", "LogLinear", "lambda_n", "mu",
    "Tuple", "greedy_search", "is_admissible", "load_bundled",
]
