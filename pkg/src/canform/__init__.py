"""Canonical form for first-order distributed optimization algorithms."""

from .algorithms import ALGORITHM_NAMES, get_algorithm, reproduce_table1
from .canonical import (
    CanonicalizationError,
    CanonicalParams,
    ErrorKind,
    alternate_realization,
    canonical_realization,
    canonical_transfer_function,
    canonicalize,
    check_technical_conditions,
    construct_fixed_point,
    equivalent,
    eta_coefficients,
    single_state_infeasible,
)
from .graph import LaplacianGraph, build_laplacian, validate_laplacian
from .ratpoly import BivarPoly, BivarRatFun, LambdaPoly, poly_gcd_z, ratfun_eval, ratfun_reduce
from .realization import StructuredRealization, similarity_transform, transfer_function, validate_class
from .sim import open_loop_response, quadratic_objective, run_canonical, run_realization
from .spectral import lemma1_check, pole_zero_report

__version__ = "0.1.0"
