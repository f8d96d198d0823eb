"""Tail probabilities of the Ornstein-Uhlenbeck drift MLE.

Sharp large-deviation expansions (:mod:`ousldp.sldp`), an independent
Fourier-inversion oracle (:mod:`ousldp.inversion`) and exact-transition
Monte Carlo (:mod:`ousldp.simulate`), built on the closed-form cumulant
generating function of Z_T(c) (:mod:`ousldp.cgf`).
"""

__version__ = "0.1.0"

from .cgf import cgf_exact, char_bound, char_fn, decompose, log_mgf
from .errors import (
    BoundaryError,
    DomainError,
    NoExpansionError,
    NoSeriesError,
    OrderError,
    OusldpError,
    QuadratureError,
    SolverError,
)
from .inversion import OracleConfig, oracle_tail
from .model import ModelSpec, RegimeCase, Side, classify_case, effective_domain, finite_T_domain, rate_function
from .saddle import series_coeffs, solve_saddle
from .simulate import limit_law_diagnostics, mle_estimate, plain_mc_tail, simulate_path, tilted_mc_tail, z_statistic
from .sldp import expansion_constants, hermite_number, tail_probability, zero_threshold_exact

__all__ = [
    "BoundaryError",
    "DomainError",
    "ModelSpec",
    "NoExpansionError",
    "NoSeriesError",
    "OracleConfig",
    "OrderError",
    "OusldpError",
    "QuadratureError",
    "RegimeCase",
    "Side",
    "SolverError",
    "cgf_exact",
    "char_bound",
    "char_fn",
    "classify_case",
    "decompose",
    "effective_domain",
    "expansion_constants",
    "finite_T_domain",
    "hermite_number",
    "limit_law_diagnostics",
    "log_mgf",
    "mle_estimate",
    "oracle_tail",
    "plain_mc_tail",
    "rate_function",
    "series_coeffs",
    "simulate_path",
    "solve_saddle",
    "tail_probability",
    "tilted_mc_tail",
    "z_statistic",
    "zero_threshold_exact",
]
