"""Landweber iteration of Kaczmarz type with uniformly convex, non-smooth penalties."""

from .grid import DataVector, GridFunction, GridSpec, inner_product, norm
from .penalty import PenaltyFunctional, bregman_distance, conjugate_minimizer, soft_threshold
from .solver import Problem, SolverConfig, run, verify_monotonicity
from .tvprox import tv_prox

__version__ = "0.1.0"

__all__ = [
    "DataVector", "GridFunction", "GridSpec", "PenaltyFunctional", "Problem", "SolverConfig",
    "bregman_distance", "conjugate_minimizer", "inner_product", "norm", "run", "soft_threshold",
    "tv_prox", "verify_monotonicity",
]
