"""Forward operators: circular means, Radon/Schlieren, elliptic parameter map."""

from .base import (ForwardOperator, MatrixOperator, ScaledOperator, SolverError,
                   adjoint_mismatch, bilinear_matrix, estimate_norm)
from .pde import EllipticParamOp, elliptic_grid, helmholtz_operator, helmholtz_solve, neg_laplacian
from .tomography import (CircularMeanOp, RadonOp, SchlierenOp, circular_mean_system, pat_centers,
                         schlieren_system, semicircle_angles)

__all__ = [
    "CircularMeanOp", "EllipticParamOp", "ForwardOperator", "MatrixOperator", "RadonOp",
    "ScaledOperator", "SchlierenOp", "SolverError", "adjoint_mismatch", "bilinear_matrix",
    "circular_mean_system", "elliptic_grid", "estimate_norm", "helmholtz_operator",
    "helmholtz_solve", "neg_laplacian", "pat_centers", "schlieren_system", "semicircle_angles",
]
