"""Frequency shifts and relaxation of diffusing nuclear spins in a cubic cell
with partially depolarizing walls, computed in the Robin eigenmode basis."""

__version__ = "0.1.0"

from .domain import (XE129, XE131, CellGeometry, LambdaRangeError, SpinSpecies,  # noqa: E402
                     ValidityReport, lambda_from_depolarization, validity_report)
from .fields import (FieldModel, Polynomial, linear_gradient, quadratic_gradient,  # noqa: E402
                     uniform)
from .eigenbasis import EigenBasis, solve_axis_modes  # noqa: E402
from .coupling import CouplingSet, assemble_couplings  # noqa: E402
from .perturbation import (EigenvalueReport, eigenvalue_corrections,  # noqa: E402
                           exact_diagonalization_oracle, solve)

__all__ = [
    "__version__", "XE129", "XE131", "CellGeometry", "LambdaRangeError", "SpinSpecies",
    "ValidityReport", "lambda_from_depolarization", "validity_report", "FieldModel",
    "Polynomial", "linear_gradient", "quadratic_gradient", "uniform", "EigenBasis",
    "solve_axis_modes", "CouplingSet", "assemble_couplings", "EigenvalueReport",
    "eigenvalue_corrections", "exact_diagonalization_oracle", "solve",
]
