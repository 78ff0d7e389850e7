"""Singular and near-singular integrals over curved quadratic triangles."""
from .geometry import (
    CurvedTriangle, DensityPolynomial, PolynomialTriangle, QuadraticTriangle,
    explicit_triangle, flat_triangle, metric_density, read_element_file,
)
from .integrals import (
    ConvergenceRecord, RegularizationLevel, SingleIntegrator, convergence_study, fit_slope,
    integrate_double_identical, integrate_single, integrate_single_helmholtz,
)
from .preimage import NewtonConvergenceError, SingularityLocation, newton_locate
from .quadrature import gauss_legendre, transplanted_rule, triangle_rule, ConformalMapParams

__all__ = [
    "CurvedTriangle", "DensityPolynomial", "PolynomialTriangle", "QuadraticTriangle",
    "explicit_triangle", "flat_triangle", "metric_density", "read_element_file",
    "ConvergenceRecord", "RegularizationLevel", "SingleIntegrator", "convergence_study", "fit_slope",
    "integrate_double_identical", "integrate_single", "integrate_single_helmholtz",
    "NewtonConvergenceError", "SingularityLocation", "newton_locate",
    "gauss_legendre", "transplanted_rule", "triangle_rule", "ConformalMapParams",
]
