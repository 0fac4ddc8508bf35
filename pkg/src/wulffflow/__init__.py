"""Anisotropic curvature flows of convex hypersurfaces toward Wulff shapes."""

from .anisotropy import Anisotropy, WulffPointFrame, tangent_basis
from .bodies import ConvexBody, ellipsoid, harmonic_radial, harmonic_support, random_body, sphere, wulff
from .chart import WulffChart, build_wulff_chart, covariant_hessian, operator_pointwise
from .curvature import (codazzi_norm, codazzi_residual, elementary_all, graph_geometry, phi_dual,
                        psi, tau_matrix, umbilicity_defect)
from .errors import (AdmissibilityError, ConfigError, ConvexityLost, DomainError, NumericalError,
                     StiffnessError, WulffFlowError)
from .flow import FlowConfig, FlowRecord, FlowResult, make_solver, monotonicity_violations, run
from .functionals import (FunctionalReport, af_check, af_slack, isoperimetric_ratio,
                          mc_mixed_volume, minkowski_residual, mixed_volume_surface)
from .grid import SphereGrid, build_sphere_grid
from .spectral import LinearizedOperator, build_operator, fit_decay, lambda1, predicted_rate

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "Anisotropy", "ConfigError", "ConvexBody", "ConvexityLost",
    "DomainError", "FlowConfig", "FlowRecord", "FlowResult", "FunctionalReport",
    "LinearizedOperator", "NumericalError", "SphereGrid", "StiffnessError", "WulffChart",
    "WulffFlowError", "WulffPointFrame", "af_check", "af_slack", "build_operator",
    "build_sphere_grid", "build_wulff_chart", "codazzi_norm", "codazzi_residual",
    "covariant_hessian", "elementary_all", "ellipsoid", "fit_decay", "graph_geometry",
    "harmonic_radial", "harmonic_support", "isoperimetric_ratio", "lambda1", "make_solver",
    "mc_mixed_volume", "minkowski_residual", "mixed_volume_surface", "monotonicity_violations",
    "operator_pointwise", "phi_dual", "predicted_rate", "psi", "random_body", "run", "sphere",
    "tangent_basis", "tau_matrix", "umbilicity_defect", "wulff",
]
