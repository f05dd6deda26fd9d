"""
Prediction-error objective on the Grassmann manifold and its derivatives.
"""

from grassmann_edmd.objective.benchmark import RayleighQuotient
from grassmann_edmd.objective.prediction_error import (
    ObjectiveContext,
    ObjectiveValue,
    build_context,
    context_from_truth,
    euclidean_gradient,
    evaluate,
)
from grassmann_edmd.objective.riemannian import (
    HVP_STEP,
    Objective,
    check_gradient,
    finite_difference_gradient,
    hessian_vector,
    hvp_from_gradient,
    riemannian_gradient,
)

__all__ = [
    "Objective",
    "ObjectiveContext",
    "ObjectiveValue",
    "build_context",
    "context_from_truth",
    "evaluate",
    "euclidean_gradient",
    "riemannian_gradient",
    "hessian_vector",
    "hvp_from_gradient",
    "HVP_STEP",
    "finite_difference_gradient",
    "check_gradient",
    "RayleighQuotient",
]
