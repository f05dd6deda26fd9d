"""
Riemannian derivatives on the Grassmann manifold from Euclidean callbacks.

An objective only has to provide value(U) and gradient(U) for the smooth
extension on d x r matrices. The Riemannian gradient is the horizontal
projection of the Euclidean gradient; Hessian-vector products use central
differences of the Euclidean gradient followed by the curvature correction
-V U^T grad f(U) and a horizontal projection.
"""

from __future__ import annotations

import logging
from typing import Protocol, runtime_checkable

import numpy as np

from grassmann_edmd.manifold.stiefel import (
    HorizontalVector,
    StiefelPoint,
    as_stiefel,
    project_horizontal,
)

logger = logging.getLogger(__name__)

# Relative step of the Hessian-vector finite differences
HVP_STEP = 1e-5


@runtime_checkable
class Objective(Protocol):
    """Smooth extension of a Grassmann objective on d x r matrices."""

    def value(self, U) -> float: ...

    def gradient(self, U) -> np.ndarray: ...


def riemannian_gradient(objective: Objective, U) -> HorizontalVector:
    """Horizontal projection (I - U U^T) grad f(U) of the Euclidean gradient."""
    point = as_stiefel(U)
    return project_horizontal(point, objective.gradient(point.U))


def hvp_from_gradient(
    objective: Objective, point: StiefelPoint, V: np.ndarray, egrad: np.ndarray
) -> HorizontalVector:
    """Hessian-vector product along the array V given the Euclidean gradient egrad at point."""
    norm_v = float(np.linalg.norm(V))
    if norm_v == 0.0:
        return HorizontalVector.zeros(point)
    U = point.U
    h = HVP_STEP * (1.0 + float(np.linalg.norm(U))) / (1.0 + norm_v)
    ehess = (objective.gradient(U + h * V) - objective.gradient(U - h * V)) / (2.0 * h)
    return project_horizontal(point, ehess - V @ (U.T @ egrad))


def hessian_vector(objective: Objective, U, V) -> HorizontalVector:
    """
    Riemannian Hessian-vector product at [U] along a horizontal vector V.

    Args:
        objective: Objective with a Euclidean gradient
        U: Stiefel representative
        V: Horizontal vector (or array) at U

    Raises:
        ValueError: If V is not horizontal at U
    """
    point = as_stiefel(U)
    if not isinstance(V, HorizontalVector):
        V = HorizontalVector(np.asarray(V, dtype=float), point)
    return hvp_from_gradient(objective, point, V.V, objective.gradient(point.U))


def finite_difference_gradient(objective: Objective, U, h: float = 1e-6) -> np.ndarray:
    """
    Central finite-difference gradient of objective.value, entry by entry.

    The step for entry (i, j) is h * max(1, |U_ij|).
    """
    U = np.asarray(U, dtype=float)
    grad = np.zeros_like(U)
    for idx in np.ndindex(*U.shape):
        step = h * max(1.0, abs(U[idx]))
        Up = U.copy()
        Um = U.copy()
        Up[idx] += step
        Um[idx] -= step
        grad[idx] = (objective.value(Up) - objective.value(Um)) / (2.0 * step)
    return grad


def check_gradient(objective: Objective, U, h: float = 1e-6) -> float:
    """
    Compare the analytic Euclidean gradient with central finite differences.

    Returns:
        max_ij |fd_ij - g_ij| / max(|g|_max, 1e-12)
    """
    U = np.asarray(U, dtype=float)
    analytic = objective.gradient(U)
    fd = finite_difference_gradient(objective, U, h)
    scale = max(float(np.abs(analytic).max()), 1e-12)
    error = float(np.abs(fd - analytic).max() / scale)
    logger.debug("Gradient check at %s point: relative error %.3e", U.shape, error)
    return error
