"""
Stiefel representatives and horizontal vectors for Grassmann optimisation.
"""

from grassmann_edmd.manifold.stiefel import (
    HORIZONTAL_TOL,
    REORTHONORMALIZE_DRIFT,
    STIEFEL_TOL,
    HorizontalVector,
    StiefelPoint,
    as_stiefel,
    metric,
    orthonormality_residual,
    principal_angles,
    project_horizontal,
    qr_positive,
    random_stiefel,
    retract,
    subspace_distance,
)

__all__ = [
    "StiefelPoint",
    "HorizontalVector",
    "STIEFEL_TOL",
    "REORTHONORMALIZE_DRIFT",
    "HORIZONTAL_TOL",
    "as_stiefel",
    "orthonormality_residual",
    "qr_positive",
    "random_stiefel",
    "project_horizontal",
    "metric",
    "retract",
    "principal_angles",
    "subspace_distance",
]
