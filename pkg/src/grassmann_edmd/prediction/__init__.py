"""
Koopman linear systems, state prediction and prediction error measures.
"""

from grassmann_edmd.prediction.grid import ErrorGrid, error_grid, grid_nodes
from grassmann_edmd.prediction.measures import (
    PredictionErrorReport,
    batch_distances,
    invariance_estimate,
    mean_prediction_error,
    trajectory_distance,
)
from grassmann_edmd.prediction.system import (
    KoopmanLinearSystem,
    full_system,
    in_basis,
    predict_states,
    reduced_system,
    rollout_lifted,
    transformed_system,
)

__all__ = [
    "KoopmanLinearSystem",
    "rollout_lifted",
    "predict_states",
    "full_system",
    "transformed_system",
    "reduced_system",
    "in_basis",
    "trajectory_distance",
    "mean_prediction_error",
    "batch_distances",
    "invariance_estimate",
    "PredictionErrorReport",
    "ErrorGrid",
    "error_grid",
    "grid_nodes",
]
