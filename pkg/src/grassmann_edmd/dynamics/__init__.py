"""
Benchmark dynamical systems, sampled flow maps and data generation.
"""

from grassmann_edmd.dynamics.data import (
    Box,
    Trajectory,
    TrainingSet,
    generate_pairs,
    make_rng,
    rollout_truth,
    rollout_truth_batch,
    sample_states,
)
from grassmann_edmd.dynamics.flow import (
    IntegratorSettings,
    SampledMap,
    linear_flow_matrix,
    rk4_flow,
    step,
    step_batch,
)
from grassmann_edmd.dynamics.systems import (
    SYSTEMS,
    VectorField,
    duffing_energy,
    duffing_field,
    get_system,
    linear_field,
)

__all__ = [
    "VectorField",
    "duffing_field",
    "duffing_energy",
    "linear_field",
    "get_system",
    "SYSTEMS",
    "IntegratorSettings",
    "SampledMap",
    "step",
    "step_batch",
    "rk4_flow",
    "linear_flow_matrix",
    "Box",
    "Trajectory",
    "TrainingSet",
    "make_rng",
    "sample_states",
    "generate_pairs",
    "rollout_truth",
    "rollout_truth_batch",
]
