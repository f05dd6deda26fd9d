"""
grassmann-edmd - EDMD Koopman models reduced by optimisation on Grassmann manifolds.

A dictionary of observables is fitted to snapshot pairs by EDMD, the data
are orthonormalised by a QR change of basis, and an r-dimensional
subspace of the dictionary span is chosen by a Riemannian trust-region
method so that its N-step state predictions are as accurate as possible.

Example:
    from grassmann_edmd import ExperimentConfig, run_experiment

    config = ExperimentConfig.duffing("desk").with_overrides(seed=3)
    result = run_experiment(config, "runs/desk")
    print(result.summary["optimization"]["value_final"])

    # Or step by step
    from grassmann_edmd import optimize_subspace, train
    model = train(config)
    reduction = optimize_subspace(config, model)
"""

__version__ = "0.1.0"

# Dictionary
from grassmann_edmd.dictionary import (
    Dictionary,
    coordinate_dictionary,
    lift,
    lift_batch,
    monomial_dictionary,
)

# Dynamics
from grassmann_edmd.dynamics import (
    Box,
    IntegratorSettings,
    SampledMap,
    TrainingSet,
    Trajectory,
    duffing_field,
    generate_pairs,
    linear_field,
    rollout_truth,
    sample_states,
    step,
)

# EDMD
from grassmann_edmd.edmd import (
    CompressionMatrix,
    DataMatrices,
    TransformedModel,
    bilinear_compression,
    build_data_matrices,
    full_edmd,
    koopman_eigenvalues,
    qr_transform,
    subspace_compression,
)

# Errors
from grassmann_edmd.errors import (
    ConfigError,
    GrassmannEDMDError,
    IntegrationError,
    ModelFileError,
    NotPositiveDefiniteError,
    NumericalError,
    OffManifoldError,
    OptimizationError,
    RankDeficiencyError,
    SingularMatrixError,
)

# Experiment
from grassmann_edmd.experiment import (
    ExperimentConfig,
    FullModel,
    SubspaceModel,
    optimize_subspace,
    replicate_duffing,
    run_experiment,
    run_property_suite,
    train,
)

# Manifold
from grassmann_edmd.manifold import (
    HorizontalVector,
    StiefelPoint,
    project_horizontal,
    random_stiefel,
    retract,
    subspace_distance,
)

# Objective
from grassmann_edmd.objective import (
    ObjectiveContext,
    RayleighQuotient,
    build_context,
    evaluate,
    hessian_vector,
    riemannian_gradient,
)

# Optimizer
from grassmann_edmd.optimizer import OptimizationTrace, TrustRegionConfig, optimize, trust_region

# Prediction
from grassmann_edmd.prediction import (
    ErrorGrid,
    KoopmanLinearSystem,
    error_grid,
    in_basis,
    invariance_estimate,
    mean_prediction_error,
    reduced_system,
    transformed_system,
)

__all__ = [
    # Version
    "__version__",
    # Dynamics
    "Box",
    "IntegratorSettings",
    "SampledMap",
    "Trajectory",
    "TrainingSet",
    "duffing_field",
    "linear_field",
    "step",
    "sample_states",
    "generate_pairs",
    "rollout_truth",
    # Dictionary
    "Dictionary",
    "monomial_dictionary",
    "coordinate_dictionary",
    "lift",
    "lift_batch",
    # EDMD
    "DataMatrices",
    "build_data_matrices",
    "CompressionMatrix",
    "full_edmd",
    "bilinear_compression",
    "koopman_eigenvalues",
    "TransformedModel",
    "qr_transform",
    "subspace_compression",
    # Prediction
    "KoopmanLinearSystem",
    "transformed_system",
    "reduced_system",
    "in_basis",
    "mean_prediction_error",
    "invariance_estimate",
    "ErrorGrid",
    "error_grid",
    # Manifold
    "StiefelPoint",
    "HorizontalVector",
    "random_stiefel",
    "project_horizontal",
    "retract",
    "subspace_distance",
    # Objective
    "ObjectiveContext",
    "build_context",
    "evaluate",
    "riemannian_gradient",
    "hessian_vector",
    "RayleighQuotient",
    # Optimizer
    "TrustRegionConfig",
    "OptimizationTrace",
    "trust_region",
    "optimize",
    # Experiment
    "ExperimentConfig",
    "FullModel",
    "SubspaceModel",
    "train",
    "optimize_subspace",
    "run_experiment",
    "replicate_duffing",
    "run_property_suite",
    # Errors
    "GrassmannEDMDError",
    "ConfigError",
    "NumericalError",
    "IntegrationError",
    "RankDeficiencyError",
    "NotPositiveDefiniteError",
    "SingularMatrixError",
    "OffManifoldError",
    "OptimizationError",
    "ModelFileError",
]
