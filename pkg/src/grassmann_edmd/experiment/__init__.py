"""
Experiment configuration, model files, the end-to-end pipeline and the
property suite.
"""

from grassmann_edmd.experiment.checks import PropertyResult, run_property_suite
from grassmann_edmd.experiment.config import (
    DataConfig,
    DictionaryConfig,
    ExperimentConfig,
    GridConfig,
    ReductionConfig,
    SystemConfig,
)
from grassmann_edmd.experiment.modelfile import (
    FullModel,
    SubspaceModel,
    calculate_checksum,
    model_paths,
    read_model,
    write_model,
)
from grassmann_edmd.experiment.pipeline import (
    ExperimentResult,
    OptimizationResult,
    build_summary,
    evaluate_grids,
    evaluate_models,
    format_summary,
    optimize_subspace,
    replicate_duffing,
    run_experiment,
    train,
    merge_summary,
    write_summary,
)

__all__ = [
    # Configuration
    "ExperimentConfig",
    "SystemConfig",
    "DictionaryConfig",
    "DataConfig",
    "ReductionConfig",
    "GridConfig",
    # Model files
    "FullModel",
    "SubspaceModel",
    "write_model",
    "read_model",
    "model_paths",
    "calculate_checksum",
    # Pipeline
    "train",
    "optimize_subspace",
    "evaluate_grids",
    "evaluate_models",
    "build_summary",
    "write_summary",
    "merge_summary",
    "format_summary",
    "run_experiment",
    "replicate_duffing",
    "OptimizationResult",
    "ExperimentResult",
    # Checks
    "PropertyResult",
    "run_property_suite",
]
