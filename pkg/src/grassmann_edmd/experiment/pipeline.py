"""
End-to-end pipeline: train, optimize, evaluate.

1. Sample L training states in the domain and integrate one step.
2. Build G_B, S_B and orthonormalise them with the QR transform.
3. Persist the full model (basis E).
4. Sample J test states, integrate N steps, and minimise g_N over Gr(r, d)
   from a random or a coordinate Krylov start.
5. Persist the optimised subspace and the optimiser trace.
6. Compare full and reduced predictions on the evaluation grids.

Output layout of a run directory:

    config.json                       configuration echo
    full_model.json / .bin            transformed full model
    reduced_model.json / .bin         optimised subspace
    trace.csv                         optimiser iterations
    grid_<i>.csv                      error fields per evaluation grid
    summary.json                      statistics of all of the above
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from grassmann_edmd.dynamics.data import generate_pairs, sample_states
from grassmann_edmd.dynamics.flow import SampledMap
from grassmann_edmd.edmd.compression import koopman_eigenvalues
from grassmann_edmd.edmd.data import build_data_matrices
from grassmann_edmd.edmd.transform import coordinate_krylov_basis, qr_transform
from grassmann_edmd.errors import ModelFileError, OptimizationError
from grassmann_edmd.experiment.config import ExperimentConfig
from grassmann_edmd.experiment.modelfile import FullModel, SubspaceModel, model_paths
from grassmann_edmd.manifold.stiefel import StiefelPoint, random_stiefel, subspace_distance
from grassmann_edmd.objective.prediction_error import ObjectiveContext, build_context, evaluate
from grassmann_edmd.optimizer.trace import STATUS_NUMERICAL_FAILURE, OptimizationTrace
from grassmann_edmd.optimizer.trust_region import optimize
from grassmann_edmd.prediction.grid import ErrorGrid, error_grid
from grassmann_edmd.prediction.system import (
    KoopmanLinearSystem,
    reduced_system,
    transformed_system,
)
from grassmann_edmd.utils.formatting import (
    format_box,
    format_eigenvalues,
    format_matrix,
    format_stats,
    format_value,
)

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.json"
FULL_MODEL = "full_model"
REDUCED_MODEL = "reduced_model"
TRACE_FILE = "trace.csv"
SUMMARY_FILE = "summary.json"


def grid_file(index: int) -> str:
    return f"grid_{index}.csv"


@dataclass
class OptimizationResult:
    """Optimised subspace with its objective values and trace."""

    subspace: SubspaceModel
    trace: OptimizationTrace
    context: ObjectiveContext

    @property
    def point(self) -> StiefelPoint:
        return StiefelPoint(self.subspace.U)

    def to_dict(self) -> dict:
        return {
            "r": self.subspace.r,
            "status": self.subspace.status,
            "value_initial": self.subspace.value_initial,
            "value_final": self.subspace.value_final,
            "iterations": self.trace.iterations,
            "accepted_steps": self.trace.accepted_steps,
            "final_gradnorm": self.trace.final_gradnorm,
            "distance_from_start": subspace_distance(self.subspace.U0, self.subspace.U),
        }


@dataclass
class ExperimentResult:
    """Artifacts and statistics of a complete run."""

    config: ExperimentConfig
    output_dir: Path
    full_model: FullModel
    optimization: OptimizationResult
    grids: list[ErrorGrid] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def full_model_path(self) -> Path:
        return model_paths(self.output_dir / FULL_MODEL)[0]

    @property
    def reduced_model_path(self) -> Path:
        return model_paths(self.output_dir / REDUCED_MODEL)[0]


def _ensure_dir(out_dir: str | Path) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def train(config: ExperimentConfig, out_dir: str | Path | None = None) -> FullModel:
    """
    Collect training data, build the transformed model and persist it.

    Raises:
        RankDeficiencyError: If G_B lacks full row rank (with guidance)
        IntegrationError: If a training state cannot be integrated
    """
    n = config.n
    fmap = config.system.build_map()
    dictionary = config.dictionary.build(n)
    logger.info(
        "Training %s: M=%d, s=%d, L=%d on %s",
        config.system.name,
        dictionary.M,
        dictionary.s,
        config.data.L,
        format_box(config.data.domain.to_list()),
    )
    states = sample_states(config.data.domain, config.data.L, seed=config.data.train_seed)
    dm = build_data_matrices(dictionary, generate_pairs(fmap, states))
    tm = qr_transform(dm)

    model = FullModel(
        tm=tm,
        dictionary=dictionary,
        provenance={
            "system": config.system.to_dict(),
            "domain": config.data.domain.to_list(),
            "L": config.data.L,
            "train_seed": config.data.train_seed,
            "gram_residual": tm.gram_residual(),
            "warnings": list(dm.warnings),
        },
    )
    if out_dir is not None:
        model.save(_ensure_dir(out_dir) / FULL_MODEL)
    return model


def optimize_subspace(
    config: ExperimentConfig,
    model: FullModel,
    out_dir: str | Path | None = None,
    fmap: SampledMap | None = None,
    full_model_path: str | Path | None = None,
) -> OptimizationResult:
    """
    Minimise g_N over r-dimensional subspaces of the model's tail space.

    full_model_path is recorded in the subspace header (default: the
    full model file of a run directory).

    Raises:
        OptimizationError: If the optimiser fails numerically (trace
            is attached and written before raising)
    """
    fmap = fmap or config.system.build_map()
    r = config.reduction.r
    test_states = sample_states(config.data.domain, config.data.J, seed=config.data.test_seed)
    ctx = build_context(model.tm, model.dictionary, fmap, test_states, config.data.N, r)

    init = config.reduction.init
    if init == "krylov":
        U0 = StiefelPoint(coordinate_krylov_basis(model.tm, r))
    else:
        U0 = random_stiefel(ctx.d, r, seed=config.data.init_seed)
    value0 = evaluate(ctx, U0).value
    logger.info(
        "Optimising r=%d of d=%d (J=%d, N=%d, %s start): g_N(U0)=%.6e",
        r,
        ctx.d,
        ctx.J,
        ctx.N,
        init,
        value0,
    )
    point, trace = optimize(ctx, U0, config.reduction.optimizer)
    value = evaluate(ctx, point).value

    subspace = SubspaceModel(
        U=point.U.copy(),
        U0=U0.U.copy(),
        full_model=str(model_paths(full_model_path or FULL_MODEL)[0]),
        value_initial=value0,
        value_final=value,
        status=trace.status,
        provenance={
            "J": ctx.J,
            "N": ctx.N,
            "test_seed": config.data.test_seed,
            "init": init,
            "init_seed": config.data.init_seed,
        },
    )
    result = OptimizationResult(subspace=subspace, trace=trace, context=ctx)
    if out_dir is not None:
        path = _ensure_dir(out_dir)
        trace.to_csv(path / TRACE_FILE)
        subspace.save(path / REDUCED_MODEL, s=model.tm.s)

    if trace.status == STATUS_NUMERICAL_FAILURE:
        raise OptimizationError(
            f"Optimiser failed numerically after {trace.iterations} iterations", trace=trace
        )
    logger.info("g_N: %.6e -> %.6e (%s)", value0, value, trace.status)
    return result


def evaluate_grids(
    config: ExperimentConfig,
    kls_full: KoopmanLinearSystem,
    kls_reduced: KoopmanLinearSystem,
    fmap: SampledMap | None = None,
    out_dir: str | Path | None = None,
) -> list[ErrorGrid]:
    """
    Error fields of two models on every configured grid.

    Integrator failures mark cells invalid instead of aborting.
    """
    fmap = fmap or config.system.build_map()
    grids = []
    for i, grid_config in enumerate(config.grids):
        grid = error_grid(
            kls_full,
            kls_reduced,
            fmap,
            grid_config.box,
            grid_config.resolution,
            config.data.N,
            on_error="mark",
            threads=config.threads,
        )
        stats = grid.summary()
        logger.info(
            "Grid %d on %s: diff %s",
            i,
            format_box(grid_config.box.to_list()),
            format_stats(stats["diff"], ("mean", "median", "median_abs")),
        )
        if out_dir is not None:
            grid.to_csv(_ensure_dir(out_dir) / grid_file(i))
        grids.append(grid)
    return grids


def evaluate_models(
    config: ExperimentConfig,
    model: FullModel,
    subspace: SubspaceModel,
    out_dir: str | Path | None = None,
) -> list[ErrorGrid]:
    """Compare the full model with its reduction on the configured grids."""
    if subspace.U.shape[0] != model.tm.d:
        raise ModelFileError(
            f"Subspace has {subspace.U.shape[0]} rows, full model tail has {model.tm.d}"
        )
    kls_full = transformed_system(model.tm, model.dictionary)
    kls_reduced = reduced_system(model.tm, model.dictionary, subspace.U)
    return evaluate_grids(config, kls_full, kls_reduced, out_dir=out_dir)


def build_summary(
    config: ExperimentConfig,
    model: FullModel,
    optimization: OptimizationResult | None,
    grids: list[ErrorGrid],
) -> dict:
    """Deterministic summary of a run (no timestamps)."""
    eigenvalues = koopman_eigenvalues(model.tm.A_E)
    summary = {
        "name": config.name,
        "model": {
            "M": model.tm.M,
            "n": model.tm.n,
            "s": model.tm.s,
            "L": model.provenance.get("L"),
            "gram_residual": model.tm.gram_residual(),
            "spectral_radius": float(np.max(np.abs(eigenvalues))),
            "warnings": model.provenance.get("warnings", []),
        },
        "grids": [
            {"box": g.box.to_list(), **grid.summary()} for g, grid in zip(config.grids, grids)
        ],
    }
    if optimization is not None:
        summary["optimization"] = optimization.to_dict()
    return summary


def write_summary(summary: dict, out_dir: str | Path) -> Path:
    path = _ensure_dir(out_dir) / SUMMARY_FILE
    with open(path, "w") as f:
        json.dump(summary, f, indent=2)
    return path


def merge_summary(updates: dict, out_dir: str | Path) -> dict:
    """
    Update the sections of an existing summary.json and write it back.

    Sections absent from updates (e.g. "optimization" when only the grids
    are re-evaluated) are kept.
    """
    path = Path(out_dir) / SUMMARY_FILE
    summary: dict = {}
    if path.exists():
        try:
            with open(path) as f:
                summary = json.load(f)
        except json.JSONDecodeError as e:
            logger.warning("Ignoring unreadable %s: %s", path, e)
            summary = {}
    summary.update(updates)
    write_summary(summary, out_dir)
    return summary


def format_summary(summary: dict, eigenvalues=None, reduced_K=None) -> str:
    """
    Human-readable rendering of a run summary.

    Args:
        summary: Output of build_summary (or a merged summary.json)
        eigenvalues: Optional eigenvalues of K_E to list
        reduced_K: Optional reduced compression matrix to print
    """
    model = summary["model"]
    lines = [
        f"Experiment: {summary['name']}",
        "=" * 60,
        f"Dictionary: M={model['M']}, n={model['n']}, s={model['s']}, L={model['L']}",
        f"Gram residual: {format_value(model['gram_residual'])}",
        f"Spectral radius of K_E: {model['spectral_radius']:.6f}",
    ]
    if eigenvalues is not None:
        lines.append(f"Leading eigenvalues: {format_eigenvalues(eigenvalues)}")
    for warning in model.get("warnings", []):
        lines.append(f"WARNING: {warning}")

    opt = summary.get("optimization")
    if opt:
        lines += [
            "",
            f"Reduction (r={opt['r']}): {opt['status']} after {opt['iterations']} iterations "
            f"({opt['accepted_steps']} accepted)",
            f"  g_N(U0) = {format_value(opt['value_initial'])}",
            f"  g_N(U*) = {format_value(opt['value_final'])}",
            f"  |grad|  = {format_value(opt['final_gradnorm'])}",
        ]
    if reduced_K is not None:
        lines += ["", "Reduced compression K (E~):", format_matrix(reduced_K)]

    for i, grid in enumerate(summary.get("grids", [])):
        lines += [
            "",
            f"Grid {i}: {format_box(grid['box'])}, "
            f"{grid['cells']} cells, {grid['invalid']} invalid",
            f"  eps_full:    {format_stats(grid['eps_full'])}",
            f"  eps_reduced: {format_stats(grid['eps_reduced'])}",
            f"  diff:        {format_stats(grid['diff'], ('mean', 'median', 'median_abs'))}",
        ]
    return "\n".join(lines)


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None) -> ExperimentResult:
    """
    Train, optimise and evaluate, writing every artifact into out_dir.

    Raises:
        RankDeficiencyError, IntegrationError, OptimizationError
    """
    out = _ensure_dir(out_dir or config.output_dir)
    config.save(out / CONFIG_FILE)
    fmap = config.system.build_map()

    model = train(config, out)
    optimization = optimize_subspace(config, model, out, fmap=fmap)
    grids = evaluate_grids(
        config,
        transformed_system(model.tm, model.dictionary),
        reduced_system(model.tm, model.dictionary, optimization.subspace.U),
        fmap=fmap,
        out_dir=out,
    )
    summary = build_summary(config, model, optimization, grids)
    write_summary(summary, out)
    return ExperimentResult(
        config=config,
        output_dir=out,
        full_model=model,
        optimization=optimization,
        grids=grids,
        summary=summary,
    )


def replicate_duffing(
    out_dir: str | Path | None = None, scale: str = "desk", seed: int | None = None
) -> ExperimentResult:
    """Duffing experiment at full or desk scale."""
    config = ExperimentConfig.duffing(scale)
    config = config.with_overrides(seed=seed, output_dir=None if out_dir is None else str(out_dir))
    return run_experiment(config, config.output_dir)
