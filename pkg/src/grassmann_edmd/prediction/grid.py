"""
Mean prediction errors of two Koopman linear systems on a grid of initial states.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from grassmann_edmd.dynamics.data import Box, rollout_truth_batch
from grassmann_edmd.dynamics.flow import SampledMap
from grassmann_edmd.errors import IntegrationError
from grassmann_edmd.prediction.measures import PredictionErrorReport, batch_distances
from grassmann_edmd.prediction.system import KoopmanLinearSystem

logger = logging.getLogger(__name__)

# Grid nodes integrated together per work item
CHUNK_SIZE = 256

ON_ERROR_MODES = ("raise", "mark")


def grid_nodes(box: Box, resolution) -> np.ndarray:
    """
    Tensor grid over box with "ij" ordering (the last coordinate varies fastest).

    Args:
        box: Grid domain
        resolution: Nodes per axis (int or one int per axis), each >= 2

    Returns:
        (prod(resolution), n) array
    """
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (box.dim,))
    if np.any(res < 2):
        raise ValueError(f"Grid resolution must be at least 2 per axis, got {res.tolist()}")
    axes = [np.linspace(lo, hi, k) for lo, hi, k in zip(box.lower, box.upper, res)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


@dataclass
class ErrorGrid:
    """
    Mean prediction errors of a full and a reduced model on grid nodes.

    Attributes:
        nodes: (C, n) initial states
        eps_full: Mean error of the full model per node (NaN if invalid)
        eps_reduced: Mean error of the reduced model per node (NaN if invalid)
        horizon: Prediction horizon N
        resolution: Nodes per axis
    """

    nodes: np.ndarray
    eps_full: np.ndarray
    eps_reduced: np.ndarray
    horizon: int
    resolution: tuple[int, ...]

    @property
    def diff(self) -> np.ndarray:
        """Signed difference eps_full - eps_reduced."""
        with np.errstate(invalid="ignore"):
            return self.eps_full - self.eps_reduced

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.diff)

    @property
    def reports(self) -> tuple[PredictionErrorReport, PredictionErrorReport]:
        return (
            PredictionErrorReport(self.eps_full, self.horizon),
            PredictionErrorReport(self.eps_reduced, self.horizon),
        )

    def summary(self) -> dict:
        """Aggregate statistics of both error fields and of the difference field."""
        full, reduced = self.reports
        diff = self.diff[self.valid]
        stats = {
            "cells": int(self.nodes.shape[0]),
            "invalid": int(np.count_nonzero(~self.valid)),
            "resolution": list(self.resolution),
            "horizon": self.horizon,
            "eps_full": full.to_dict(),
            "eps_reduced": reduced.to_dict(),
        }
        if diff.size:
            stats["diff"] = {
                "mean": float(np.mean(diff)),
                "median": float(np.median(diff)),
                "max": float(np.max(diff)),
                "median_abs": float(np.median(np.abs(diff))),
            }
        else:
            nan = float("nan")
            stats["diff"] = {"mean": nan, "median": nan, "max": nan, "median_abs": nan}
        return stats

    def to_csv(self, filepath: str | Path) -> None:
        """Write columns x1, ..., xn, eps_full, eps_reduced, diff with a header row."""
        header = ",".join(
            [f"x{k + 1}" for k in range(self.nodes.shape[1])] + ["eps_full", "eps_reduced", "diff"]
        )
        data = np.column_stack([self.nodes, self.eps_full, self.eps_reduced, self.diff])
        np.savetxt(filepath, data, delimiter=",", header=header, comments="", fmt="%.17g")


def _truth_or_mark(map: SampledMap, nodes: np.ndarray, N: int, on_error: str) -> np.ndarray:
    """Truth trajectories for a chunk; failed nodes become NaN in "mark" mode."""
    try:
        return rollout_truth_batch(map, nodes, N)
    except IntegrationError as e:
        if on_error == "raise":
            location = None if e.index is None else nodes[e.index].tolist()
            raise IntegrationError(f"Grid node {location}: {e}", location=location) from e

    truth = np.full((nodes.shape[0], N + 1, nodes.shape[1]), np.nan)
    for i, x0 in enumerate(nodes):
        try:
            truth[i] = rollout_truth_batch(map, x0[None, :], N)[0]
        except IntegrationError as e:
            logger.warning("Integration failed at grid node %s, cell marked invalid: %s", x0, e)
    return truth


def error_grid(
    kls_full: KoopmanLinearSystem,
    kls_reduced: KoopmanLinearSystem,
    map: SampledMap,
    grid_box: Box,
    resolution,
    N: int,
    on_error: str = "raise",
    threads: int | None = None,
) -> ErrorGrid:
    """
    Evaluate eps_full and eps_reduced on every node of a tensor grid.

    Args:
        kls_full: Full-space model
        kls_reduced: Reduced model
        map: Sampled flow map producing the ground truth
        grid_box: Grid domain
        resolution: Nodes per axis, each >= 2
        N: Horizon (>= 1)
        on_error: "raise" propagates IntegrationError with the grid location,
            "mark" stores NaN for the failing cell and continues
        threads: Worker threads (None or 1 evaluates sequentially)

    Raises:
        IntegrationError: On integrator failure in "raise" mode
    """
    if on_error not in ON_ERROR_MODES:
        raise ValueError(f"on_error must be one of {ON_ERROR_MODES}, got {on_error!r}")
    if N < 1:
        raise ValueError(f"Horizon must be at least 1, got {N}")
    nodes = grid_nodes(grid_box, resolution)
    res = tuple(int(k) for k in np.broadcast_to(np.asarray(resolution), (grid_box.dim,)))

    def work(chunk: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        truth = _truth_or_mark(map, chunk, N, on_error)
        eps_f = batch_distances(truth, kls_full.predict(chunk, N)) / N
        eps_r = batch_distances(truth, kls_reduced.predict(chunk, N)) / N
        return eps_f, eps_r

    chunks = [nodes[i : i + CHUNK_SIZE] for i in range(0, nodes.shape[0], CHUNK_SIZE)]
    logger.info("Evaluating %d grid cells in %d chunks (N=%d)", nodes.shape[0], len(chunks), N)
    if threads is None or threads <= 1 or len(chunks) == 1:
        results = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))

    grid = ErrorGrid(
        nodes=nodes,
        eps_full=np.concatenate([r[0] for r in results]),
        eps_reduced=np.concatenate([r[1] for r in results]),
        horizon=N,
        resolution=res,
    )
    invalid = int(np.count_nonzero(~grid.valid))
    if invalid:
        logger.warning("%d of %d grid cells are invalid", invalid, nodes.shape[0])
    return grid
