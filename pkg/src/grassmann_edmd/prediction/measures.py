"""
Prediction error measures.

d_N(xi, zeta) = sum_{t=0..N} ||xi(t) - zeta(t)||_2 is the sum over time of
Euclidean state errors. The mean prediction error divides that sum (over
N + 1 terms) by N, matching the 1/20 prefactor used with a horizon of 20.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from grassmann_edmd.dynamics.data import Trajectory, rollout_truth_batch
from grassmann_edmd.dynamics.flow import SampledMap
from grassmann_edmd.prediction.system import KoopmanLinearSystem


def _states(trajectory) -> np.ndarray:
    if isinstance(trajectory, Trajectory):
        return trajectory.states
    states = np.asarray(trajectory, dtype=float)
    return states.reshape(-1, 1) if states.ndim == 1 else states


def _checked_pair(xi, zeta, N: int) -> tuple[np.ndarray, np.ndarray]:
    a = _states(xi)
    b = _states(zeta)
    if N < 0:
        raise ValueError(f"Horizon must be non-negative, got {N}")
    if a.shape[0] < N + 1 or b.shape[0] < N + 1:
        raise ValueError(
            f"Trajectories need at least {N + 1} rows, got {a.shape[0]} and {b.shape[0]}"
        )
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"State dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    return a[: N + 1], b[: N + 1]


def trajectory_distance(xi, zeta, N: int) -> float:
    """
    Performance measure d_N: sum_{t=0..N} ||xi(t) - zeta(t)||_2.

    Raises:
        ValueError: On length or dimension mismatch
    """
    a, b = _checked_pair(xi, zeta, N)
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.linalg.norm(a - b, axis=1).sum())


def mean_prediction_error(truth, pred, N: int) -> float:
    """
    Mean prediction error (1/N) sum_{t=0..N} ||truth(t) - pred(t)||_2.

    Raises:
        ValueError: On length or dimension mismatch, or N < 1
    """
    if N < 1:
        raise ValueError(f"Mean prediction error needs N >= 1, got {N}")
    return trajectory_distance(truth, pred, N) / N


def batch_distances(truth: np.ndarray, pred: np.ndarray) -> np.ndarray:
    """d_N for J x (N+1) x n stacks of trajectories, returning shape (J,)."""
    with np.errstate(over="ignore", invalid="ignore"):
        return np.linalg.norm(truth - pred, axis=2).sum(axis=1)


@dataclass(frozen=True)
class PredictionErrorReport:
    """
    Per-initial-state mean errors and their aggregates.

    Non-finite entries (overflowing predictions or failed cells) are
    excluded from the statistics and counted separately.
    """

    errors: np.ndarray
    horizon: int

    @property
    def finite(self) -> np.ndarray:
        return self.errors[np.isfinite(self.errors)]

    @property
    def n_invalid(self) -> int:
        return int(self.errors.size - self.finite.size)

    def _stat(self, func) -> float:
        return float(func(self.finite)) if self.finite.size else float("nan")

    @property
    def mean(self) -> float:
        return self._stat(np.mean)

    @property
    def median(self) -> float:
        return self._stat(np.median)

    @property
    def max(self) -> float:
        return self._stat(np.max)

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "count": int(self.errors.size),
            "invalid": self.n_invalid,
            "mean": self.mean,
            "median": self.median,
            "max": self.max,
        }


def invariance_estimate(
    kls: KoopmanLinearSystem, map: SampledMap, test_states, N: int
) -> float:
    """
    Empirical invariance measure: max over test states of d_N(truth, prediction).

    Raises:
        ValueError: If the test set is empty
    """
    X0 = np.atleast_2d(np.asarray(test_states, dtype=float))
    if X0.shape[0] == 0:
        raise ValueError("Invariance estimate needs at least one test state")
    truth = rollout_truth_batch(map, X0, N)
    pred = kls.predict(X0, N)
    return float(np.max(batch_distances(truth, pred)))
