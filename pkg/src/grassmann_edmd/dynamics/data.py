"""
Training data and ground-truth trajectories.

Initial states are drawn i.i.d. from a box with a seeded PCG64 generator,
so training and test sets are reproducible across platforms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from grassmann_edmd.dynamics.flow import SampledMap, step, step_batch
from grassmann_edmd.errors import IntegrationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Box:
    """
    Axis-aligned domain box [lo_1, hi_1] x ... x [lo_n, hi_n].

    Degenerate intervals (lo == hi) are allowed.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError(
                f"Box bounds must be non-empty and of equal length, got {self.lower} / {self.upper}"
            )
        for lo, hi in zip(self.lower, self.upper):
            if lo > hi:
                raise ValueError(f"Box interval [{lo}, {hi}] is reversed")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, states, tol: float = 0.0) -> bool:
        """True if every state lies inside the box (up to tol)."""
        states = np.atleast_2d(np.asarray(states, dtype=float))
        return bool(
            np.all(states >= np.asarray(self.lower) - tol)
            and np.all(states <= np.asarray(self.upper) + tol)
        )

    @classmethod
    def square(cls, half_width: float, dim: int = 2) -> Box:
        """The box [-half_width, half_width]^dim."""
        return cls(lower=(-half_width,) * dim, upper=(half_width,) * dim)

    def to_list(self) -> list[list[float]]:
        return [[lo, hi] for lo, hi in zip(self.lower, self.upper)]

    @classmethod
    def from_list(cls, intervals) -> Box:
        """Create from [[lo, hi], ...]."""
        return cls(
            lower=tuple(float(lo) for lo, _ in intervals),
            upper=tuple(float(hi) for _, hi in intervals),
        )


@dataclass(frozen=True)
class Trajectory:
    """
    A state trajectory x(0), ..., x(N).

    Attributes:
        states: (N+1) x n array, row t is the state at step t
    """

    states: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] < 1:
            raise ValueError(f"Trajectory states must be a non-empty 2-D array, got {states.shape}")
        object.__setattr__(self, "states", states)

    @property
    def x0(self) -> np.ndarray:
        return self.states[0]

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def to_csv(self, filepath: str | Path, dt: float = 1.0) -> None:
        """Write one row per state, time column first."""
        t = np.arange(self.states.shape[0]) * dt
        header = ",".join(["t"] + [f"x{k + 1}" for k in range(self.dim)])
        np.savetxt(
            filepath, np.column_stack([t, self.states]), delimiter=",", header=header, comments=""
        )


@dataclass(frozen=True)
class TrainingSet:
    """
    Snapshot pairs (x_i, y_i = f(x_i)).

    Attributes:
        x: L x n array of initial states
        y: L x n array of successor states
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2 or x.shape != y.shape:
            raise ValueError(f"Pair arrays must be 2-D with equal shapes, got {x.shape} / {y.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def L(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.x, self.y))

    def to_csv(self, filepath: str | Path) -> None:
        """Write one row per pair: index, then x components, then y components."""
        header = ",".join(
            ["i"] + [f"x{k + 1}" for k in range(self.dim)] + [f"y{k + 1}" for k in range(self.dim)]
        )
        data = np.column_stack([np.arange(self.L), self.x, self.y])
        np.savetxt(filepath, data, delimiter=",", header=header, comments="")


def make_rng(seed: int | None) -> np.random.Generator:
    """Seeded, platform-independent generator (PCG64)."""
    return np.random.Generator(np.random.PCG64(seed))


def sample_states(box: Box, count: int, seed: int | None = None) -> np.ndarray:
    """
    Draw count states uniformly i.i.d. from box.

    Returns:
        count x n array
    """
    if count < 1:
        raise ValueError(f"Sample count must be at least 1, got {count}")
    rng = make_rng(seed)
    lower = np.asarray(box.lower, dtype=float)
    upper = np.asarray(box.upper, dtype=float)
    return lower + (upper - lower) * rng.random((count, box.dim))


def generate_pairs(map: SampledMap, states) -> TrainingSet:
    """
    Build training pairs (x_i, f(x_i)).

    Raises:
        IntegrationError: With the index of the offending state
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    logger.debug("Integrating %d training states over dt=%g", states.shape[0], map.dt)
    return TrainingSet(x=states, y=step_batch(map, states))


def rollout_truth(map: SampledMap, x0, N: int) -> Trajectory:
    """
    Ground-truth trajectory of length N + 1 from x0.
    """
    if N < 1:
        raise ValueError(f"Horizon must be at least 1, got {N}")
    x0 = np.asarray(x0, dtype=float)
    states = np.empty((N + 1, map.dim))
    states[0] = x0
    for t in range(N):
        states[t + 1] = step(map, states[t])
    return Trajectory(states)


def rollout_truth_batch(map: SampledMap, initial_states, N: int) -> np.ndarray:
    """
    Ground-truth trajectories for many initial states at once.

    Returns:
        J x (N+1) x n array

    Raises:
        IntegrationError: With .index set to the failing initial state
    """
    if N < 1:
        raise ValueError(f"Horizon must be at least 1, got {N}")
    x0 = np.atleast_2d(np.asarray(initial_states, dtype=float))
    out = np.empty((x0.shape[0], N + 1, x0.shape[1]))
    out[:, 0] = x0
    for t in range(N):
        try:
            out[:, t + 1] = step_batch(map, out[:, t])
        except IntegrationError as e:
            raise IntegrationError(
                f"Step {t + 1}: {e}",
                index=e.index,
                location=None if e.index is None else x0[e.index].tolist(),
            ) from e
    return out
