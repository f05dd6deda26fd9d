"""
Continuous-time benchmark systems.

A VectorField evaluates on a single state of shape (n,) or on a batch of
states of shape (L, n); the last axis is always the state axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class VectorField:
    """
    Autonomous vector field x' = F(x) on R^n.

    Attributes:
        dim: State dimension n
        func: Callable mapping an (..., n) array to an (..., n) array
        name: Registry name, recorded in model provenance
        params: Parameters needed to rebuild the field (JSON friendly)
    """

    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"Vector field dimension must be positive, got {self.dim}")

    def eval(self, x) -> np.ndarray:
        """Evaluate the field on a state or a batch of states."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"State has length {x.shape[-1]}, field expects {self.dim}")
        out = np.asarray(self.func(x), dtype=float)
        if out.shape != x.shape:
            raise ValueError(f"Field returned shape {out.shape} for input shape {x.shape}")
        return out

    def __call__(self, x) -> np.ndarray:
        return self.eval(x)


def _duffing(x: np.ndarray) -> np.ndarray:
    x1 = x[..., 0]
    x2 = x[..., 1]
    return np.stack([x2, x1 - x1**3], axis=-1)


def duffing_field() -> VectorField:
    """Unforced, undamped Duffing oscillator: x1' = x2, x2' = x1 - x1^3."""
    return VectorField(dim=2, func=_duffing, name="duffing")


def duffing_energy(x) -> np.ndarray | float:
    """
    Conserved energy of the Duffing oscillator.

    E(x) = x2^2/2 - x1^2/2 + x1^4/4
    """
    x = np.asarray(x, dtype=float)
    x1 = x[..., 0]
    x2 = x[..., 1]
    energy = 0.5 * x2**2 - 0.5 * x1**2 + 0.25 * x1**4
    return float(energy) if energy.ndim == 0 else energy


DEFAULT_LINEAR_MATRIX = ((-0.1, 1.0), (-1.0, -0.1))


def linear_field(F=None) -> VectorField:
    """
    Linear test system x' = F x.

    Any dictionary containing the coordinate functions spans a
    Koopman-invariant subspace for this system, which makes it the exact
    reference case for compressions and objectives.

    Args:
        F: n x n system matrix (default: lightly damped rotation)
    """
    F = np.array(DEFAULT_LINEAR_MATRIX if F is None else F, dtype=float)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"Linear system matrix must be square, got shape {F.shape}")
    F.setflags(write=False)

    def _linear(x: np.ndarray) -> np.ndarray:
        return x @ F.T

    return VectorField(dim=F.shape[0], func=_linear, name="linear", params={"F": F.tolist()})


SYSTEMS: dict[str, Callable[..., VectorField]] = {
    "duffing": duffing_field,
    "linear": linear_field,
}


def get_system(name: str, params: dict | None = None) -> VectorField:
    """
    Build a registered vector field by name.

    Raises:
        ValueError: If the name is not registered
    """
    try:
        factory = SYSTEMS[name]
    except KeyError:
        raise ValueError(
            f"Unknown system: {name!r} (available: {', '.join(sorted(SYSTEMS))})"
        ) from None
    return factory(**(params or {}))
