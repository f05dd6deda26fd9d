"""
Sampled-time flow maps.

The discrete dynamics x(t+1) = f(x(t)) are the dt-flow of a continuous
vector field, computed by an adaptive embedded Runge-Kutta 5(4) pair
(scipy's RK45, Dormand-Prince) with tight absolute/relative tolerances.
A fixed-step RK4 integrator is kept as an independent validation oracle.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from grassmann_edmd.dynamics.systems import VectorField
from grassmann_edmd.errors import ConfigError, IntegrationError

logger = logging.getLogger(__name__)

# Integrators accepted by solve_ivp that are explicit and non-stiff
SUPPORTED_METHODS = ("RK45", "DOP853", "RK23")


@dataclass(frozen=True)
class IntegratorSettings:
    """Tolerances and method for the adaptive integrator."""

    rtol: float = 1e-10
    atol: float = 1e-10
    method: str = "RK45"

    def validate(self):
        """Validate integrator settings."""
        if self.rtol <= 0 or self.atol <= 0:
            raise ConfigError(
                f"Integrator tolerances must be positive (rtol={self.rtol}, atol={self.atol})"
            )
        if self.method not in SUPPORTED_METHODS:
            raise ConfigError(
                f"Unsupported integrator {self.method!r}, use one of {', '.join(SUPPORTED_METHODS)}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> IntegratorSettings:
        return cls(**data)


@dataclass(frozen=True)
class SampledMap:
    """
    The dt-flow of a vector field, i.e. the discrete map f.

    Attributes:
        field: Continuous-time vector field
        dt: Sampling time in seconds
        settings: Integrator tolerances
    """

    field: VectorField
    dt: float = 0.1
    settings: IntegratorSettings = IntegratorSettings()

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"Sampling time must be positive, got {self.dt}")
        self.settings.validate()

    @property
    def dim(self) -> int:
        return self.field.dim

    def __call__(self, x) -> np.ndarray:
        return step(self, x)


def _integrate(map: SampledMap, y0: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Integrate the (possibly stacked) state y0 over one sampling interval."""

    def rhs(_t, y):
        return map.field.eval(y.reshape(shape)).ravel()

    result = solve_ivp(
        rhs,
        (0.0, map.dt),
        y0,
        method=map.settings.method,
        rtol=map.settings.rtol,
        atol=map.settings.atol,
    )
    if not result.success:
        raise IntegrationError(f"Integrator failed: {result.message}")
    y1 = result.y[:, -1]
    if not np.all(np.isfinite(y1)):
        raise IntegrationError("Integrator produced non-finite state")
    return y1


def step(map: SampledMap, x) -> np.ndarray:
    """
    Advance a single state by one sampling interval.

    Args:
        map: Sampled flow map
        x: State of length map.dim

    Returns:
        f(x), the state one sampling interval later

    Raises:
        IntegrationError: If the integrator fails (never returns NaN)
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (map.dim,):
        raise ValueError(f"State must have shape ({map.dim},), got {x.shape}")
    try:
        return _integrate(map, x.copy(), (map.dim,))
    except IntegrationError as e:
        raise IntegrationError(f"{e} at x={x.tolist()}", location=x.tolist()) from e


def step_batch(map: SampledMap, states) -> np.ndarray:
    """
    Advance every row of an (L, n) array by one sampling interval.

    All states are integrated together as one stacked system; if that
    fails, states are retried one by one to locate the offending index.

    Raises:
        IntegrationError: With .index set to the first failing state
    """
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[1] != map.dim:
        raise ValueError(f"States must have shape (L, {map.dim}), got {states.shape}")
    if states.shape[0] == 0:
        return states.copy()

    try:
        return _integrate(map, states.ravel().copy(), states.shape).reshape(states.shape)
    except IntegrationError:
        logger.debug("Stacked integration failed, retrying %d states individually", len(states))

    out = np.empty_like(states)
    for i, x in enumerate(states):
        try:
            out[i] = step(map, x)
        except IntegrationError as e:
            raise IntegrationError(
                f"State {i}: {e}", index=i, location=x.tolist()
            ) from e
    return out


def rk4_flow(vector_field: VectorField, x, dt: float, substeps: int = 10_000) -> np.ndarray:
    """
    Classical fixed-step RK4 flow over dt, used as a reference oracle.

    Works on a single state or an (L, n) batch.
    """
    if substeps < 1:
        raise ValueError(f"substeps must be positive, got {substeps}")
    y = np.array(x, dtype=float)
    h = dt / substeps
    f = vector_field.eval
    for _ in range(substeps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def linear_flow_matrix(map: SampledMap) -> np.ndarray:
    """
    Exact transition matrix expm(F dt) of a linear sampled map.

    Raises:
        ValueError: If the underlying field is not a registered linear system
    """
    if map.field.name != "linear" or "F" not in map.field.params:
        raise ValueError(f"Exact flow is only available for linear systems, got {map.field.name!r}")
    F = np.asarray(map.field.params["F"], dtype=float)
    return expm(F * map.dt)
