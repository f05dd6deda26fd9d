"""
Trust-region solver configuration.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

from grassmann_edmd.errors import ConfigError


@dataclass(frozen=True)
class TrustRegionConfig:
    """Configuration for the Riemannian trust-region method."""

    # Initial and maximal radius (None: 0.1 * sqrt(r) and 2 * sqrt(r))
    delta0: float | None = None
    delta_max: float | None = None

    # Acceptance and radius update thresholds on rho
    rho_accept: float = 0.1
    rho_expand: float = 0.75
    rho_shrink: float = 0.25

    # Radius update factors
    shrink: float = 0.25
    expand: float = 2.0

    # Stopping
    max_outer_iters: int = 500
    grad_tol: float = 1e-6

    # Truncated CG (None: dimension of the horizontal space)
    tcg_max_inner: int | None = None
    kappa: float = 0.1
    theta: float = 1.0

    # Finite-difference spot-check of the gradient callback before iterating
    debug_check: bool = False

    def validate(self):
        """Validate configuration values."""
        if not 0.0 < self.rho_accept < self.rho_expand < 1.0:
            raise ConfigError(
                f"Need 0 < rho_accept < rho_expand < 1, got rho_accept={self.rho_accept}, "
                f"rho_expand={self.rho_expand}"
            )
        if not 0.0 < self.rho_shrink < 1.0:
            raise ConfigError(f"rho_shrink must lie in (0, 1), got {self.rho_shrink}")
        if self.delta0 is not None and not self.delta0 > 0.0:
            raise ConfigError(f"delta0 must be positive, got {self.delta0}")
        if self.delta_max is not None and not self.delta_max > 0.0:
            raise ConfigError(f"delta_max must be positive, got {self.delta_max}")
        if self.delta0 is not None and self.delta_max is not None and self.delta0 > self.delta_max:
            raise ConfigError(
                f"delta0 ({self.delta0}) cannot exceed delta_max ({self.delta_max})"
            )
        if not 0.0 < self.shrink < 1.0:
            raise ConfigError(f"shrink must lie in (0, 1), got {self.shrink}")
        if not self.expand > 1.0:
            raise ConfigError(f"expand must exceed 1, got {self.expand}")
        if self.max_outer_iters < 0:
            raise ConfigError("max_outer_iters cannot be negative")
        if not self.grad_tol > 0.0:
            raise ConfigError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.tcg_max_inner is not None and self.tcg_max_inner < 1:
            raise ConfigError(f"tcg_max_inner must be at least 1, got {self.tcg_max_inner}")
        if not 0.0 < self.kappa < 1.0:
            raise ConfigError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not self.theta > 0.0:
            raise ConfigError(f"theta must be positive, got {self.theta}")

    def for_rank(self, r: int) -> TrustRegionConfig:
        """Copy with unset radii filled in for subspace dimension r."""
        scale = math.sqrt(r)
        delta_max = 2.0 * scale if self.delta_max is None else self.delta_max
        delta0 = min(0.1 * scale, delta_max) if self.delta0 is None else self.delta0
        resolved = replace(self, delta0=delta0, delta_max=delta_max)
        resolved.validate()
        return resolved

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> TrustRegionConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown trust-region settings: {sorted(unknown)}")
        config = cls(**data)
        config.validate()
        return config
