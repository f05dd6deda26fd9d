"""
Exception hierarchy for grassmann-edmd.

Configuration problems, numerical failures and corrupt model files are
kept apart so that the CLI can map them onto distinct exit codes.
"""

from __future__ import annotations


class GrassmannEDMDError(Exception):
    """Base exception for all library errors."""

    pass


class ConfigError(GrassmannEDMDError, ValueError):
    """Invalid experiment or solver configuration."""

    pass


class NumericalError(GrassmannEDMDError):
    """A numerical routine could not produce a trustworthy result."""

    pass


class IntegrationError(NumericalError):
    """
    The ODE integrator failed to advance a state.

    Attributes:
        index: Position of the offending state in a batch (if known)
        location: Offending initial state (if known)
    """

    def __init__(self, message: str, index: int | None = None, location=None):
        super().__init__(message)
        self.index = index
        self.location = location


class RankDeficiencyError(NumericalError):
    """A data matrix does not have the required full row rank."""

    def __init__(self, message: str, rank: int, expected: int):
        super().__init__(message)
        self.rank = rank
        self.expected = expected


class NotPositiveDefiniteError(NumericalError):
    """A Gram matrix failed its Cholesky factorization."""

    pass


class SingularMatrixError(NumericalError):
    """A matrix that must be invertible is (numerically) singular."""

    pass


class OffManifoldError(NumericalError):
    """A matrix violates the Stiefel constraint U^T U = I beyond tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class OptimizationError(NumericalError):
    """
    The optimiser ended with a numerical failure.

    Attributes:
        trace: Iteration history up to the failure
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class ModelFileError(GrassmannEDMDError):
    """A model file is malformed, incomplete or fails its checksum."""

    pass
