"""
Riemannian trust-region optimisation with a truncated CG inner solver.
"""

from grassmann_edmd.optimizer.config import TrustRegionConfig
from grassmann_edmd.optimizer.tcg import TCGResult, truncated_cg
from grassmann_edmd.optimizer.trace import (
    STATUS_CONVERGED,
    STATUS_MAX_ITERS,
    STATUS_NUMERICAL_FAILURE,
    STATUS_RADIUS_COLLAPSE,
    IterationRecord,
    OptimizationTrace,
)
from grassmann_edmd.optimizer.trust_region import optimize, trust_region

__all__ = [
    "TrustRegionConfig",
    "IterationRecord",
    "OptimizationTrace",
    "STATUS_CONVERGED",
    "STATUS_MAX_ITERS",
    "STATUS_NUMERICAL_FAILURE",
    "STATUS_RADIUS_COLLAPSE",
    "TCGResult",
    "truncated_cg",
    "trust_region",
    "optimize",
]
