"""
Steihaug-Toint truncated conjugate gradient for the trust-region subproblem

    min_eta  <g, eta> + 1/2 <eta, H eta>   subject to  ||eta|| <= delta

on the horizontal space at the current iterate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from grassmann_edmd.manifold.stiefel import HorizontalVector, metric
from grassmann_edmd.optimizer.config import TrustRegionConfig

STOP_NEGATIVE_CURVATURE = "negative curvature"
STOP_EXCEEDED_TR = "exceeded trust region"
STOP_TARGET_LINEAR = "reached target residual (linear)"
STOP_TARGET_SUPERLINEAR = "reached target residual (superlinear)"
STOP_MODEL_INCREASED = "model increased"
STOP_MAX_INNER = "maximum inner iterations"
STOP_NON_FINITE = "non-finite curvature"

BOUNDARY_STOPS = (STOP_NEGATIVE_CURVATURE, STOP_EXCEEDED_TR)


@dataclass(frozen=True)
class TCGResult:
    """
    Attributes:
        step: Horizontal step eta with ||eta|| <= delta
        Hstep: Model Hessian applied to eta (accumulated, not re-evaluated)
        iterations: Inner iterations performed
        stop_reason: One of the STOP_* strings
        cauchy: True if the Cauchy step replaced a zero step
    """

    step: HorizontalVector
    Hstep: HorizontalVector
    iterations: int
    stop_reason: str
    cauchy: bool = False

    @property
    def hit_boundary(self) -> bool:
        return self.stop_reason in BOUNDARY_STOPS

    def model_decrease(self, grad: HorizontalVector) -> float:
        """Predicted decrease -(<g, eta> + 1/2 <eta, H eta>)."""
        return -(metric(grad, self.step) + 0.5 * metric(self.step, self.Hstep))


def _cauchy_step(
    grad: HorizontalVector,
    hvp_fn: Callable[[HorizontalVector], HorizontalVector],
    delta: float,
    iterations: int,
    stop_reason: str,
) -> TCGResult:
    norm_g = grad.norm()
    Hg = hvp_fn(grad)
    g_Hg = metric(grad, Hg)
    tau = 1.0 if g_Hg <= 0.0 else min(norm_g**3 / (delta * g_Hg), 1.0)
    scale = -tau * delta / norm_g
    return TCGResult(grad * scale, Hg * scale, iterations, stop_reason, cauchy=True)


def truncated_cg(
    grad: HorizontalVector,
    hvp_fn: Callable[[HorizontalVector], HorizontalVector],
    delta: float,
    config: TrustRegionConfig | None = None,
) -> TCGResult:
    """
    Approximately minimise the quadratic model inside the trust region.

    Iterations stop on negative curvature or when the radius would be
    exceeded (the step then lands on the boundary), when the model value
    stops decreasing, or when ||r|| <= ||g|| min(kappa, ||g||^theta).
    A zero step is replaced by the Cauchy step.

    Args:
        grad: Riemannian gradient (horizontal)
        hvp_fn: Hessian-vector product at the same point
        delta: Trust-region radius
        config: Supplies kappa, theta and the inner iteration cap

    Returns:
        TCGResult with a horizontal step of norm <= delta
    """
    config = config or TrustRegionConfig()
    anchor = grad.anchor
    max_inner = config.tcg_max_inner or max(1, anchor.horizontal_dim)

    g = grad.V
    eta = np.zeros_like(g)
    Heta = np.zeros_like(g)
    r = g.copy()
    r_r = float(np.sum(r * r))
    norm_r0 = np.sqrt(r_r)
    if norm_r0 == 0.0:
        zero = HorizontalVector.zeros(anchor)
        return TCGResult(zero, zero, 0, STOP_TARGET_SUPERLINEAR)

    e_Pe = 0.0
    e_Pd = 0.0
    d_Pd = r_r
    direction = -r
    model_value = 0.0
    stop = STOP_MAX_INNER
    target = norm_r0 * min(norm_r0**config.theta, config.kappa)

    j = 0
    for j in range(1, max_inner + 1):
        Hd = hvp_fn(HorizontalVector(direction, anchor)).V
        d_Hd = float(np.sum(direction * Hd))
        if not np.isfinite(d_Hd):
            stop = STOP_NON_FINITE
            break

        alpha = r_r / d_Hd if d_Hd > 0.0 else 0.0
        e_Pe_new = e_Pe + 2.0 * alpha * e_Pd + alpha**2 * d_Pd
        if d_Hd <= 0.0 or e_Pe_new >= delta**2:
            tau = (-e_Pd + np.sqrt(e_Pd * e_Pd + d_Pd * (delta**2 - e_Pe))) / d_Pd
            eta = eta + tau * direction
            Heta = Heta + tau * Hd
            stop = STOP_NEGATIVE_CURVATURE if d_Hd <= 0.0 else STOP_EXCEEDED_TR
            break

        new_eta = eta + alpha * direction
        new_Heta = Heta + alpha * Hd
        new_model_value = float(np.sum(new_eta * g) + 0.5 * np.sum(new_eta * new_Heta))
        if new_model_value >= model_value:
            stop = STOP_MODEL_INCREASED
            break
        e_Pe = e_Pe_new
        eta = new_eta
        Heta = new_Heta
        model_value = new_model_value

        r = r + alpha * Hd
        r_r_old = r_r
        r_r = float(np.sum(r * r))
        if np.sqrt(r_r) <= target:
            linear = config.kappa < norm_r0**config.theta
            stop = STOP_TARGET_LINEAR if linear else STOP_TARGET_SUPERLINEAR
            break

        beta = r_r / r_r_old
        direction = -r + beta * direction
        e_Pd = beta * (e_Pd + alpha * d_Pd)
        d_Pd = r_r + beta * beta * d_Pd

    # Rounding in the boundary step can overshoot the radius
    norm_eta = float(np.linalg.norm(eta))
    if norm_eta > delta:
        eta = eta * (delta / norm_eta)
        Heta = Heta * (delta / norm_eta)

    if stop != STOP_NON_FINITE and norm_eta == 0.0:
        return _cauchy_step(grad, hvp_fn, delta, j, stop)
    return TCGResult(HorizontalVector(eta, anchor), HorizontalVector(Heta, anchor), j, stop)
