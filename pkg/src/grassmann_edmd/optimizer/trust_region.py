"""
Riemannian trust-region method on the Grassmann manifold.

Iterates are Stiefel representatives, steps are horizontal vectors
computed by truncated CG and mapped back with the QR retraction.
"""

from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np

from grassmann_edmd.errors import NumericalError
from grassmann_edmd.manifold.stiefel import (
    HorizontalVector,
    StiefelPoint,
    as_stiefel,
    metric,
    project_horizontal,
    retract,
)
from grassmann_edmd.objective.riemannian import (
    Objective,
    hvp_from_gradient,
)
from grassmann_edmd.optimizer.config import TrustRegionConfig
from grassmann_edmd.optimizer.tcg import STOP_NON_FINITE, truncated_cg
from grassmann_edmd.optimizer.trace import (
    STATUS_CONVERGED,
    STATUS_MAX_ITERS,
    STATUS_NUMERICAL_FAILURE,
    STATUS_RADIUS_COLLAPSE,
    IterationRecord,
    OptimizationTrace,
)

logger = logging.getLogger(__name__)

ValueFn = Callable[[StiefelPoint], float]
GradFn = Callable[[StiefelPoint], HorizontalVector]
HvpFn = Callable[[StiefelPoint, HorizontalVector], HorizontalVector]

# Floor of the predicted decrease in the acceptance ratio
RHO_DENOMINATOR_FLOOR = 1e-15

# Tolerated mismatch of the startup gradient spot-check
GRADIENT_CHECK_TOL = 1e-4


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def _spot_check_gradient(value_fn: ValueFn, grad_fn: GradFn, point: StiefelPoint) -> float:
    """Relative mismatch between <grad, V> and a central difference along a random V."""
    rng = np.random.Generator(np.random.PCG64(0))
    V = project_horizontal(point, rng.standard_normal(point.U.shape))
    norm_v = V.norm()
    if norm_v == 0.0:
        return 0.0
    V = V * (1.0 / norm_v)
    t = 1e-6
    fd = (value_fn(retract(point, V * t)) - value_fn(retract(point, V * -t))) / (2.0 * t)
    analytic = metric(grad_fn(point), V)
    return abs(fd - analytic) / max(abs(analytic), 1e-12)


def trust_region(
    value_fn: ValueFn,
    grad_fn: GradFn,
    hvp_fn: HvpFn,
    U0,
    config: TrustRegionConfig | None = None,
) -> tuple[StiefelPoint, OptimizationTrace]:
    """
    Minimise a Grassmann objective from U0.

    Args:
        value_fn: Objective value at a Stiefel point
        grad_fn: Riemannian gradient (horizontal) at a Stiefel point
        hvp_fn: Riemannian Hessian-vector product at a Stiefel point
        U0: Starting Stiefel representative
        config: Solver settings; unset radii are derived from r

    Returns:
        (U*, trace). U* is the last accepted iterate; trace.status is
        "converged", "max-iters", "radius-collapse" (every proposal
        rejected until the radius vanished) or "numerical-failure".
        Non-finite or failing callbacks never raise.
    """
    point = as_stiefel(U0)
    config = (config or TrustRegionConfig()).for_rank(point.r)
    delta = config.delta0
    trace = OptimizationTrace()

    try:
        fx = float(value_fn(point))
        grad = grad_fn(point)
        gradnorm = grad.norm()
    except NumericalError as e:
        logger.error("Objective failed at the starting point: %s", e)
        trace.status = STATUS_NUMERICAL_FAILURE
        return point, trace

    trace.append(IterationRecord(0, fx, gradnorm, delta, float("nan"), 0.0, False))
    if not _finite(fx, gradnorm):
        logger.error("Non-finite objective or gradient at the starting point")
        trace.status = STATUS_NUMERICAL_FAILURE
        return point, trace

    if config.debug_check:
        mismatch = _spot_check_gradient(value_fn, grad_fn, point)
        if mismatch > GRADIENT_CHECK_TOL:
            logger.warning("Gradient callback disagrees with finite differences (%.3e)", mismatch)
        else:
            logger.debug("Gradient spot-check passed (%.3e)", mismatch)

    logger.info(
        "Trust region start: d=%d, r=%d, f=%.6e, |grad|=%.3e, delta0=%.3g",
        point.d,
        point.r,
        fx,
        gradnorm,
        delta,
    )

    status = STATUS_MAX_ITERS
    for it in range(1, config.max_outer_iters + 1):
        if gradnorm <= config.grad_tol:
            status = STATUS_CONVERGED
            break

        current = point
        try:
            tcg = truncated_cg(grad, lambda V: hvp_fn(current, V), delta, config)
        except NumericalError as e:
            logger.error("Hessian-vector product failed: %s", e)
            status = STATUS_NUMERICAL_FAILURE
            break
        if tcg.stop_reason == STOP_NON_FINITE:
            logger.error("Non-finite Hessian-vector product at iteration %d", it)
            status = STATUS_NUMERICAL_FAILURE
            break

        step_norm = tcg.step.norm()
        predicted = tcg.model_decrease(grad)
        try:
            candidate = retract(point, tcg.step)
            f_new = float(value_fn(candidate))
        except (NumericalError, np.linalg.LinAlgError) as e:
            logger.debug("Proposal rejected: %s", e)
            candidate, f_new = None, float("nan")

        accepted = False
        if not math.isfinite(f_new):
            rho = float("nan")
            delta *= config.shrink
        else:
            rho = (fx - f_new) / max(predicted, RHO_DENOMINATOR_FLOOR)
            model_decreased = predicted > 0.0
            if not model_decreased or rho < config.rho_shrink:
                delta *= config.shrink
            elif rho > config.rho_expand and tcg.hit_boundary:
                delta = min(config.expand * delta, config.delta_max)
            accepted = model_decreased and rho > config.rho_accept and f_new < fx

        if accepted:
            point = candidate
            fx = f_new
            try:
                grad = grad_fn(point)
                gradnorm = grad.norm()
            except NumericalError as e:
                logger.error("Gradient failed at iteration %d: %s", it, e)
                gradnorm = float("nan")

        trace.append(
            IterationRecord(
                iter=it,
                value=fx,
                gradnorm=gradnorm,
                delta=delta,
                rho=rho,
                step_norm=step_norm,
                accepted=accepted,
                tcg_iters=tcg.iterations,
                tcg_stop=tcg.stop_reason,
            )
        )
        logger.debug(
            "iter %4d  f=%.10e  |grad|=%.3e  delta=%.3e  rho=%.3e  %s  (tCG: %d, %s)",
            it,
            fx,
            gradnorm,
            delta,
            rho,
            "acc" if accepted else "REJ",
            tcg.iterations,
            tcg.stop_reason,
        )

        if not math.isfinite(gradnorm):
            status = STATUS_NUMERICAL_FAILURE
            break
        if delta < np.finfo(float).eps * config.delta_max:
            logger.warning("Trust-region radius collapsed at iteration %d", it)
            status = STATUS_RADIUS_COLLAPSE
            break
    else:
        if gradnorm <= config.grad_tol:
            status = STATUS_CONVERGED

    trace.status = status
    logger.info(
        "Trust region finished: %s after %d iterations (%d accepted), f=%.6e, |grad|=%.3e",
        status,
        trace.iterations,
        trace.accepted_steps,
        fx,
        gradnorm,
    )
    return point, trace


class _ObjectiveCallbacks:
    """value/grad/hvp callbacks on Stiefel points with the Euclidean gradient cached per point."""

    def __init__(self, objective: Objective):
        self.objective = objective
        self._point: StiefelPoint | None = None
        self._egrad: np.ndarray | None = None

    def _euclidean_gradient(self, point: StiefelPoint) -> np.ndarray:
        if self._point is not point:
            self._egrad = self.objective.gradient(point.U)
            self._point = point
        return self._egrad

    def value(self, point: StiefelPoint) -> float:
        return self.objective.value(point.U)

    def grad(self, point: StiefelPoint) -> HorizontalVector:
        return project_horizontal(point, self._euclidean_gradient(point))

    def hvp(self, point: StiefelPoint, V: HorizontalVector) -> HorizontalVector:
        return hvp_from_gradient(self.objective, point, V.V, self._euclidean_gradient(point))


def optimize(
    objective: Objective, U0, config: TrustRegionConfig | None = None
) -> tuple[StiefelPoint, OptimizationTrace]:
    """Run trust_region with callbacks derived from an objective's value and Euclidean gradient."""
    callbacks = _ObjectiveCallbacks(objective)
    return trust_region(callbacks.value, callbacks.grad, callbacks.hvp, U0, config)


