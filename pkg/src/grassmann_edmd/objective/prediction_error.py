"""
N-step prediction error of the reduced Koopman linear system.

For a subspace spanned by the columns of U (in the tail coordinates of the
orthonormalised basis E) and test states x_1, ..., x_J:

    g_N(U) = 1/(2JN) sum_i sum_{k=1..N} ||x(k, x_i) - [Q11 0] z_i(k)||^2,

    z_i(0) = Ubar^T P Psi(x_i),    z_i(k+1) = K^T z_i(k),    K = Ubar^T A_E Ubar.

The value only depends on span(U). The gradient is computed for the
smooth extension (U as a free d x r matrix) by a backward sweep through
the lifted recursion.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from grassmann_edmd.dictionary.observables import Dictionary
from grassmann_edmd.dynamics.data import rollout_truth_batch
from grassmann_edmd.dynamics.flow import SampledMap
from grassmann_edmd.edmd.transform import (
    TransformedModel,
    extend_basis,
    reduced_coordinate_matrix,
)
from grassmann_edmd.manifold.stiefel import as_stiefel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObjectiveValue:
    """
    Objective value and its per-trajectory terms.

    Attributes:
        value: g_N(U), the mean of breakdown
        breakdown: (J,) terms 1/(2N) sum_k ||x(k, x_i) - x_hat(k, x_i)||^2
    """

    value: float
    breakdown: np.ndarray


@dataclass(frozen=True)
class ObjectiveContext:
    """
    Immutable data of the prediction-error objective.

    Attributes:
        tm: Transformed model (basis E)
        test_states: (J, n) initial states
        truth: (J, N+1, n) ground-truth trajectories
        Z0: (M, J) transformed lifts P Psi(x_i)
        r: Subspace dimension
    """

    tm: TransformedModel
    test_states: np.ndarray
    truth: np.ndarray
    Z0: np.ndarray
    r: int

    def __post_init__(self):
        J = self.test_states.shape[0]
        if J < 1:
            raise ValueError("Objective needs at least one test state")
        if self.truth.ndim != 3 or self.truth.shape[0] != J or self.truth.shape[1] < 2:
            raise ValueError(f"Truth must be J x (N+1) x n with N >= 1, got {self.truth.shape}")
        if self.Z0.shape != (self.tm.M, J):
            raise ValueError(f"Z0 must be {self.tm.M} x {J}, got {self.Z0.shape}")
        if not 1 <= self.r <= self.tm.d:
            raise ValueError(f"Need 1 <= r <= d = {self.tm.d}, got r={self.r}")

    @property
    def J(self) -> int:
        return self.test_states.shape[0]

    @property
    def N(self) -> int:
        return self.truth.shape[1] - 1

    @property
    def s(self) -> int:
        return self.tm.s

    @property
    def d(self) -> int:
        return self.tm.d

    @property
    def shape(self) -> tuple[int, int]:
        """Shape d x r of the optimisation variable."""
        return (self.d, self.r)

    @property
    def Pi_reduced(self) -> np.ndarray:
        return reduced_coordinate_matrix(self.tm, self.r)

    def _forward(self, U: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Lifted rollouts Z (N+1, s+r, J), residuals E (N+1, n, J) and Ubar."""
        Ubar = extend_basis(U, self.s)
        KT = Ubar.T @ self.tm.A_E.T @ Ubar
        C = self.Pi_reduced
        Z = np.empty((self.N + 1, self.s + self.r, self.J))
        Z[0] = Ubar.T @ self.Z0
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(self.N):
                Z[k + 1] = KT @ Z[k]
            E = np.einsum("nl,klj->knj", C, Z) - self.truth.transpose(1, 2, 0)
        return Z, E, Ubar

    def terms(self, U) -> np.ndarray:
        """Per-trajectory terms 1/(2N) sum_{k=1..N} ||e_i(k)||^2."""
        _, E, _ = self._forward(np.asarray(U, dtype=float))
        with np.errstate(over="ignore", invalid="ignore"):
            return np.sum(E[1:] ** 2, axis=(0, 1)) / (2.0 * self.N)

    def value(self, U) -> float:
        """Smooth extension of g_N at an arbitrary d x r matrix."""
        return float(np.mean(self.terms(U)))

    def gradient(self, U) -> np.ndarray:
        """
        Euclidean gradient of the smooth extension at a d x r matrix.

        With B = K^T, residuals E_k = C Z_k - X_k and c = 1/(2JN):

            L_N = 2c C^T E_N,   L_k = 2c C^T E_k + B^T L_{k+1},   L_0 = B^T L_1,
            G   = sum_{k=0..N-1} L_{k+1} Z_k^T,
            grad_Ubar = A^T Ubar G^T + A Ubar G + Z0 L_0^T,

        and the gradient is the lower-right d x r block of grad_Ubar.
        """
        U = np.asarray(U, dtype=float)
        Z, E, Ubar = self._forward(U)
        A = self.tm.A_E
        B = Ubar.T @ A.T @ Ubar
        C = self.Pi_reduced
        c2 = 1.0 / (self.J * self.N)

        with np.errstate(over="ignore", invalid="ignore"):
            lam = c2 * (C.T @ E[self.N])
            G = lam @ Z[self.N - 1].T
            for k in range(self.N - 1, 0, -1):
                lam = c2 * (C.T @ E[k]) + B.T @ lam
                G += lam @ Z[k - 1].T
            lam0 = B.T @ lam
            grad_bar = A.T @ Ubar @ G.T + A @ Ubar @ G + self.Z0 @ lam0.T
        return grad_bar[self.s :, self.s :]


def context_from_truth(
    tm: TransformedModel, dictionary: Dictionary, truth, r: int
) -> ObjectiveContext:
    """
    Build an objective context from precomputed truth trajectories.

    Args:
        tm: Transformed model
        dictionary: Dictionary the model was trained with
        truth: (J, N+1, n) trajectories; row 0 holds the test states
        r: Subspace dimension
    """
    truth = np.asarray(truth, dtype=float)
    if truth.ndim != 3 or truth.shape[2] != dictionary.n:
        raise ValueError(f"Truth must be J x (N+1) x {dictionary.n}, got {truth.shape}")
    if dictionary.M != tm.M:
        raise ValueError(f"Dictionary has {dictionary.M} observables, model has {tm.M}")
    test_states = truth[:, 0, :].copy()
    return ObjectiveContext(
        tm=tm,
        test_states=test_states,
        truth=truth,
        Z0=tm.P @ dictionary.lift_batch(test_states),
        r=int(r),
    )


def build_context(
    tm: TransformedModel,
    dictionary: Dictionary,
    map: SampledMap,
    test_states,
    N: int,
    r: int,
) -> ObjectiveContext:
    """
    Integrate the test trajectories and assemble the objective context.

    Raises:
        IntegrationError: If a test trajectory cannot be integrated
    """
    X0 = np.atleast_2d(np.asarray(test_states, dtype=float))
    if X0.shape[0] == 0:
        raise ValueError("Objective needs at least one test state")
    logger.info("Integrating %d test trajectories (N=%d)", X0.shape[0], N)
    return context_from_truth(tm, dictionary, rollout_truth_batch(map, X0, N), r)


def evaluate(ctx: ObjectiveContext, U) -> ObjectiveValue:
    """
    g_N at a Stiefel point.

    Raises:
        OffManifoldError: If U is not orthonormal within tolerance
    """
    point = as_stiefel(U)
    if point.U.shape != ctx.shape:
        raise ValueError(f"U must be {ctx.shape[0]} x {ctx.shape[1]}, got {point.U.shape}")
    terms = ctx.terms(point.U)
    return ObjectiveValue(value=float(np.mean(terms)), breakdown=terms)


def euclidean_gradient(ctx: ObjectiveContext, U) -> np.ndarray:
    """
    Euclidean gradient of the smooth extension of g_N at a Stiefel point.

    Raises:
        OffManifoldError: If U is not orthonormal within tolerance
    """
    point = as_stiefel(U)
    if point.U.shape != ctx.shape:
        raise ValueError(f"U must be {ctx.shape[0]} x {ctx.shape[1]}, got {point.U.shape}")
    return ctx.gradient(point.U)
