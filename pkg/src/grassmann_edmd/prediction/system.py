"""
Koopman linear systems and state prediction.

A Koopman linear system relative to a basis consists of the compression
K, the lift into that basis and the coordinate matrix Pi:

    z(0) = lift(x0),    z(t+1) = K^T z(t),    x_hat(t) = Pi z(t).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from grassmann_edmd.dictionary.observables import Dictionary
from grassmann_edmd.dynamics.data import Trajectory
from grassmann_edmd.edmd.compression import CompressionMatrix, change_of_basis_compression
from grassmann_edmd.edmd.transform import (
    TransformedModel,
    extend_basis,
    reduced_coordinate_matrix,
    subspace_compression,
)
from grassmann_edmd.manifold.stiefel import as_stiefel


@dataclass(frozen=True)
class KoopmanLinearSystem:
    """
    Lifted linear recursion with state read-out.

    Attributes:
        K: l x l compression matrix
        lift_fn: Maps an (L, n) batch of states to the l x L lifted matrix
        Pi: n x l coordinate matrix
        basis: Label of the basis the system is expressed in
    """

    K: np.ndarray
    lift_fn: Callable[[np.ndarray], np.ndarray]
    Pi: np.ndarray
    basis: str = "B"

    def __post_init__(self):
        K = np.asarray(self.K.K if isinstance(self.K, CompressionMatrix) else self.K, dtype=float)
        Pi = np.asarray(self.Pi, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"K must be square, got shape {K.shape}")
        if Pi.ndim != 2 or Pi.shape[1] != K.shape[0]:
            raise ValueError(f"Pi must be n x {K.shape[0]}, got shape {Pi.shape}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "Pi", Pi)

    @property
    def size(self) -> int:
        return self.K.shape[0]

    @property
    def n(self) -> int:
        return self.Pi.shape[0]

    def lift(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.lift_fn(x.reshape(1, -1))[:, 0]

    def rollout(self, initial_states, N: int) -> np.ndarray:
        """
        Lifted trajectories for a batch of initial states.

        Returns:
            (N+1) x l x J array
        """
        if N < 0:
            raise ValueError(f"Horizon must be non-negative, got {N}")
        X0 = np.atleast_2d(np.asarray(initial_states, dtype=float))
        Z = np.empty((N + 1, self.size, X0.shape[0]))
        Z[0] = self.lift_fn(X0)
        KT = self.K.T
        with np.errstate(over="ignore", invalid="ignore"):
            for t in range(N):
                Z[t + 1] = KT @ Z[t]
        return Z

    def predict(self, initial_states, N: int) -> np.ndarray:
        """
        State predictions for a batch of initial states.

        Returns:
            J x (N+1) x n array
        """
        Z = self.rollout(initial_states, N)
        with np.errstate(over="ignore", invalid="ignore"):
            X = np.einsum("nl,tlj->jtn", self.Pi, Z)
        return X


def rollout_lifted(kls: KoopmanLinearSystem, x0, N: int) -> np.ndarray:
    """
    Lifted trajectory z(0..N) of a single initial state.

    Overflow yields IEEE infinities rather than an exception.

    Returns:
        (N+1) x l array
    """
    return kls.rollout(np.asarray(x0, dtype=float).reshape(1, -1), N)[:, :, 0]


def predict_states(kls: KoopmanLinearSystem, x0, N: int) -> Trajectory:
    """Predicted trajectory x_hat(t) = Pi z(t), t = 0..N."""
    return Trajectory(kls.predict(np.asarray(x0, dtype=float).reshape(1, -1), N)[0])


def full_system(dictionary: Dictionary, compression) -> KoopmanLinearSystem:
    """Koopman linear system relative to the dictionary basis B."""
    return KoopmanLinearSystem(
        K=compression,
        lift_fn=dictionary.lift_batch,
        Pi=dictionary.coordinate_matrix().Pi,
        basis="B",
    )


def transformed_system(tm: TransformedModel, dictionary: Dictionary) -> KoopmanLinearSystem:
    """
    Full-space Koopman linear system relative to the orthonormalised basis E.

    Lift P Psi(x), compression K_E = G_E S_E^T, coordinate matrix [Q11 0].
    """
    P = tm.P

    def lift_fn(states: np.ndarray) -> np.ndarray:
        return P @ dictionary.lift_batch(states)

    return KoopmanLinearSystem(
        K=tm.A_E, lift_fn=lift_fn, Pi=reduced_coordinate_matrix(tm, tm.d), basis="E"
    )


def reduced_system(tm: TransformedModel, dictionary: Dictionary, U) -> KoopmanLinearSystem:
    """
    Koopman linear system on W = T (+) span(U) relative to E~.

    Lift blkdiag(I_s, U^T) P Psi(x), compression Ubar^T G_E S_E^T Ubar,
    coordinate matrix [Q11 0].
    """
    point = as_stiefel(U)
    Ubar = extend_basis(point.U, tm.s)
    reduced_lift = Ubar.T @ tm.P

    def lift_fn(states: np.ndarray) -> np.ndarray:
        return reduced_lift @ dictionary.lift_batch(states)

    return KoopmanLinearSystem(
        K=subspace_compression(tm, point),
        lift_fn=lift_fn,
        Pi=reduced_coordinate_matrix(tm, point.r),
        basis="E~",
    )


def in_basis(kls: KoopmanLinearSystem, P) -> KoopmanLinearSystem:
    """
    Express a Koopman linear system in a new basis with change-of-basis P.

    z_new = P z, K_new = (P K^T P^{-1})^T, Pi_new = Pi P^{-1}.
    """
    P = np.asarray(P, dtype=float)
    K_new = change_of_basis_compression(kls.K, P)
    Pi_new = np.linalg.solve(P.T, kls.Pi.T).T
    base_lift = kls.lift_fn

    def lift_fn(states: np.ndarray) -> np.ndarray:
        return P @ base_lift(states)

    return KoopmanLinearSystem(K=K_new, lift_fn=lift_fn, Pi=Pi_new, basis=f"{kls.basis}'")
