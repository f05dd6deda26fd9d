"""
Rayleigh quotient benchmark objective.
"""

from __future__ import annotations

import numpy as np

from grassmann_edmd.manifold.stiefel import HorizontalVector, as_stiefel, project_horizontal


class RayleighQuotient:
    """
    f(U) = tr(U^T A U) for symmetric A.

    Minimisers span the eigenvectors of the r smallest eigenvalues, and the
    minimum is their sum.
    """

    def __init__(self, A):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if not np.allclose(A, A.T, atol=1e-12):
            raise ValueError("A must be symmetric")
        self.A = 0.5 * (A + A.T)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    def value(self, U) -> float:
        U = np.asarray(U, dtype=float)
        return float(np.trace(U.T @ self.A @ U))

    def gradient(self, U) -> np.ndarray:
        return 2.0 * self.A @ np.asarray(U, dtype=float)

    def riemannian_hessian(self, U, V) -> HorizontalVector:
        """Closed form 2 (I - U U^T)(A V - V U^T A U)."""
        point = as_stiefel(U)
        V = V.V if isinstance(V, HorizontalVector) else np.asarray(V, dtype=float)
        U = point.U
        return project_horizontal(point, 2.0 * (self.A @ V - V @ (U.T @ self.A @ U)))

    def minimum(self, r: int) -> tuple[float, np.ndarray]:
        """Optimal value and an orthonormal basis of the optimal subspace."""
        w, Q = np.linalg.eigh(self.A)
        return float(np.sum(w[:r])), Q[:, :r]
