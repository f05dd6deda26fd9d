"""
Compressions of the Koopman operator onto finite-dimensional subspaces.

All formulas that are usually written with explicit inverses are
evaluated through factorizations: pivoted QR for the EDMD least-squares
problem, Cholesky for Gram matrices of bilinear forms and LU for the
change of basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, qr, solve, solve_triangular

from grassmann_edmd.edmd.data import DataMatrices
from grassmann_edmd.errors import NotPositiveDefiniteError, RankDeficiencyError, SingularMatrixError

# Relative threshold on |R_ii| for the numerical rank of a data matrix
RANK_RTOL = 1e-10

# Condition number beyond which a change of basis is treated as singular
SINGULAR_COND = 1.0 / np.finfo(float).eps


@dataclass(frozen=True)
class CompressionMatrix:
    """
    Matrix K of a Koopman compression relative to a basis.

    The associated Koopman linear system is z(t+1) = K^T z(t).

    Attributes:
        K: Square compression matrix
        basis: "B" (dictionary), "E" (QR-orthonormalised) or "E~" (reduced)
    """

    K: np.ndarray
    basis: str = "B"

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"Compression matrix must be square, got shape {K.shape}")
        object.__setattr__(self, "K", K)

    @property
    def size(self) -> int:
        return self.K.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return koopman_eigenvalues(self.K)


def _matrix(K) -> np.ndarray:
    return K.K if isinstance(K, CompressionMatrix) else np.asarray(K, dtype=float)


def numerical_rank(diag_r: np.ndarray) -> int:
    """Rank from the diagonal of an R factor, threshold RANK_RTOL * max|R_ii|."""
    magnitudes = np.abs(diag_r)
    if magnitudes.size == 0 or magnitudes.max() == 0.0:
        return 0
    return int(np.count_nonzero(magnitudes > RANK_RTOL * magnitudes.max()))


def rank_error(rank: int, M: int, L: int) -> RankDeficiencyError:
    """Build the rank-deficiency error with remediation advice."""
    return RankDeficiencyError(
        f"Data matrix G has numerical rank {rank}, full row rank {M} required "
        f"(L={L}); increase the number of training pairs or lower the dictionary degree",
        rank=rank,
        expected=M,
    )


def full_edmd(dm: DataMatrices) -> CompressionMatrix:
    """
    EDMD compression K_B = (G G^T)^{-1} G S^T.

    Solved as the least-squares problem min ||G^T K - S^T||_F through a
    column-pivoted QR factorization of G^T.

    Raises:
        RankDeficiencyError: If G does not have full row rank
    """
    M, L = dm.M, dm.L
    if L == 0:
        raise rank_error(0, M, L)
    q, r, piv = qr(dm.G.T, mode="economic", pivoting=True)
    rank = min(numerical_rank(np.diag(r)), L)
    if rank < M:
        raise rank_error(rank, M, L)
    K = np.empty((M, M))
    K[piv] = solve_triangular(r, q.T @ dm.S.T)
    return CompressionMatrix(K, basis="B")


def bilinear_matrices_from_data(dm: DataMatrices) -> tuple[np.ndarray, np.ndarray]:
    """Gram matrix H = G G^T and cross matrix A = G S^T."""
    return dm.G @ dm.G.T, dm.G @ dm.S.T


def _cholesky(H: np.ndarray):
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"Gram matrix must be square, got shape {H.shape}")
    scale = max(np.abs(H).max(), 1.0) if H.size else 1.0
    if not np.allclose(H, H.T, rtol=0.0, atol=1e-10 * scale):
        raise NotPositiveDefiniteError("Gram matrix is not symmetric")
    try:
        return cho_factor(H)
    except LinAlgError as e:
        raise NotPositiveDefiniteError(
            f"Gram matrix is not positive definite; the bilinear form is degenerate ({e})"
        ) from e


def bilinear_compression(H, A) -> CompressionMatrix:
    """
    Compression K = H^{-1} A of a bilinear form with Gram matrix H.

    Raises:
        NotPositiveDefiniteError: If H is not symmetric positive definite
    """
    H = np.asarray(H, dtype=float)
    A = np.asarray(A, dtype=float)
    return CompressionMatrix(cho_solve(_cholesky(H), A), basis="B")


def subspace_bilinear_compression(H, A, Ubar) -> CompressionMatrix:
    """
    Compression on the subspace spanned by the columns of Ubar.

    K = (Ubar^T H Ubar)^{-1} Ubar^T A Ubar

    Raises:
        NotPositiveDefiniteError: If the reduced Gram matrix is singular
    """
    H = np.asarray(H, dtype=float)
    A = np.asarray(A, dtype=float)
    Ubar = np.asarray(Ubar, dtype=float)
    H_red = Ubar.T @ H @ Ubar
    H_red = 0.5 * (H_red + H_red.T)
    return CompressionMatrix(cho_solve(_cholesky(H_red), Ubar.T @ A @ Ubar), basis="E~")


def change_of_basis_compression(K_B, P) -> CompressionMatrix:
    """
    Compression relative to E given the compression relative to B.

    With the change-of-basis matrix P from B to E, K_E = (P K_B^T P^{-1})^T.

    Raises:
        SingularMatrixError: If P is not invertible
    """
    K_B = _matrix(K_B)
    P = np.asarray(P, dtype=float)
    if P.shape != K_B.shape:
        raise ValueError(f"P has shape {P.shape}, expected {K_B.shape}")
    cond = np.linalg.cond(P)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularMatrixError(f"Change-of-basis matrix is singular (cond={cond:.3e})")
    # (P K_B^T P^{-1})^T = P^{-T} K_B P^T
    return CompressionMatrix(solve(P.T, K_B @ P.T), basis="E")


def koopman_eigenvalues(K) -> np.ndarray:
    """Eigenvalues of a compression, sorted by decreasing modulus."""
    eigenvalues = np.linalg.eigvals(_matrix(K))
    return eigenvalues[np.argsort(-np.abs(eigenvalues), kind="stable")]
