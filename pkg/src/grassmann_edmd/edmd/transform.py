"""
QR change of basis and subspace compressions.

With the thin QR decomposition G_B^T = Q R, the basis E obtained through
P = R^{-T} has an identity Gram matrix: G_E = P G_B = Q^T and
G_E G_E^T = I_M. Compressions onto W = T (+) S with S spanned by the
columns of U (in the coordinates of the tail of E) then need no solve:

    K_E~ = Ubar^T G_E S_E^T Ubar,    Ubar = blkdiag(I_s, U).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from grassmann_edmd.edmd.compression import CompressionMatrix, numerical_rank, rank_error
from grassmann_edmd.edmd.data import DataMatrices
from grassmann_edmd.manifold.stiefel import as_stiefel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransformedModel:
    """
    EDMD model relative to the orthonormalised basis E.

    Attributes:
        G_E: M x L, equal to Q^T
        S_E: M x L, equal to P S_B
        P: M x M change of basis R^{-T}
        P_inv: M x M, equal to R^T (lower triangular)
        Q11: n x n, equal to R_11^T
        A_E: M x M cached product G_E S_E^T (= K_E)
        s: Protected head size
        n: State dimension
    """

    G_E: np.ndarray
    S_E: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    Q11: np.ndarray
    A_E: np.ndarray
    s: int
    n: int

    @property
    def M(self) -> int:
        return self.P.shape[0]

    @property
    def d(self) -> int:
        """Dimension M - s of the tail R in which subspaces are searched."""
        return self.M - self.s

    def gram_residual(self) -> float:
        """max |G_E G_E^T - I|."""
        return float(np.abs(self.G_E @ self.G_E.T - np.eye(self.M)).max())

    def full_compression(self) -> CompressionMatrix:
        """K_E = G_E S_E^T, the full-space compression relative to E."""
        return CompressionMatrix(self.A_E, basis="E")

    def transform_lift(self, lifted) -> np.ndarray:
        """Change lifted coordinates from B to E: P Psi (columns or a single vector)."""
        return self.P @ np.asarray(lifted, dtype=float)

    @classmethod
    def from_blocks(
        cls, G_E, S_E, P, P_inv, Q11, s: int, n: int, A_E=None
    ) -> TransformedModel:
        """Rebuild from stored matrices, recomputing the cached product if needed."""
        G_E = np.asarray(G_E, dtype=float)
        S_E = np.asarray(S_E, dtype=float)
        A_E = G_E @ S_E.T if A_E is None else np.asarray(A_E, dtype=float)
        return cls(
            G_E=G_E,
            S_E=S_E,
            P=np.asarray(P, dtype=float),
            P_inv=np.asarray(P_inv, dtype=float),
            Q11=np.asarray(Q11, dtype=float),
            A_E=A_E,
            s=int(s),
            n=int(n),
        )


def qr_transform(dm: DataMatrices) -> TransformedModel:
    """
    Orthonormalise the data through the thin QR decomposition of G_B^T.

    The R factor is normalised to a non-negative diagonal so that P and
    all stored matrices are deterministic.

    Raises:
        RankDeficiencyError: If G_B does not have full row rank
    """
    M, L = dm.M, dm.L
    if L == 0:
        raise rank_error(0, M, L)
    Q, R = qr(dm.G.T, mode="economic")
    rank = numerical_rank(np.diag(R))
    if rank < M:
        raise rank_error(rank, M, L)

    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q = Q * signs
    R = signs[:, None] * R

    P = solve_triangular(R, np.eye(M), trans="T")
    G_E = Q.T
    S_E = solve_triangular(R, dm.S, trans="T")
    model = TransformedModel(
        G_E=G_E,
        S_E=S_E,
        P=P,
        P_inv=R.T.copy(),
        Q11=R[: dm.n, : dm.n].T.copy(),
        A_E=G_E @ S_E.T,
        s=dm.s,
        n=dm.n,
    )
    logger.info("QR transform: M=%d, L=%d, Gram residual %.3e", M, L, model.gram_residual())
    return model


def extend_basis(U, s: int) -> np.ndarray:
    """Ubar = blkdiag(I_s, U)."""
    U = np.asarray(U, dtype=float)
    d, r = U.shape
    Ubar = np.zeros((s + d, s + r))
    Ubar[:s, :s] = np.eye(s)
    Ubar[s:, s:] = U
    return Ubar


def subspace_compression(tm: TransformedModel, U) -> CompressionMatrix:
    """
    Compression onto W = T (+) span(U) relative to the reduced basis E~.

    Args:
        tm: Transformed model
        U: (M - s) x r Stiefel point (or orthonormal array)

    Raises:
        OffManifoldError: If U is not orthonormal within tolerance
    """
    point = as_stiefel(U)
    if point.d != tm.d:
        raise ValueError(f"U must have {tm.d} rows (M - s), got {point.d}")
    Ubar = extend_basis(point.U, tm.s)
    return CompressionMatrix(Ubar.T @ tm.A_E @ Ubar, basis="E~")


def reduced_coordinate_matrix(tm: TransformedModel, r: int) -> np.ndarray:
    """
    Coordinate matrix [Q11 0] (n x (s + r)) relative to E~.

    It does not depend on the chosen subspace, only on its dimension.

    Raises:
        ValueError: If s < n
    """
    if tm.s < tm.n:
        raise ValueError(f"Reduced coordinate matrix needs s >= n, got s={tm.s}, n={tm.n}")
    if r < 0:
        raise ValueError(f"Subspace dimension must be non-negative, got {r}")
    Pi = np.zeros((tm.n, tm.s + r))
    Pi[:, : tm.n] = tm.Q11
    return Pi


def coordinate_krylov_basis(tm: TransformedModel, r: int, tol: float = 1e-10) -> np.ndarray:
    """
    Orthonormal d x r basis of the tail directions that drive the coordinates.

    Columns are taken in the order A_ts, A_tt A_ts, A_tt^2 A_ts, ... with
    A_ts = A_E[s:, :s] and A_tt = A_E[s:, s:], i.e. the tail observables
    entering the coordinate prediction after 1, 2, 3, ... steps. Directions
    already covered are skipped; unit vectors complete the basis when the
    Krylov sequence is exhausted.

    Raises:
        ValueError: If r is not in 1..d
    """
    s, d = tm.s, tm.d
    if not 1 <= r <= d:
        raise ValueError(f"Need 1 <= r <= d = {d}, got r={r}")
    A_ts = tm.A_E[s:, :s]
    A_tt = tm.A_E[s:, s:]

    blocks = [A_ts]
    for _ in range(-(-r // s)):
        block = blocks[-1]
        norms = np.linalg.norm(block, axis=0)
        block = block / np.where(norms > 0.0, norms, 1.0)
        blocks.append(A_tt @ block)
    candidates = np.hstack(blocks + [np.eye(d)])

    basis = np.zeros((d, 0))
    for v in candidates.T:
        norm = np.linalg.norm(v)
        if norm == 0.0:
            continue
        w = v / norm
        for _ in range(2):
            w = w - basis @ (basis.T @ w)
        if np.linalg.norm(w) > tol:
            basis = np.column_stack([basis, w / np.linalg.norm(w)])
        if basis.shape[1] == r:
            break
    return basis
