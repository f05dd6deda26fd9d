"""
Stiefel and Grassmann geometry.

A point [U] of the Grassmann manifold Gr(r, d) is represented by an
orthonormal d x r matrix U (a point of the Stiefel manifold St(r, d)).
Tangent vectors of Gr(r, d) at [U] are represented by horizontal vectors
V with U^T V = 0, and the metric is the trace inner product tr(V1^T V2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from grassmann_edmd.errors import OffManifoldError, SingularMatrixError

# Maximum admissible |U^T U - I| entry for a Stiefel point
STIEFEL_TOL = 1e-8

# Drift beyond which a Stiefel point is silently re-orthonormalised
REORTHONORMALIZE_DRIFT = 1e-12

# Admissible |U^T V| entry (relative to max(1, ||V||)) for a horizontal vector
HORIZONTAL_TOL = 1e-8


def orthonormality_residual(U) -> float:
    """max |U^T U - I| over all entries."""
    U = np.asarray(U, dtype=float)
    return float(np.abs(U.T @ U - np.eye(U.shape[1])).max())


def qr_positive(A) -> np.ndarray:
    """
    Orthonormal factor of a thin QR decomposition with diag(R) >= 0.

    Raises:
        SingularMatrixError: If A does not have full column rank
    """
    A = np.asarray(A, dtype=float)
    Q, R = np.linalg.qr(A)
    diag = np.diag(R)
    scale = np.abs(diag).max() if diag.size else 0.0
    if scale == 0.0 or np.abs(diag).min() <= 1e-14 * scale:
        raise SingularMatrixError(f"Matrix of shape {A.shape} is rank deficient")
    return Q * np.where(diag < 0, -1.0, 1.0)


@dataclass(frozen=True)
class StiefelPoint:
    """
    Orthonormal d x r representative U of a subspace [U] in Gr(r, d).

    Raises:
        OffManifoldError: If |U^T U - I| exceeds STIEFEL_TOL
    """

    U: np.ndarray

    def __post_init__(self):
        U = np.array(self.U, dtype=float)
        if U.ndim != 2 or not 1 <= U.shape[1] <= U.shape[0]:
            raise ValueError(f"Stiefel point must be d x r with 1 <= r <= d, got {U.shape}")
        residual = orthonormality_residual(U)
        if not residual <= STIEFEL_TOL:
            raise OffManifoldError(
                f"Matrix is not orthonormal (|U^T U - I| = {residual:.3e})", residual=residual
            )
        if residual > REORTHONORMALIZE_DRIFT:
            U = qr_positive(U)
        U.setflags(write=False)
        object.__setattr__(self, "U", U)

    @property
    def d(self) -> int:
        return self.U.shape[0]

    @property
    def r(self) -> int:
        return self.U.shape[1]

    @property
    def horizontal_dim(self) -> int:
        """Dimension (d - r) * r of the horizontal space (= dim Gr(r, d))."""
        return (self.d - self.r) * self.r


def as_stiefel(U) -> StiefelPoint:
    return U if isinstance(U, StiefelPoint) else StiefelPoint(U)


@dataclass(frozen=True)
class HorizontalVector:
    """
    Horizontal tangent vector V at a Stiefel point (U^T V = 0).

    Supports the vector-space operations needed by iterative solvers;
    operands must share the same anchor.
    """

    V: np.ndarray
    anchor: StiefelPoint

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        if V.shape != self.anchor.U.shape:
            raise ValueError(f"Horizontal vector has shape {V.shape}, expected {self.anchor.U.shape}")
        leak = np.abs(self.anchor.U.T @ V).max()
        if leak > HORIZONTAL_TOL * max(1.0, float(np.linalg.norm(V))):
            raise ValueError(f"Vector is not horizontal (|U^T V| = {leak:.3e})")
        object.__setattr__(self, "V", V)

    @classmethod
    def zeros(cls, anchor: StiefelPoint) -> HorizontalVector:
        return cls(np.zeros_like(anchor.U), anchor)

    def norm(self) -> float:
        return float(np.linalg.norm(self.V))

    def _check(self, other: HorizontalVector) -> None:
        if other.anchor is not self.anchor and not np.array_equal(other.anchor.U, self.anchor.U):
            raise ValueError("Horizontal vectors are anchored at different points")

    def __add__(self, other: HorizontalVector) -> HorizontalVector:
        self._check(other)
        return HorizontalVector(self.V + other.V, self.anchor)

    def __sub__(self, other: HorizontalVector) -> HorizontalVector:
        self._check(other)
        return HorizontalVector(self.V - other.V, self.anchor)

    def __mul__(self, scalar: float) -> HorizontalVector:
        return HorizontalVector(float(scalar) * self.V, self.anchor)

    __rmul__ = __mul__

    def __neg__(self) -> HorizontalVector:
        return HorizontalVector(-self.V, self.anchor)


def _array(V) -> np.ndarray:
    return V.V if isinstance(V, HorizontalVector) else np.asarray(V, dtype=float)


def random_stiefel(d: int, r: int, seed: int | None = None) -> StiefelPoint:
    """
    Random Stiefel point from the QR factor of a seeded Gaussian matrix.

    Raises:
        ValueError: Unless 1 <= r <= d
    """
    if not 1 <= r <= d:
        raise ValueError(f"Need 1 <= r <= d, got r={r}, d={d}")
    rng = np.random.Generator(np.random.PCG64(seed))
    while True:
        try:
            return StiefelPoint(qr_positive(rng.standard_normal((d, r))))
        except SingularMatrixError:
            continue


def project_horizontal(U, W) -> HorizontalVector:
    """Orthogonal projection (I - U U^T) W onto the horizontal space at U."""
    point = as_stiefel(U)
    W = _array(W)
    if W.shape != point.U.shape:
        raise ValueError(f"Direction has shape {W.shape}, expected {point.U.shape}")
    return HorizontalVector(W - point.U @ (point.U.T @ W), point)


def metric(V1, V2) -> float:
    """Riemannian metric tr(V1^T V2)."""
    A = _array(V1)
    B = _array(V2)
    if A.shape != B.shape:
        raise ValueError(f"Shape mismatch: {A.shape} vs {B.shape}")
    return float(np.sum(A * B))


def retract(U, V) -> StiefelPoint:
    """
    QR retraction: orthonormal factor of U + V (positive diagonal convention).

    Raises:
        SingularMatrixError: If U + V is rank deficient
    """
    point = as_stiefel(U)
    step = _array(V)
    if not np.any(step):
        return point
    return StiefelPoint(qr_positive(point.U + step))


def principal_angles(U1, U2) -> np.ndarray:
    """
    Principal angles between span(U1) and span(U2), ascending.

    Combines cosines from U1^T U2 with sines from (I - U1 U1^T) U2 so that
    small angles are resolved to full precision.
    """
    A = as_stiefel(U1).U
    B = as_stiefel(U2).U
    if A.shape != B.shape:
        raise ValueError(f"Shape mismatch: {A.shape} vs {B.shape}")
    C = A.T @ B
    cosines = np.linalg.svd(C, compute_uv=False)
    sines = np.linalg.svd(B - A @ C, compute_uv=False)
    # cosines descend, sines descend: pair the largest cosine with the smallest sine
    return np.arctan2(sines[::-1], cosines)


def subspace_distance(U1, U2) -> float:
    """Geodesic distance on Gr(r, d): 2-norm of the principal angles."""
    return float(np.linalg.norm(principal_angles(U1, U2)))
