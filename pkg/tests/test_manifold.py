"""
Tests for Stiefel and Grassmann geometry.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from grassmann_edmd.errors import OffManifoldError, SingularMatrixError
from grassmann_edmd.manifold import (
    HorizontalVector,
    StiefelPoint,
    metric,
    orthonormality_residual,
    principal_angles,
    project_horizontal,
    qr_positive,
    random_stiefel,
    retract,
    subspace_distance,
)


class TestStiefelPoint:
    """Tests for Stiefel representatives."""

    def test_accepts_orthonormal(self):
        point = StiefelPoint(np.eye(4, 2))
        assert (point.d, point.r) == (4, 2)
        assert point.horizontal_dim == 4

    def test_rejects_non_orthonormal(self):
        with pytest.raises(OffManifoldError) as exc_info:
            StiefelPoint(np.ones((3, 1)))
        assert exc_info.value.residual == pytest.approx(2.0)

    def test_rejects_wide_matrix(self):
        with pytest.raises(ValueError):
            StiefelPoint(np.eye(2, 3))

    def test_reorthonormalises_small_drift(self):
        U = np.eye(3, 1) * (1.0 + 1e-10)
        point = StiefelPoint(U)
        assert orthonormality_residual(point.U) <= 1e-14

    def test_read_only(self):
        point = StiefelPoint(np.eye(3, 1))
        with pytest.raises(ValueError):
            point.U[0, 0] = 2.0


class TestRandomStiefel:
    """Tests for seeded random points."""

    def test_square(self):
        U = random_stiefel(4, 4, seed=0).U
        assert_allclose(U.T @ U, np.eye(4), atol=1e-12)
        assert_allclose(U @ U.T, np.eye(4), atol=1e-12)

    def test_unit_vector(self):
        U = random_stiefel(3, 1, seed=1).U
        assert U.shape == (3, 1)
        assert np.linalg.norm(U) == pytest.approx(1.0)

    def test_residual_sweep(self):
        for seed in range(100):
            assert orthonormality_residual(random_stiefel(7, 3, seed=seed).U) <= 1e-12

    def test_deterministic(self):
        assert np.array_equal(random_stiefel(5, 2, seed=3).U, random_stiefel(5, 2, seed=3).U)

    def test_r_larger_than_d(self):
        with pytest.raises(ValueError):
            random_stiefel(2, 3)


class TestHorizontalProjection:
    """Tests for the projection onto the horizontal space."""

    def test_hand_example(self):
        V = project_horizontal(np.array([[1.0], [0.0], [0.0]]), np.array([[1.0], [2.0], [3.0]]))
        assert_allclose(V.V, [[0.0], [2.0], [3.0]])

    def test_idempotent(self):
        point = random_stiefel(5, 2, seed=4)
        W = np.random.default_rng(4).standard_normal((5, 2))
        V = project_horizontal(point, W)
        assert_allclose(project_horizontal(point, V).V, V.V, atol=1e-14)

    def test_vertical_directions_vanish(self):
        point = random_stiefel(5, 2, seed=5)
        R = np.random.default_rng(5).standard_normal((2, 2))
        assert_allclose(project_horizontal(point, point.U @ R).V, 0.0, atol=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            project_horizontal(np.eye(3, 1), np.zeros((3, 2)))

    def test_horizontal_vector_validation(self):
        point = StiefelPoint(np.eye(3, 1))
        with pytest.raises(ValueError):
            HorizontalVector(np.array([[1.0], [0.0], [0.0]]), point)

    def test_vector_arithmetic(self):
        point = StiefelPoint(np.eye(3, 1))
        a = HorizontalVector(np.array([[0.0], [1.0], [0.0]]), point)
        b = HorizontalVector(np.array([[0.0], [0.0], [2.0]]), point)
        assert_allclose((a + b).V, [[0.0], [1.0], [2.0]])
        assert_allclose((a - b).V, [[0.0], [1.0], [-2.0]])
        assert_allclose((2.0 * a).V, [[0.0], [2.0], [0.0]])
        assert_allclose((-a).V, [[0.0], [-1.0], [0.0]])
        assert (a + b).norm() == pytest.approx(np.sqrt(5.0))
        assert HorizontalVector.zeros(point).norm() == 0.0

    def test_vectors_at_different_points(self):
        a = HorizontalVector(np.array([[0.0], [1.0], [0.0]]), StiefelPoint(np.eye(3, 1)))
        other = StiefelPoint(np.array([[0.0], [0.0], [1.0]]))
        b = HorizontalVector(np.array([[1.0], [0.0], [0.0]]), other)
        with pytest.raises(ValueError):
            a + b


class TestMetric:
    """Tests for the trace metric."""

    def test_trace_inner_product(self):
        A = np.array([[1.0, 2.0], [3.0, 4.0]])
        B = np.array([[0.5, 0.0], [1.0, -1.0]])
        assert metric(A, B) == pytest.approx(np.trace(A.T @ B))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            metric(np.zeros((2, 1)), np.zeros((1, 2)))


class TestRetraction:
    """Tests for the QR retraction."""

    def test_zero_step(self):
        point = random_stiefel(4, 2, seed=6)
        assert_allclose(retract(point, np.zeros((4, 2))).U, point.U)

    def test_result_on_manifold(self):
        point = random_stiefel(6, 2, seed=7)
        V = project_horizontal(point, np.random.default_rng(7).standard_normal((6, 2)))
        assert orthonormality_residual(retract(point, V).U) <= 1e-12

    def test_first_order(self):
        point = random_stiefel(5, 2, seed=8)
        V = project_horizontal(point, np.random.default_rng(8).standard_normal((5, 2))).V
        errors = [
            np.linalg.norm(retract(point, t * V).U - (point.U + t * V)) for t in (1e-2, 1e-3, 1e-4)
        ]
        slopes = np.diff(np.log10(errors)) / np.diff(np.log10([1e-2, 1e-3, 1e-4]))
        assert np.all(slopes > 1.8)

    def test_rank_deficient(self):
        U = np.eye(2, 1)
        with pytest.raises(SingularMatrixError):
            retract(U, -U)

    def test_qr_positive_diagonal(self):
        A = np.random.default_rng(9).standard_normal((4, 3))
        Q = qr_positive(A)
        assert np.all(np.diag(Q.T @ A) > 0)


class TestSubspaceDistance:
    """Tests for principal angles and the geodesic distance."""

    def test_same_class(self):
        U = random_stiefel(5, 2, seed=10).U
        R = qr_positive(np.random.default_rng(10).standard_normal((2, 2)))
        assert subspace_distance(U, U @ R) <= 1e-10

    def test_orthogonal_lines(self):
        assert subspace_distance(np.eye(2, 1), np.array([[0.0], [1.0]])) == pytest.approx(
            np.pi / 2
        )

    def test_known_angle(self):
        theta = 0.3
        U2 = np.array([[np.cos(theta)], [np.sin(theta)], [0.0]])
        assert_allclose(principal_angles(np.eye(3, 1), U2), [theta])

    def test_small_angles_resolved(self):
        theta = 1e-9
        U2 = np.array([[np.cos(theta)], [np.sin(theta)]])
        assert subspace_distance(np.eye(2, 1), U2) == pytest.approx(theta, rel=1e-6)

    def test_ascending(self):
        U1 = np.eye(4, 2)
        U2 = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
        assert_allclose(principal_angles(U1, U2), [0.0, np.pi / 2], atol=1e-15)
