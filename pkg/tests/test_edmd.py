"""
Tests for EDMD data matrices, compressions and the QR change of basis.

Tests cover:
- Data matrices and the L < M warning
- Full EDMD against the bilinear-form oracle
- QR transform (orthonormal Gram matrix, deterministic signs)
- Subspace compressions and their oracle
- Change of basis
"""

import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose

from grassmann_edmd.dictionary import coordinate_dictionary, monomial_dictionary
from grassmann_edmd.dynamics import TrainingSet
from grassmann_edmd.edmd import (
    CompressionMatrix,
    DataMatrices,
    TransformedModel,
    bilinear_compression,
    bilinear_matrices_from_data,
    build_data_matrices,
    change_of_basis_compression,
    coordinate_krylov_basis,
    extend_basis,
    full_edmd,
    koopman_eigenvalues,
    numerical_rank,
    qr_transform,
    reduced_coordinate_matrix,
    subspace_bilinear_compression,
    subspace_compression,
)
from grassmann_edmd.errors import (
    NotPositiveDefiniteError,
    OffManifoldError,
    RankDeficiencyError,
    SingularMatrixError,
)
from grassmann_edmd.manifold import qr_positive, random_stiefel


def _scalar_pairs() -> TrainingSet:
    # f(x) = 0.5 x
    return TrainingSet(x=np.array([[1.0], [2.0]]), y=np.array([[0.5], [1.0]]))


def _random_data(seed: int, M: int = 6, n: int = 2, s: int = 2) -> DataMatrices:
    rng = np.random.default_rng(seed)
    return DataMatrices(
        G=rng.standard_normal((M, 5 * M)), S=rng.standard_normal((M, 5 * M)), n=n, s=s
    )


class TestDataMatrices:
    """Tests for lifting training pairs."""

    def test_scalar_example(self):
        dm = build_data_matrices(coordinate_dictionary(1), _scalar_pairs())
        assert_allclose(dm.G, [[1.0, 2.0]])
        assert_allclose(dm.S, [[0.5, 1.0]])
        assert dm.M == 1
        assert dm.L == 2
        assert dm.warnings == ()

    def test_empty_training_set_warns(self, caplog):
        empty = TrainingSet(x=np.zeros((0, 2)), y=np.zeros((0, 2)))
        with caplog.at_level(logging.WARNING):
            dm = build_data_matrices(monomial_dictionary(2, 2), empty)
        assert dm.G.shape == (6, 0)
        assert len(dm.warnings) == 1
        assert "L >= M" in caplog.text

    def test_carries_dictionary_sizes(self):
        d = monomial_dictionary(2, 3, s=3)
        pairs = TrainingSet(x=np.ones((12, 2)), y=np.ones((12, 2)))
        dm = build_data_matrices(d, pairs)
        assert (dm.n, dm.s) == (2, 3)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            DataMatrices(G=np.zeros((2, 3)), S=np.zeros((2, 4)))


class TestFullEDMD:
    """Tests for the least-squares compression."""

    def test_recovers_multiplier(self):
        dm = build_data_matrices(coordinate_dictionary(1), _scalar_pairs())
        K = full_edmd(dm)
        assert isinstance(K, CompressionMatrix)
        assert_allclose(K.K, [[0.5]])

    def test_identity_dynamics(self):
        G = qr_positive(np.random.default_rng(1).standard_normal((4, 4)))
        assert_allclose(full_edmd(DataMatrices(G=G, S=G)).K, np.eye(4), atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_bilinear_oracle(self, seed):
        dm = _random_data(seed, M=4)
        oracle = bilinear_compression(*bilinear_matrices_from_data(dm))
        assert_allclose(full_edmd(dm).K, oracle.K, atol=1e-10)

    def test_rank_deficient(self):
        G = np.ones((2, 5))
        with pytest.raises(RankDeficiencyError) as exc_info:
            full_edmd(DataMatrices(G=G, S=G))
        assert exc_info.value.rank == 1
        assert exc_info.value.expected == 2
        assert "numerical rank 1" in str(exc_info.value)

    def test_empty_data(self):
        with pytest.raises(RankDeficiencyError):
            full_edmd(DataMatrices(G=np.zeros((2, 0)), S=np.zeros((2, 0))))

    def test_numerical_rank(self):
        assert numerical_rank(np.array([1.0, 0.5, 1e-13])) == 2
        assert numerical_rank(np.zeros(3)) == 0


class TestBilinearCompression:
    """Tests for compressions of bilinear forms."""

    def test_scalar_products(self):
        dm = build_data_matrices(coordinate_dictionary(1), _scalar_pairs())
        H, A = bilinear_matrices_from_data(dm)
        assert_allclose(H, [[5.0]])
        assert_allclose(A, [[2.5]])
        assert_allclose(bilinear_compression(H, A).K, [[0.5]])

    def test_identity_gram(self):
        A = np.arange(9.0).reshape(3, 3)
        assert_allclose(bilinear_compression(np.eye(3), A).K, A)

    def test_residual(self):
        rng = np.random.default_rng(2)
        B = rng.standard_normal((5, 5))
        H = B @ B.T + 5.0 * np.eye(5)
        A = rng.standard_normal((5, 5))
        K = bilinear_compression(H, A).K
        assert np.abs(H @ K - A).max() <= 1e-10

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefiniteError):
            bilinear_compression(np.diag([1.0, -1.0]), np.eye(2))

    @pytest.mark.parametrize("seed", range(5))
    def test_full_rank_data_gives_positive_definite_gram(self, seed):
        dm = _random_data(seed)
        assert np.linalg.matrix_rank(dm.G) == dm.M
        H, A = bilinear_matrices_from_data(dm)
        assert np.linalg.eigvalsh(H).min() > 0.0
        assert_allclose(H @ bilinear_compression(H, A).K, A, atol=1e-10)

    def test_rank_deficient_data_gives_singular_gram(self):
        rng = np.random.default_rng(3)
        x1 = rng.uniform(-1.0, 1.0, size=40)
        x = np.column_stack([x1, x1])
        dm = build_data_matrices(monomial_dictionary(2, 2), TrainingSet(x=x, y=0.5 * x))
        assert np.linalg.matrix_rank(dm.G) < dm.M
        H, _ = bilinear_matrices_from_data(dm)
        eigenvalues = np.linalg.eigvalsh(H)
        assert eigenvalues.min() <= 1e-12 * eigenvalues.max()

    def test_rank_deficient_data_is_rejected(self):
        x = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, 1.0], [-1.0, -1.0]])
        dm = build_data_matrices(coordinate_dictionary(2), TrainingSet(x=x, y=x))
        H, A = bilinear_matrices_from_data(dm)
        assert_allclose(H, [[4.0, 4.0], [4.0, 4.0]])
        with pytest.raises(NotPositiveDefiniteError):
            bilinear_compression(H, A)

    def test_not_symmetric(self):
        with pytest.raises(NotPositiveDefiniteError):
            bilinear_compression(np.array([[2.0, 1.0], [0.0, 2.0]]), np.eye(2))

    def test_subspace_identity_basis(self):
        rng = np.random.default_rng(3)
        B = rng.standard_normal((4, 4))
        H = B @ B.T + np.eye(4)
        A = rng.standard_normal((4, 4))
        assert_allclose(
            subspace_bilinear_compression(H, A, np.eye(4)).K, bilinear_compression(H, A).K
        )

    def test_subspace_orthonormal_gram(self):
        A = np.random.default_rng(4).standard_normal((5, 5))
        Ubar = qr_positive(np.random.default_rng(5).standard_normal((5, 2)))
        assert_allclose(
            subspace_bilinear_compression(np.eye(5), A, Ubar).K, Ubar.T @ A @ Ubar, atol=1e-12
        )

    def test_subspace_singular_gram(self):
        H = np.diag([1.0, 0.0])
        with pytest.raises(NotPositiveDefiniteError):
            subspace_bilinear_compression(H, np.eye(2), np.array([[0.0], [1.0]]))


class TestQRTransform:
    """Tests for the orthonormalising change of basis."""

    def test_diagonal_example(self):
        dm = DataMatrices(G=np.diag([1.0, 2.0]), S=np.eye(2), n=1, s=1)
        tm = qr_transform(dm)
        assert_allclose(tm.P, np.diag([1.0, 0.5]), atol=1e-15)
        assert_allclose(tm.G_E @ tm.G_E.T, np.eye(2), atol=1e-15)
        assert_allclose(tm.Q11, [[1.0]])

    @pytest.mark.parametrize("seed", range(10))
    def test_gram_orthonormality(self, seed):
        M = 3 + seed
        tm = qr_transform(_random_data(seed, M=M))
        assert tm.gram_residual() <= 1e-10

    def test_leading_spans_preserved(self):
        """Row spaces of the leading k rows of G_B and G_E coincide for every k."""
        rng = np.random.default_rng(11)
        x = rng.uniform(-1.0, 1.0, size=(60, 2))
        dm = build_data_matrices(monomial_dictionary(2, 3), TrainingSet(x=x, y=0.9 * x))
        tm = qr_transform(dm)
        for k in range(1, dm.M + 1):
            Q_B = np.linalg.qr(dm.G[:k].T)[0]
            Q_E = np.linalg.qr(tm.G_E[:k].T)[0]
            assert_allclose(Q_B @ Q_B.T, Q_E @ Q_E.T, atol=1e-8)

    def test_factor_relations(self):
        dm = _random_data(7)
        tm = qr_transform(dm)
        assert_allclose(tm.P @ tm.P_inv, np.eye(dm.M), atol=1e-12)
        assert_allclose(tm.P @ dm.G, tm.G_E, atol=1e-12)
        assert_allclose(tm.P @ dm.S, tm.S_E, atol=1e-12)
        assert_allclose(tm.A_E, tm.G_E @ tm.S_E.T)
        # P_inv is lower triangular with non-negative diagonal
        assert_allclose(tm.P_inv, np.tril(tm.P_inv))
        assert np.all(np.diag(tm.P_inv) >= 0)

    def test_full_compression_matches_change_of_basis(self):
        dm = _random_data(8)
        tm = qr_transform(dm)
        K_B = full_edmd(dm)
        assert_allclose(
            tm.full_compression().K, change_of_basis_compression(K_B, tm.P).K, atol=1e-10
        )

    def test_deterministic(self):
        dm = _random_data(9)
        a = qr_transform(dm)
        b = qr_transform(dm)
        assert np.array_equal(a.P, b.P)
        assert np.array_equal(a.S_E, b.S_E)

    def test_rank_deficient(self):
        G = np.vstack([np.ones(6), np.ones(6), np.arange(6.0)])
        with pytest.raises(RankDeficiencyError, match="increase the number of training pairs"):
            qr_transform(DataMatrices(G=G, S=G))

    def test_from_blocks(self):
        tm = qr_transform(_random_data(10))
        rebuilt = type(tm).from_blocks(
            G_E=tm.G_E, S_E=tm.S_E, P=tm.P, P_inv=tm.P_inv, Q11=tm.Q11, s=tm.s, n=tm.n
        )
        assert_allclose(rebuilt.A_E, tm.A_E)
        assert rebuilt.d == tm.d


class TestCoordinateKrylovBasis:
    """Tests for the tail directions that drive the coordinates."""

    @pytest.mark.parametrize("r", [1, 2, 3, 6])
    def test_orthonormal(self, r):
        basis = coordinate_krylov_basis(qr_transform(_random_data(12, M=8)), r)
        assert basis.shape == (6, r)
        assert_allclose(basis.T @ basis, np.eye(r), atol=1e-12)

    def test_leading_columns_span_coordinate_block(self):
        tm = qr_transform(_random_data(13, M=8))
        s = tm.s
        A_ts = tm.A_E[s:, :s]
        basis = coordinate_krylov_basis(tm, 3)
        Q = np.linalg.qr(A_ts)[0]
        assert_allclose(basis[:, :s] @ basis[:, :s].T, Q @ Q.T, atol=1e-10)

        # the third direction comes from one application of A_tt
        A_tt = tm.A_E[s:, s:]
        K = np.linalg.qr(np.hstack([A_ts, A_tt @ A_ts]))[0]
        assert_allclose(K @ (K.T @ basis), basis, atol=1e-10)

    def test_deterministic(self):
        tm = qr_transform(_random_data(14, M=8))
        assert np.array_equal(coordinate_krylov_basis(tm, 3), coordinate_krylov_basis(tm, 3))

    def test_invariant_coordinates_fall_back_to_unit_vectors(self):
        A_E = np.diag([0.5, 0.4, 0.3, 0.2])
        tm = TransformedModel.from_blocks(
            G_E=np.eye(4), S_E=A_E.T, P=np.eye(4), P_inv=np.eye(4), Q11=np.eye(2), s=2, n=2
        )
        assert_allclose(coordinate_krylov_basis(tm, 2), np.eye(2), atol=1e-15)

    def test_rejects_r_out_of_range(self):
        tm = qr_transform(_random_data(15))
        with pytest.raises(ValueError):
            coordinate_krylov_basis(tm, 0)
        with pytest.raises(ValueError):
            coordinate_krylov_basis(tm, tm.d + 1)


class TestSubspaceCompression:
    """Tests for compressions onto T (+) span(U)."""

    def test_selection_subspace(self):
        tm = qr_transform(_random_data(11, M=7))
        U = np.eye(tm.d, 2)
        assert_allclose(subspace_compression(tm, U).K, tm.A_E[:4, :4])

    def test_full_subspace_is_similar(self):
        tm = qr_transform(_random_data(12))
        U = random_stiefel(tm.d, tm.d, seed=0).U
        Ubar = extend_basis(U, tm.s)
        K = subspace_compression(tm, U).K
        assert_allclose(K, Ubar.T @ tm.A_E @ Ubar)
        # similar matrices share the characteristic polynomial
        assert_allclose(np.poly(K), np.poly(tm.A_E), atol=1e-8)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_oracle(self, seed):
        dm = _random_data(seed, M=8)
        tm = qr_transform(dm)
        U = random_stiefel(tm.d, 1 + seed % tm.d, seed=seed)
        Ubar = extend_basis(U.U, tm.s)
        H_E = tm.G_E @ tm.G_E.T
        oracle = subspace_bilinear_compression(H_E, tm.A_E, Ubar)
        assert_allclose(subspace_compression(tm, U).K, oracle.K, atol=1e-10)

    def test_matches_oracle_in_dictionary_basis(self):
        dm = _random_data(13, M=8)
        tm = qr_transform(dm)
        U = random_stiefel(tm.d, 3, seed=1)
        H_B, A_B = bilinear_matrices_from_data(dm)
        oracle = subspace_bilinear_compression(H_B, A_B, tm.P.T @ extend_basis(U.U, tm.s))
        assert_allclose(subspace_compression(tm, U).K, oracle.K, atol=1e-10)

    def test_off_manifold(self):
        tm = qr_transform(_random_data(14))
        with pytest.raises(OffManifoldError):
            subspace_compression(tm, 2.0 * np.eye(tm.d, 1))

    def test_wrong_rows(self):
        tm = qr_transform(_random_data(15))
        with pytest.raises(ValueError):
            subspace_compression(tm, np.eye(tm.d + 1, 1))

    def test_extend_basis(self):
        Ubar = extend_basis(np.array([[0.0], [1.0]]), 2)
        expected = np.array(
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
        )
        assert_allclose(Ubar, expected)


class TestReducedCoordinateMatrix:
    """Tests for the read-out [Q11 0]."""

    def test_shape_and_block(self):
        tm = qr_transform(_random_data(16))
        Pi = reduced_coordinate_matrix(tm, 3)
        assert Pi.shape == (2, 5)
        assert_allclose(Pi[:, :2], tm.Q11)
        assert not np.any(Pi[:, 2:])

    def test_inverts_transformed_lift(self):
        d = monomial_dictionary(2, 3)
        rng = np.random.default_rng(17)
        x = rng.uniform(-1.0, 1.0, size=(40, 2))
        pairs = TrainingSet(x=x, y=0.9 * x)
        tm = qr_transform(build_data_matrices(d, pairs))
        Ubar = extend_basis(np.eye(tm.d, 2), tm.s)
        states = rng.uniform(-1.0, 1.0, size=(10, 2))
        z = Ubar.T @ tm.P @ d.lift_batch(states)
        assert_allclose((reduced_coordinate_matrix(tm, 2) @ z).T, states, atol=1e-10)

    def test_requires_coordinate_head(self):
        dm = DataMatrices(G=np.diag([1.0, 2.0, 3.0]), S=np.eye(3), n=2, s=1)
        tm = qr_transform(dm)
        with pytest.raises(ValueError):
            reduced_coordinate_matrix(tm, 1)


class TestChangeOfBasis:
    """Tests for compressions in a new basis."""

    def test_identity(self):
        K = np.random.default_rng(18).standard_normal((3, 3))
        assert_allclose(change_of_basis_compression(K, np.eye(3)).K, K)

    def test_scaled_identity(self):
        K = np.random.default_rng(19).standard_normal((3, 3))
        assert_allclose(change_of_basis_compression(K, 2.0 * np.eye(3)).K, K, atol=1e-14)

    def test_similarity(self):
        rng = np.random.default_rng(20)
        K = rng.standard_normal((4, 4))
        P = np.eye(4) + 0.3 * rng.standard_normal((4, 4))
        K_E = change_of_basis_compression(K, P).K
        assert_allclose(K_E.T, P @ K.T @ np.linalg.inv(P), atol=1e-10)

    def test_singular(self):
        with pytest.raises(SingularMatrixError):
            change_of_basis_compression(np.eye(2), np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            change_of_basis_compression(np.eye(2), np.eye(3))


class TestEigenvalues:
    """Tests for the compression spectrum."""

    def test_sorted_by_modulus(self):
        ev = koopman_eigenvalues(np.diag([0.1, -0.9, 0.5]))
        assert_allclose(ev, [-0.9, 0.5, 0.1])

    def test_compression_method(self):
        assert_allclose(CompressionMatrix(np.diag([0.2, 1.0])).eigenvalues(), [1.0, 0.2])
