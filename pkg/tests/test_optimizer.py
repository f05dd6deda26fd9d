"""
Tests for the trust-region optimizer and its truncated CG inner solver.
"""

import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose

from grassmann_edmd.errors import ConfigError, NumericalError
from grassmann_edmd.manifold import (
    HorizontalVector,
    StiefelPoint,
    project_horizontal,
    random_stiefel,
    subspace_distance,
)
from grassmann_edmd.objective import RayleighQuotient
from grassmann_edmd.optimizer import (
    STATUS_CONVERGED,
    STATUS_MAX_ITERS,
    STATUS_NUMERICAL_FAILURE,
    STATUS_RADIUS_COLLAPSE,
    IterationRecord,
    OptimizationTrace,
    TrustRegionConfig,
    optimize,
    trust_region,
    truncated_cg,
)
from grassmann_edmd.optimizer.tcg import (
    STOP_EXCEEDED_TR,
    STOP_NEGATIVE_CURVATURE,
    STOP_TARGET_LINEAR,
)


def _rayleigh(d: int, seed: int) -> RayleighQuotient:
    Q = random_stiefel(d, d, seed=seed).U
    return RayleighQuotient(Q @ np.diag(np.arange(1.0, d + 1.0)) @ Q.T)


class TestTrustRegionConfig:
    """Tests for solver settings."""

    def test_defaults_valid(self):
        TrustRegionConfig().validate()

    def test_for_rank(self):
        config = TrustRegionConfig().for_rank(4)
        assert config.delta_max == pytest.approx(4.0)
        assert config.delta0 == pytest.approx(0.2)

    def test_for_rank_keeps_explicit_radii(self):
        config = TrustRegionConfig(delta0=0.5, delta_max=1.0).for_rank(9)
        assert (config.delta0, config.delta_max) == (0.5, 1.0)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"kappa": 1.0},
            {"rho_accept": 0.8},
            {"shrink": 1.5},
            {"expand": 1.0},
            {"grad_tol": 0.0},
            {"delta0": 2.0, "delta_max": 1.0},
            {"tcg_max_inner": 0},
        ],
    )
    def test_invalid(self, overrides):
        with pytest.raises(ConfigError):
            TrustRegionConfig(**overrides).validate()

    def test_dict_round_trip(self):
        config = TrustRegionConfig(max_outer_iters=10, kappa=0.05)
        assert TrustRegionConfig.from_dict(config.to_dict()) == config

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="radius"):
            TrustRegionConfig.from_dict({"radius": 1.0})


class TestTruncatedCG:
    """Tests for the Steihaug-Toint inner solver on a diagonal model."""

    @staticmethod
    def _model(diagonal):
        anchor = StiefelPoint(np.eye(4, 1))
        D = np.diag(diagonal)

        def hvp(V: HorizontalVector) -> HorizontalVector:
            return HorizontalVector(D @ V.V, anchor)

        grad = HorizontalVector(np.array([[0.0], [1.0], [1.0], [1.0]]), anchor)
        return grad, hvp

    def test_newton_step_inside_radius(self):
        grad, hvp = self._model([1.0, 2.0, 3.0, 4.0])
        result = truncated_cg(grad, hvp, 10.0, TrustRegionConfig(kappa=1e-12))
        assert_allclose(result.step.V[:, 0], [0.0, -1 / 2, -1 / 3, -1 / 4], atol=1e-10)
        assert result.stop_reason == STOP_TARGET_LINEAR
        assert result.iterations <= 3
        assert not result.hit_boundary

    def test_boundary(self):
        grad, hvp = self._model([1.0, 2.0, 3.0, 4.0])
        result = truncated_cg(grad, hvp, 0.1, TrustRegionConfig(kappa=1e-12))
        assert result.step.norm() == pytest.approx(0.1, rel=1e-12)
        assert result.stop_reason == STOP_EXCEEDED_TR
        assert result.hit_boundary

    def test_negative_curvature(self):
        grad, hvp = self._model([-1.0, -1.0, -1.0, -1.0])
        result = truncated_cg(grad, hvp, 0.5)
        assert result.stop_reason == STOP_NEGATIVE_CURVATURE
        assert result.step.norm() == pytest.approx(0.5)
        assert_allclose(result.step.V, -0.5 * grad.V / grad.norm())

    def test_model_decrease_positive(self):
        grad, hvp = self._model([1.0, 2.0, 3.0, 4.0])
        for delta in (0.01, 0.3, 10.0):
            assert truncated_cg(grad, hvp, delta).model_decrease(grad) > 0.0

    def test_zero_gradient(self):
        _, hvp = self._model([1.0, 2.0, 3.0, 4.0])
        result = truncated_cg(HorizontalVector.zeros(StiefelPoint(np.eye(4, 1))), hvp, 1.0)
        assert result.iterations == 0
        assert result.step.norm() == 0.0

    @staticmethod
    def _spd_model(seed: int):
        """Random SPD model on the horizontal space at a 5 x 2 Stiefel point."""
        rng = np.random.default_rng(seed)
        point = random_stiefel(5, 2, seed=seed)
        basis = np.linalg.svd(np.eye(5) - point.U @ point.U.T)[0][:, :3]
        Q = np.linalg.qr(rng.standard_normal((6, 6)))[0]
        H = Q @ np.diag(np.linspace(1.0, 3.0, 6)) @ Q.T
        g = rng.standard_normal(6)

        def hvp(V: HorizontalVector) -> HorizontalVector:
            c = (basis.T @ V.V).reshape(-1)
            return HorizontalVector(basis @ (H @ c).reshape(3, 2), point)

        grad = HorizontalVector(basis @ g.reshape(3, 2), point)
        exact = basis @ np.linalg.solve(H, -g).reshape(3, 2)
        return grad, hvp, exact

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_dense_solve(self, seed):
        grad, hvp, exact = self._spd_model(seed)
        delta = 2.0 * np.linalg.norm(exact) + 1.0
        result = truncated_cg(grad, hvp, delta, TrustRegionConfig(kappa=1e-12))
        assert not result.hit_boundary
        assert_allclose(result.step.V, exact, atol=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_boundary_of_spd_model(self, seed):
        grad, hvp, exact = self._spd_model(seed)
        delta = 0.5 * np.linalg.norm(exact)
        result = truncated_cg(grad, hvp, delta, TrustRegionConfig(kappa=1e-12))
        assert result.stop_reason == STOP_EXCEEDED_TR
        assert result.step.norm() == pytest.approx(delta, rel=1e-12)
        assert result.model_decrease(grad) > 0.0

    def test_step_is_horizontal(self):
        point = random_stiefel(5, 2, seed=0)
        f = _rayleigh(5, 1)
        grad = project_horizontal(point, f.gradient(point.U))
        result = truncated_cg(grad, lambda V: f.riemannian_hessian(point, V), 0.3)
        assert_allclose(point.U.T @ result.step.V, 0.0, atol=1e-12)
        assert result.step.norm() <= 0.3 * (1.0 + 1e-12)


class TestTrustRegion:
    """Tests for the outer trust-region iteration."""

    def test_smallest_eigenvector(self):
        f = RayleighQuotient(np.diag([1.0, 2.0, 3.0]))
        config = TrustRegionConfig(grad_tol=1e-8)
        point, trace = optimize(f, random_stiefel(3, 1, seed=0), config)
        assert trace.status == STATUS_CONVERGED
        assert subspace_distance(point, np.eye(3, 1)) <= 1e-6
        assert trace.final_value == pytest.approx(1.0, abs=1e-10)

    def test_two_dimensional_minimum(self):
        f = _rayleigh(6, 2)
        expected, basis = f.minimum(2)
        point, trace = optimize(f, random_stiefel(6, 2, seed=3), TrustRegionConfig(grad_tol=1e-8))
        assert trace.status == STATUS_CONVERGED
        assert trace.final_value == pytest.approx(expected, rel=1e-8)
        assert subspace_distance(point, basis) <= 1e-6

    def test_accepted_values_decrease(self):
        f = _rayleigh(6, 4)
        _, trace = optimize(f, random_stiefel(6, 2, seed=5))
        values = trace.accepted_values
        assert len(values) >= 2
        assert np.all(np.diff(values) < 0.0)

    def test_stationary_start(self):
        f = RayleighQuotient(np.diag([1.0, 2.0, 3.0]))
        U0 = np.eye(3, 1)
        point, trace = optimize(f, U0)
        assert trace.status == STATUS_CONVERGED
        assert trace.iterations == 0
        assert_allclose(point.U, U0)

    def test_iteration_cap(self):
        f = _rayleigh(6, 6)
        _, trace = optimize(f, random_stiefel(6, 2, seed=6), TrustRegionConfig(max_outer_iters=1))
        assert trace.status == STATUS_MAX_ITERS
        assert trace.iterations == 1

    def test_non_finite_start(self):
        point = random_stiefel(3, 1, seed=7)
        _, trace = trust_region(
            lambda U: float("nan"),
            lambda U: HorizontalVector.zeros(U),
            lambda U, V: V,
            point,
        )
        assert trace.status == STATUS_NUMERICAL_FAILURE

    def test_failing_gradient(self):
        def grad_fn(U):
            raise NumericalError("gradient blew up")

        _, trace = trust_region(lambda U: 0.0, grad_fn, lambda U, V: V, np.eye(3, 1))
        assert trace.status == STATUS_NUMERICAL_FAILURE

    def test_non_finite_hessian(self):
        f = _rayleigh(4, 8)
        start = random_stiefel(4, 1, seed=8)

        def hvp_fn(U, V):
            return HorizontalVector(np.full(V.V.shape, np.nan), V.anchor)

        point, trace = trust_region(
            lambda U: f.value(U.U),
            lambda U: project_horizontal(U, f.gradient(U.U)),
            hvp_fn,
            start,
        )
        assert trace.status == STATUS_NUMERICAL_FAILURE
        assert point is start

    def test_radius_collapse(self):
        f = _rayleigh(4, 11)
        start = random_stiefel(4, 2, seed=11)

        def value_fn(U):
            return 0.0 if np.allclose(U.U, start.U, rtol=0.0, atol=1e-14) else 1.0

        point, trace = trust_region(
            value_fn,
            lambda U: project_horizontal(U, f.gradient(U.U)),
            lambda U, V: V,
            start,
        )
        assert trace.status == STATUS_RADIUS_COLLAPSE
        assert trace.accepted_steps == 0
        assert trace.iterations < 500
        assert_allclose(point.U, start.U)

    def test_debug_check_warns(self, caplog):
        f = _rayleigh(4, 9)

        def wrong_grad(U):
            return project_horizontal(U, -f.gradient(U.U))

        config = TrustRegionConfig(max_outer_iters=0, debug_check=True)
        with caplog.at_level(logging.WARNING):
            trust_region(
                lambda U: f.value(U.U),
                wrong_grad,
                lambda U, V: f.riemannian_hessian(U, V),
                random_stiefel(4, 2, seed=9),
                config,
            )
        assert "disagrees with finite differences" in caplog.text


class TestOptimizationTrace:
    """Tests for iteration records."""

    def test_csv(self, tmp_path):
        f = _rayleigh(5, 10)
        _, trace = optimize(f, random_stiefel(5, 2, seed=10))
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "iter,value,gradnorm,delta,rho,accepted"
        assert len(lines) == len(trace.records) + 1

    def test_empty_trace(self):
        trace = OptimizationTrace()
        assert trace.iterations == 0
        assert trace.accepted_values == []
        assert np.isnan(trace.final_value)

    def test_counts(self):
        trace = OptimizationTrace()
        trace.append(IterationRecord(0, 3.0, 1.0, 0.1, float("nan"), 0.0, False))
        trace.append(IterationRecord(1, 2.0, 0.5, 0.2, 0.9, 0.1, True))
        trace.append(IterationRecord(2, 2.0, 0.5, 0.05, 0.01, 0.2, False))
        assert trace.iterations == 2
        assert trace.accepted_steps == 1
        assert trace.accepted_values == [3.0, 2.0]
        assert trace.to_dict()["records"][1]["rho"] == 0.9
