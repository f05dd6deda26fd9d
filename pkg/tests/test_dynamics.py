"""
Tests for the dynamics module.

Tests cover:
- Vector fields and the system registry
- Sampled flow maps against fixed-step and exact oracles
- Sampling, training pairs and ground-truth rollouts
- Integrator failures
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from grassmann_edmd.dynamics import (
    Box,
    IntegratorSettings,
    SampledMap,
    TrainingSet,
    Trajectory,
    VectorField,
    duffing_energy,
    duffing_field,
    generate_pairs,
    get_system,
    linear_field,
    linear_flow_matrix,
    rk4_flow,
    rollout_truth,
    rollout_truth_batch,
    sample_states,
    step,
    step_batch,
)
from grassmann_edmd.errors import ConfigError, IntegrationError


@pytest.fixture
def duffing_map():
    return SampledMap(duffing_field(), dt=0.1)


def _blowup_map() -> SampledMap:
    # x' = x^2 escapes to infinity at t = 1/x0
    return SampledMap(VectorField(dim=1, func=lambda x: x**2, name="blowup"), dt=0.1)


class TestVectorField:
    """Tests for vector fields."""

    def test_duffing_equilibria(self):
        field = duffing_field()
        assert_allclose(field((0.0, 0.0)), [0.0, 0.0])
        assert_allclose(field((1.0, 0.0)), [0.0, 0.0])
        assert_allclose(field((-1.0, 0.0)), [0.0, 0.0])

    def test_duffing_hand_evaluation(self):
        assert_allclose(duffing_field()((0.5, 0.2)), [0.2, 0.375])

    def test_batch_evaluation(self):
        field = duffing_field()
        states = np.array([[0.5, 0.2], [0.0, 0.0]])
        assert_allclose(field(states), [[0.2, 0.375], [0.0, 0.0]])

    def test_wrong_dimension_rejected(self):
        with pytest.raises(ValueError):
            duffing_field()((1.0, 2.0, 3.0))

    def test_linear_field(self):
        field = linear_field([[0.0, 1.0], [-1.0, 0.0]])
        assert_allclose(field((1.0, 2.0)), [2.0, -1.0])
        assert field.params["F"] == [[0.0, 1.0], [-1.0, 0.0]]

    def test_registry(self):
        assert get_system("duffing").name == "duffing"
        assert get_system("linear", {"F": [[-1.0]]}).dim == 1

    def test_unknown_system(self):
        with pytest.raises(ValueError, match="Unknown system"):
            get_system("lorenz")

    def test_energy(self):
        assert duffing_energy((0.0, 0.0)) == 0.0
        assert duffing_energy((1.0, 0.0)) == pytest.approx(-0.25)
        assert duffing_energy(np.zeros((3, 2))).shape == (3,)


class TestSampledMap:
    """Tests for one-step flow maps."""

    def test_origin_is_fixed(self, duffing_map):
        assert_allclose(step(duffing_map, (0.0, 0.0)), [0.0, 0.0], atol=1e-14)

    def test_equilibrium_is_fixed(self, duffing_map):
        assert_allclose(step(duffing_map, (1.0, 0.0)), [1.0, 0.0], atol=1e-9)

    def test_matches_rk4_oracle(self, duffing_map):
        x = np.array([0.5, 0.0])
        expected = rk4_flow(duffing_field(), x, 0.1, substeps=10_000)
        assert_allclose(step(duffing_map, x), expected, atol=1e-9)

    def test_callable(self, duffing_map):
        assert_allclose(duffing_map((0.5, 0.0)), step(duffing_map, (0.5, 0.0)))

    def test_linear_map_matches_exponential(self):
        fmap = SampledMap(linear_field(), dt=0.1)
        x = np.array([0.3, -0.7])
        assert_allclose(step(fmap, x), linear_flow_matrix(fmap) @ x, atol=1e-9)

    def test_exact_flow_requires_linear_system(self, duffing_map):
        with pytest.raises(ValueError):
            linear_flow_matrix(duffing_map)

    def test_batch_matches_single_steps(self, duffing_map):
        states = np.array([[0.5, 0.0], [-0.3, 0.4], [0.9, -0.9]])
        batch = step_batch(duffing_map, states)
        for x, y in zip(states, batch):
            assert_allclose(y, step(duffing_map, x), atol=1e-9)

    def test_empty_batch(self, duffing_map):
        assert step_batch(duffing_map, np.zeros((0, 2))).shape == (0, 2)

    def test_invalid_dt(self):
        with pytest.raises(ConfigError):
            SampledMap(duffing_field(), dt=0.0)

    def test_invalid_settings(self):
        with pytest.raises(ConfigError):
            SampledMap(duffing_field(), settings=IntegratorSettings(rtol=-1.0))
        with pytest.raises(ConfigError):
            SampledMap(duffing_field(), settings=IntegratorSettings(method="LSODA"))

    def test_settings_round_trip(self):
        settings = IntegratorSettings(rtol=1e-8, atol=1e-9, method="DOP853")
        assert IntegratorSettings.from_dict(settings.to_dict()) == settings


class TestIntegrationFailure:
    """Integrator failures raise instead of returning NaN."""

    def test_single_state(self):
        with pytest.raises(IntegrationError):
            step(_blowup_map(), (1e3,))

    def test_batch_reports_index(self):
        with pytest.raises(IntegrationError) as exc_info:
            step_batch(_blowup_map(), np.array([[0.1], [1e3]]))
        assert exc_info.value.index == 1
        assert exc_info.value.location == [1e3]


class TestBox:
    """Tests for domain boxes."""

    def test_square(self):
        box = Box.square(1.0)
        assert box.lower == (-1.0, -1.0)
        assert box.upper == (1.0, 1.0)
        assert box.dim == 2

    def test_reversed_interval(self):
        with pytest.raises(ValueError):
            Box(lower=(1.0,), upper=(0.0,))

    def test_list_round_trip(self):
        box = Box(lower=(-1.0, 0.0), upper=(2.0, 0.5))
        assert Box.from_list(box.to_list()) == box

    def test_contains(self):
        box = Box.square(1.0)
        assert box.contains([[0.0, 0.0], [1.0, -1.0]])
        assert not box.contains([[1.5, 0.0]])


class TestSampling:
    """Tests for seeded state sampling."""

    def test_states_inside_box(self):
        box = Box.square(1.0)
        states = sample_states(box, 5000, seed=0)
        assert states.shape == (5000, 2)
        assert box.contains(states)

    def test_degenerate_box(self):
        states = sample_states(Box(lower=(0.0, 0.0), upper=(0.0, 0.0)), 3, seed=1)
        assert_allclose(states, np.zeros((3, 2)))

    def test_deterministic(self):
        box = Box.square(2.0)
        assert np.array_equal(sample_states(box, 10, seed=42), sample_states(box, 10, seed=42))
        assert not np.array_equal(sample_states(box, 10, seed=42), sample_states(box, 10, seed=43))

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_states(Box.square(1.0), 0)


class TestTrainingData:
    """Tests for training pairs."""

    def test_origin_pair(self, duffing_map):
        pairs = generate_pairs(duffing_map, [[0.0, 0.0]])
        assert pairs.L == 1
        assert_allclose(pairs.y, [[0.0, 0.0]], atol=1e-14)

    def test_cardinality(self, duffing_map):
        states = sample_states(Box.square(1.0), 7, seed=0)
        pairs = generate_pairs(duffing_map, states)
        assert pairs.L == 7
        assert len(pairs.pairs) == 7
        assert_allclose(pairs.x, states)

    def test_successor_matches_step(self, duffing_map):
        pairs = generate_pairs(duffing_map, [[0.5, 0.0]])
        assert_allclose(pairs.y[0], step(duffing_map, (0.5, 0.0)), atol=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            TrainingSet(x=np.zeros((3, 2)), y=np.zeros((2, 2)))

    def test_to_csv(self, duffing_map, tmp_path):
        pairs = generate_pairs(duffing_map, [[0.5, 0.0], [0.1, 0.2]])
        path = tmp_path / "pairs.csv"
        pairs.to_csv(path)
        assert path.read_text().splitlines()[0] == "i,x1,x2,y1,y2"
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert_allclose(data[:, 3:], pairs.y)


class TestRollout:
    """Tests for ground-truth trajectories."""

    def test_origin_stays(self, duffing_map):
        traj = rollout_truth(duffing_map, (0.0, 0.0), 20)
        assert traj.horizon == 20
        assert_allclose(traj.states, np.zeros((21, 2)), atol=1e-14)

    def test_single_step(self, duffing_map):
        traj = rollout_truth(duffing_map, (0.5, 0.2), 1)
        assert_allclose(traj.x0, [0.5, 0.2])
        assert_allclose(traj.states[1], step(duffing_map, (0.5, 0.2)))

    def test_matches_rk4_oracle(self, duffing_map):
        traj = rollout_truth(duffing_map, (0.5, 0.2), 20)
        x = np.array([0.5, 0.2])
        for t in range(1, 21):
            x = rk4_flow(duffing_field(), x, 0.1, substeps=1000)
            assert_allclose(traj.states[t], x, atol=1e-8)

    def test_energy_conserved(self, duffing_map):
        traj = rollout_truth(duffing_map, (0.5, 0.2), 20)
        energy = duffing_energy(traj.states)
        assert np.ptp(energy) < 1e-8

    def test_batch_matches_single(self, duffing_map):
        x0 = np.array([[0.5, 0.2], [-0.4, 0.1]])
        batch = rollout_truth_batch(duffing_map, x0, 5)
        assert batch.shape == (2, 6, 2)
        for j in range(2):
            assert_allclose(batch[j], rollout_truth(duffing_map, x0[j], 5).states, atol=1e-9)

    def test_horizon_must_be_positive(self, duffing_map):
        with pytest.raises(ValueError):
            rollout_truth(duffing_map, (0.0, 0.0), 0)

    def test_trajectory_to_csv(self, duffing_map, tmp_path):
        traj = rollout_truth(duffing_map, (0.5, 0.2), 3)
        path = tmp_path / "traj.csv"
        traj.to_csv(path, dt=0.1)
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert_allclose(data[:, 0], [0.0, 0.1, 0.2, 0.3])
        assert_allclose(data[:, 1:], traj.states)

    def test_trajectory_validation(self):
        with pytest.raises(ValueError):
            Trajectory(np.zeros((0, 2)))
