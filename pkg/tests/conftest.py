import numpy as np
import pytest

from swarmident.config import ExperimentConfig, PopulationConfig, WorldConfig


@pytest.fixture
def aggregation_world() -> WorldConfig:
    return WorldConfig(n_agents=10, n_replicas=1, init_square_side=331.66,
                       trial_duration=10.0, sensor_state_count=2)


@pytest.fixture
def clustering_world() -> WorldConfig:
    return WorldConfig(n_agents=4, n_replicas=1, n_objects=10,
                       init_square_side=100.0, trial_duration=10.0,
                       sensor_state_count=3)


@pytest.fixture
def tiny_cfg(tmp_path) -> ExperimentConfig:
    """Very small but complete adversarial experiment for fast smoke tests."""
    return ExperimentConfig(
        case_study="aggregation",
        engine="adversarial",
        generations=2,
        seed=123,
        snapshot_every=1,
        output_dir=str(tmp_path / "run"),
        world=WorldConfig(n_agents=3, n_replicas=1, init_square_side=180.0,
                          trial_duration=3.0, sensor_state_count=2),
        models=PopulationConfig(2, 2),
        classifiers=PopulationConfig(2, 2),
    )


def no_noise(world: WorldConfig) -> WorldConfig:
    from dataclasses import replace

    return replace(world, wheel_noise_low=1.0, wheel_noise_high=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)
