"""Shared fixtures: small networks and short episodes keep the suite fast."""

import numpy as np
import pytest

from playground_workbench.catalog import BODY_FEATURES, OBJECT_FEATURES, objects_in_state
from playground_workbench.core.config import RunConfig
from playground_workbench.environment.scene import WorldSettings, sample_scene
from playground_workbench.language.grammar import enumerate_goals, parse_goal
from playground_workbench.language.vocabulary import default_vocabulary
from playground_workbench.reward.architectures import RewardModel

SMALL_SETTINGS = {
    "seed": 7,
    "precision": "float64",
    "word_embedding": 6,
    "lstm_hidden": 10,
    "object_hidden": [12, 12],
    "flat_hidden": [12, 12],
    "or_hidden": 8,
    "horizon": 12,
    "batch_size": 16,
    "reward_batch_size": 16,
    "replay_capacity": 400,
    "reward_memory_capacity": 50,
    "reward_updates": 2,
    "rl_updates_per_episode": 2,
    "hindsight_scan": 6,
    "episodes": 6,
    "bootstrap_episodes": 3,
    "eval_every": 3,
    "episodes_per_goal": 2,
    "test_trajectories": 6,
    "states_per_test_trajectory": 2,
}


@pytest.fixture
def small_config():
    return RunConfig(SMALL_SETTINGS)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def settings():
    return WorldSettings(horizon=12)


@pytest.fixture(scope="session")
def all_goals():
    return enumerate_goals()


@pytest.fixture
def make_reward_model(small_config):
    def build(variant="ma", **overrides):
        config = small_config.replace(variant=variant, **overrides)
        return RewardModel.from_config(config, len(default_vocabulary()), rng=np.random.default_rng(3))
    return build


@pytest.fixture
def goal():
    def build(text):
        return parse_goal(text)
    return build


@pytest.fixture
def permute_objects():
    """Reorder the object blocks of (batch, D) states, in both halves."""
    def apply(states, order):
        states = np.atleast_2d(states)
        n = objects_in_state(states.shape[1])
        half = states.shape[1] // 2
        index = list(range(BODY_FEATURES))
        for i in order:
            index += range(BODY_FEATURES + i * OBJECT_FEATURES, BODY_FEATURES + (i + 1) * OBJECT_FEATURES)
        assert len(index) == BODY_FEATURES + n * OBJECT_FEATURES
        index = np.array(index + [half + k for k in index])
        return states[:, index]
    return apply


@pytest.fixture
def random_states(rng):
    """Well-formed states of N objects drawn from real scenes."""
    def build(batch, n_objects=3):
        return np.stack([sample_scene(None, n_objects, seed=int(s)).state_vector()
                         for s in rng.integers(1 << 30, size=batch)])
    return build
