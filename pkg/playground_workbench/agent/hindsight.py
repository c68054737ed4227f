"""
Hindsight Relabelling

Replays stored transitions under substitute goals chosen from the discovered
goals. The learned reward function scores a random list of candidates on the
next state; with probability p_pos the substitute is drawn among the goals it
scores positive, otherwise among all scanned candidates. The reward is the
binarized score of the chosen goal, so relabelled rewards always agree with the
reward model.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.errors import EmptyRegistryError
from ..language.grammar import Goal
from ..reward.architectures import RewardModel
from ..reward.or_network import THRESHOLD
from .memory import GoalRegistry, ReplayBatch

logger = logging.getLogger(__name__)

DEFAULT_SCAN = 50


@dataclass
class RLBatch:
    states: np.ndarray
    actions: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray
    goals: Tuple[Goal, ...]
    embeddings: np.ndarray
    rewards: np.ndarray
    positive_fraction: float

    def __len__(self) -> int:
        return self.states.shape[0]


def goal_embeddings(model: RewardModel, goals: Tuple[Goal, ...]) -> np.ndarray:
    """(G, H) language-model embeddings, one row per goal."""
    g, _ = model.lm.forward([goal.tokens for goal in goals])
    return g


def hindsight_relabel(batch: ReplayBatch, registry: GoalRegistry, reward_model: RewardModel,
                      rng: np.random.Generator, scan: int = DEFAULT_SCAN, p_pos: float = 0.5) -> RLBatch:
    """
    Substitute a discovered goal into every transition of the batch.

    Args:
        batch: Transitions sampled from the replay memory
        registry: Discovered goals
        reward_model: Learned reward function used to score candidates on s'
        rng: Relabelling stream
        scan: Candidates scanned per transition (capped by the registry size)
        p_pos: Probability of choosing among the positively scored candidates

    Returns:
        RLBatch with substitute goals, their embeddings and rewards

    Raises:
        EmptyRegistryError: No goal has been discovered yet
    """
    if len(registry) == 0:
        raise EmptyRegistryError("hindsight relabelling needs at least one discovered goal")
    goals = registry.goals
    embeddings = goal_embeddings(reward_model, goals)
    size = len(batch)
    k = min(scan, len(goals))

    candidates = np.stack([rng.choice(len(goals), size=k, replace=False) for _ in range(size)])
    next_states = np.repeat(batch.next_states, k, axis=0)
    probs, _ = reward_model.forward_embedding(next_states, embeddings[candidates.reshape(-1)])
    positive = probs.reshape(size, k) > THRESHOLD

    chosen = np.empty(size, dtype=np.int64)
    rewards = np.empty(size)
    for row in range(size):
        hits = np.flatnonzero(positive[row])
        if rng.random() < p_pos and len(hits):
            column = int(hits[rng.integers(len(hits))])
        else:
            column = int(rng.integers(k))
        chosen[row] = candidates[row, column]
        rewards[row] = 1.0 if positive[row, column] else 0.0

    logger.debug(f"Relabelled {size} transitions over {k} candidates: {rewards.mean():.2f} positive")
    return RLBatch(
        states=batch.states,
        actions=batch.actions,
        next_states=batch.next_states,
        dones=batch.dones,
        goals=tuple(goals[c] for c in chosen),
        embeddings=embeddings[chosen],
        rewards=rewards,
        positive_fraction=float(rewards.mean()),
    )
