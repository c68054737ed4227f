"""
Reward Datasets

States with a boolean label per goal. Training sets hold final states s_T
labelled from the social partner's descriptions (positives) and the rest of
the goal list (inferred negatives); evaluation sets hold states from any
step, labelled by the oracle.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..environment.trajectories import Trajectory, load_trajectories
from ..language.grammar import Goal
from ..language.oracle import oracle_labels

logger = logging.getLogger(__name__)


@dataclass
class RewardDataset:
    """states (M, D), goals (G), labels (M, G) bool."""

    states: np.ndarray
    goals: Tuple[Goal, ...]
    labels: np.ndarray
    _positives: List[np.ndarray] = field(default_factory=list, init=False, repr=False)
    _negatives: List[np.ndarray] = field(default_factory=list, init=False, repr=False)

    def __post_init__(self) -> None:
        self.goals = tuple(self.goals)
        self.labels = np.asarray(self.labels, dtype=bool)
        if self.labels.shape != (self.states.shape[0], len(self.goals)):
            raise ValueError(f"labels shape {self.labels.shape} does not fit "
                             f"{self.states.shape[0]} states x {len(self.goals)} goals")
        self._positives = [np.flatnonzero(self.labels[:, k]) for k in range(len(self.goals))]
        self._negatives = [np.flatnonzero(~self.labels[:, k]) for k in range(len(self.goals))]

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def goal_tokens(self) -> List[Tuple[int, ...]]:
        return [g.tokens for g in self.goals]

    def degenerate_goals(self) -> List[Goal]:
        """Goals whose labels are all one class."""
        return [g for k, g in enumerate(self.goals)
                if len(self._positives[k]) == 0 or len(self._negatives[k]) == 0]

    def balanced_batch(self, rng: np.random.Generator, batch_size: int
                       ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Goals drawn uniformly, then a positive or a negative state with probability 1/2.

        Returns:
            (states, goal indices, labels) of length batch_size
        """
        goal_index = rng.integers(len(self.goals), size=batch_size)
        want_positive = rng.random(batch_size) < 0.5
        rows = np.empty(batch_size, dtype=np.int64)
        for b, (k, positive) in enumerate(zip(goal_index, want_positive)):
            pool = self._positives[k] if positive else self._negatives[k]
            if len(pool) == 0:
                pool = self._negatives[k] if positive else self._positives[k]
            rows[b] = pool[int(rng.integers(len(pool)))]
        return self.states[rows], goal_index, self.labels[rows, goal_index]

    def positive_counts(self) -> pd.DataFrame:
        """Positives per goal, sorted in decreasing order."""
        frame = pd.DataFrame({
            "goal": [g.text for g in self.goals],
            "split": [g.split for g in self.goals],
            "positives": self.labels.sum(axis=0).astype(int),
        })
        return frame.sort_values(["positives", "goal"], ascending=[False, True]).reset_index(drop=True)

    def subset_goals(self, goals: Sequence[Goal]) -> "RewardDataset":
        column = {g.text: k for k, g in enumerate(self.goals)}
        keep = [column[g.text] for g in goals]
        return RewardDataset(self.states, tuple(goals), self.labels[:, keep])


def training_set(trajectories: Sequence[Trajectory], goals: Sequence[Goal]) -> RewardDataset:
    """Final states; a goal is positive iff the social partner described it."""
    if not trajectories:
        raise ValueError("no trajectories to build a training set from")
    goals = tuple(goals)
    states = np.stack([t.final_state for t in trajectories])
    labels = np.zeros((len(trajectories), len(goals)), dtype=bool)
    column = {g.text: k for k, g in enumerate(goals)}
    for row, t in enumerate(trajectories):
        for phrase in t.descriptions:
            k = column.get(phrase)
            if k is not None:
                labels[row, k] = True
    dataset = RewardDataset(states, goals, labels)
    degenerate = dataset.degenerate_goals()
    if degenerate:
        logger.warning(f"{len(degenerate)} goals have single-class training labels")
    logger.info(f"Training set: {len(dataset)} final states x {len(goals)} goals")
    return dataset


def any_step_set(trajectories: Sequence[Trajectory], goals: Sequence[Goal], rng: np.random.Generator,
                 states_per_trajectory: int = 5) -> RewardDataset:
    """States drawn from any step of each trajectory, labelled by the oracle."""
    goals = tuple(goals)
    picked = []
    for t in trajectories:
        steps = rng.choice(t.states.shape[0], size=min(states_per_trajectory, t.states.shape[0]),
                           replace=False)
        picked.extend(t.states[s] for s in np.sort(steps))
    return labelled_by_oracle(np.stack(picked), goals)


def labelled_by_oracle(states: np.ndarray, goals: Sequence[Goal]) -> RewardDataset:
    goals = tuple(goals)
    labels = np.stack([oracle_labels(s, goals) for s in states]) if len(states) else \
        np.zeros((0, len(goals)), dtype=bool)
    return RewardDataset(np.asarray(states, dtype=np.float64), goals, labels)


def relabel(dataset: RewardDataset, goals: Sequence[Goal]) -> RewardDataset:
    """Same states, oracle labels for another goal list (one- and two-object goals)."""
    return labelled_by_oracle(dataset.states, goals)


def load_dataset(path, goals: Sequence[Goal], n_objects: Optional[int] = None) -> RewardDataset:
    """Training set built from a persisted trajectory file."""
    return training_set(load_trajectories(path, n_objects), goals)

