"""
Agent Memories

    ReplayMemory   ring buffer of environment transitions for the actor-critic
    RewardMemory   final states with the social partner's descriptions, turned
                   into reward-model training sets on demand
    GoalRegistry   the discovered goals, with the episode each was first heard
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import EmptyRegistryError
from ..language.grammar import Goal, parse_goal
from ..reward.dataset import RewardDataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: np.ndarray
    next_state: np.ndarray
    goal: Optional[str]
    episode: int
    done: bool


@dataclass
class ReplayBatch:
    states: np.ndarray
    actions: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray
    goals: Tuple[Optional[str], ...]
    episodes: np.ndarray

    def __len__(self) -> int:
        return self.states.shape[0]


class ReplayMemory:
    """FIFO ring buffer; arrays are allocated on the first append."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("replay capacity must be positive")
        self.capacity = capacity
        self._size = 0
        self._next = 0
        self._states: Optional[np.ndarray] = None
        self._actions: Optional[np.ndarray] = None
        self._next_states: Optional[np.ndarray] = None
        self._dones = np.zeros(capacity, dtype=bool)
        self._episodes = np.zeros(capacity, dtype=np.int64)
        self._goals: List[Optional[str]] = [None] * capacity

    def __len__(self) -> int:
        return self._size

    def _allocate(self, state_width: int, action_width: int) -> None:
        self._states = np.zeros((self.capacity, state_width))
        self._actions = np.zeros((self.capacity, action_width))
        self._next_states = np.zeros((self.capacity, state_width))

    def append(self, transition: Transition) -> None:
        if self._states is None:
            self._allocate(transition.state.shape[0], transition.action.shape[0])
        slot = self._next
        self._states[slot] = transition.state
        self._actions[slot] = transition.action
        self._next_states[slot] = transition.next_state
        self._dones[slot] = transition.done
        self._episodes[slot] = transition.episode
        self._goals[slot] = transition.goal
        self._next = (slot + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def extend(self, transitions: Iterable[Transition]) -> None:
        for transition in transitions:
            self.append(transition)

    def sample(self, rng: np.random.Generator, batch_size: int) -> ReplayBatch:
        """Uniform draw with replacement; the returned arrays are copies."""
        if self._size == 0:
            raise ValueError("cannot sample from an empty replay memory")
        rows = rng.integers(self._size, size=batch_size)
        return ReplayBatch(
            states=self._states[rows],
            actions=self._actions[rows],
            next_states=self._next_states[rows],
            dones=self._dones[rows],
            goals=tuple(self._goals[r] for r in rows),
            episodes=self._episodes[rows],
        )


class RewardMemory:
    """Final states s_T and the descriptions they received (ring buffer)."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._states: List[np.ndarray] = []
        self._descriptions: List[FrozenSet[str]] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._states)

    def append(self, final_state: np.ndarray, descriptions: Iterable[str]) -> None:
        entry = (np.array(final_state, dtype=np.float64), frozenset(descriptions))
        if len(self._states) < self.capacity:
            self._states.append(entry[0])
            self._descriptions.append(entry[1])
        else:
            self._states[self._next], self._descriptions[self._next] = entry
        self._next = (self._next + 1) % self.capacity

    def to_dataset(self, goals: Sequence[Goal]) -> RewardDataset:
        """
        Label every stored state against the given goals.

        A goal is positive where it was described and negative otherwise,
        so the negatives of a state are the discovered goals minus its
        descriptions.
        """
        goals = tuple(goals)
        labels = np.array([[g.text in described for g in goals] for described in self._descriptions],
                          dtype=bool).reshape(len(self._states), len(goals))
        states = np.stack(self._states) if self._states else np.zeros((0, 0))
        return RewardDataset(states, goals, labels)


class GoalRegistry:
    """Discovered goals in discovery order; only ever grows."""

    def __init__(self):
        self._goals: Dict[str, Goal] = {}
        self._first_episode: Dict[str, int] = {}

    def __len__(self) -> int:
        return len(self._goals)

    def __contains__(self, item) -> bool:
        text = item.text if isinstance(item, Goal) else item
        return text in self._goals

    @property
    def goals(self) -> Tuple[Goal, ...]:
        return tuple(self._goals.values())

    def first_episode(self, text: str) -> int:
        return self._first_episode[text]

    def add(self, phrases: Iterable[str], episode: int) -> List[Goal]:
        """Register described phrases; returns the goals heard for the first time."""
        added = []
        for text in sorted(phrases):
            if text in self._goals:
                continue
            goal = parse_goal(text)
            self._goals[text] = goal
            self._first_episode[text] = episode
            added.append(goal)
        if added:
            logger.info(f"Episode {episode}: discovered {len(added)} new goals ({len(self)} total)")
        return added

    def sample(self, rng: np.random.Generator) -> Goal:
        """Uniform draw over the discovered goals."""
        if not self._goals:
            raise EmptyRegistryError("no goal has been discovered yet")
        return self.goals[int(rng.integers(len(self._goals)))]

    def to_records(self) -> List[Dict[str, object]]:
        return [{"goal": text, "first_episode": self._first_episode[text]} for text in self._goals]

    @classmethod
    def from_records(cls, records: Iterable[Dict[str, object]]) -> "GoalRegistry":
        registry = cls()
        for record in records:
            text = str(record["goal"])
            registry._goals[text] = parse_goal(text)
            registry._first_episode[text] = int(record["first_episode"])
        return registry
