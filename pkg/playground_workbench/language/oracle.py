"""
Ground-Truth Reward Oracle

Decides whether a goal holds in a state vector. Only the flattened state is
read (current features plus deltas from the episode start), so the oracle can
label stored trajectories without the scene that produced them.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..core.errors import DimensionError
from ..catalog import (
    BODY_FEATURES, BODY_POSITION, KIND_ONE_HOT, KINDS, OBJECT_FEATURES,
    OBJECT_GRASPED, OBJECT_POSITION, OBJECT_RGB, OBJECT_SIZE, ZONES,
    ObjectKind, color_from_rgb, objects_in_state, observation_size,
)
from .grammar import Goal


@dataclass(frozen=True)
class ObjectView:
    kind: ObjectKind
    color: str
    position: np.ndarray
    initial_position: np.ndarray
    size_delta: float
    grasped: bool


@dataclass(frozen=True)
class StateView:
    body_position: np.ndarray
    objects: List[ObjectView]


def decode_state(state: np.ndarray) -> StateView:
    """Rebuild the symbolic content of a state vector."""
    state = np.asarray(state, dtype=np.float64)
    if state.ndim != 1:
        raise DimensionError(f"state must be a vector, got shape {state.shape}")
    n_objects = objects_in_state(state.shape[0])
    if n_objects is None:
        raise DimensionError(f"state length {state.shape[0]} matches no object count")
    half = observation_size(n_objects)
    current, delta = state[:half], state[half:]

    objects = []
    for i in range(n_objects):
        block = slice(BODY_FEATURES + i * OBJECT_FEATURES, BODY_FEATURES + (i + 1) * OBJECT_FEATURES)
        features, changes = current[block], delta[block]
        position = features[OBJECT_POSITION]
        objects.append(ObjectView(
            kind=KINDS[int(np.argmax(features[KIND_ONE_HOT]))],
            color=color_from_rgb(features[OBJECT_RGB]),
            position=position,
            initial_position=position - changes[OBJECT_POSITION],
            size_delta=float(changes[OBJECT_SIZE]),
            grasped=features[OBJECT_GRASPED] > 0.5,
        ))
    return StateView(body_position=current[BODY_POSITION], objects=objects)


def _matches(obj: ObjectView, color: Optional[str], target: str) -> bool:
    return (color in (None, "any") or obj.color == color) and obj.kind.matches(target)


def _matches_reference(obj: ObjectView, reference: str) -> bool:
    if reference in ("red", "green", "blue"):
        return obj.color == reference
    return obj.kind.matches(reference)


def relation_holds(relation: str, position: np.ndarray, reference_position: np.ndarray) -> bool:
    """Strict comparison on one axis; ties are false."""
    if relation == "right_of":
        return position[0] > reference_position[0]
    if relation == "left_of":
        return position[0] < reference_position[0]
    if relation == "above":
        return position[1] > reference_position[1]
    if relation == "below":
        return position[1] < reference_position[1]
    raise ValueError(f"unknown relation '{relation}'")


def goal_holds(view: StateView, goal: Goal) -> bool:
    if goal.predicate == "go":
        return ZONES[goal.zone].contains(view.body_position)

    if goal.predicate == "grow":
        return any(
            obj.kind.is_living and obj.size_delta > 0 and _matches(obj, goal.color, goal.target)
            for obj in view.objects
        )

    held = [obj for obj in view.objects if obj.grasped]
    if not goal.is_pairwise:
        return any(_matches(obj, goal.color, goal.target) for obj in held)

    for obj in held:
        for other in view.objects:
            if other is obj or not _matches_reference(other, goal.reference):
                continue
            if relation_holds(goal.relation, obj.initial_position, other.initial_position):
                return True
    return False


def oracle_reward(state: np.ndarray, goal: Goal) -> bool:
    """True iff the goal's predicate holds in the state."""
    return goal_holds(decode_state(state), goal)


def oracle_labels(state: np.ndarray, goals) -> np.ndarray:
    """Boolean label of every goal for one state (decodes the state once)."""
    view = decode_state(state)
    return np.array([goal_holds(view, g) for g in goals], dtype=bool)
