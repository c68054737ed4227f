"""
Scripted Oracle Controller

Hand-coded goal-reaching controller used to collect balanced supervised
datasets and to bootstrap exploration. It reads the scene directly, so it
only runs inside the simulator.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from ..catalog import GRIPPER_OPEN, ZONES
from ..core.errors import NoTargetError
from ..language.grammar import Goal
from ..language.oracle import relation_holds
from .scene import Action, ObjectState, Scene

logger = logging.getLogger(__name__)

OPEN = -1.0
CLOSE = 1.0


def _color_ok(obj: ObjectState, color: Optional[str]) -> bool:
    return color in (None, "any") or obj.color_name == color


def _reference_ok(obj: ObjectState, reference: str) -> bool:
    if reference in ("red", "green", "blue"):
        return obj.color_name == reference
    return obj.kind.matches(reference)


def _toward(scene: Scene, target: np.ndarray) -> np.ndarray:
    step_max = scene.settings.step_max
    return np.clip(np.asarray(target, dtype=np.float64) - scene.body.position, -step_max, step_max)


def _nearest(scene: Scene, candidates: List[ObjectState]) -> ObjectState:
    distances = [np.linalg.norm(obj.position - scene.body.position) for obj in candidates]
    return candidates[int(np.argmin(distances))]


def _approach_and_grasp(scene: Scene, target: ObjectState) -> Action:
    """Move onto the target; close the gripper once the move lands in contact."""
    delta = _toward(scene, target.position)
    landing = scene.body.position + delta
    in_reach = np.linalg.norm(target.position - landing) < scene.settings.contact_radius
    gripper_open = scene.body.gripper == GRIPPER_OPEN
    command = CLOSE if (in_reach and gripper_open) else OPEN
    return Action(delta=delta, gripper_command=command)


def _hold(delta: Optional[np.ndarray] = None) -> Action:
    return Action(delta=np.zeros(2) if delta is None else delta, gripper_command=CLOSE)


def _grasp_candidates(scene: Scene, goal: Goal) -> List[ObjectState]:
    if not goal.is_pairwise:
        return [o for o in scene.objects if _color_ok(o, goal.color) and o.kind.matches(goal.target)]
    candidates = []
    for i, obj in enumerate(scene.objects):
        start = scene.initial_position(i)
        for j, other in enumerate(scene.objects):
            if i != j and _reference_ok(other, goal.reference) \
                    and relation_holds(goal.relation, start, scene.initial_position(j)):
                candidates.append(obj)
                break
    return candidates


def _grasp_action(scene: Scene, goal: Goal) -> Action:
    candidates = _grasp_candidates(scene, goal)
    if not candidates:
        raise NoTargetError(f"no object in the scene satisfies '{goal.text}'")
    held = scene.held_object()
    if held is not None:
        if any(held is c for c in candidates):
            return _hold()
        return Action(delta=np.zeros(2), gripper_command=OPEN)
    return _approach_and_grasp(scene, _nearest(scene, candidates))


def _grow_plan(scene: Scene, goal: Goal) -> Tuple[List[ObjectState], List[ObjectState]]:
    targets = [o for o in scene.objects
               if o.kind.is_living and _color_ok(o, goal.color) and o.kind.matches(goal.target)]
    supplies = [o for o in scene.objects
                if o.kind.category == "supply" and any(t.kind.grows_with(o.kind) for t in targets)]
    return targets, supplies


def _grow_action(scene: Scene, goal: Goal) -> Action:
    targets, supplies = _grow_plan(scene, goal)
    if not targets or not supplies:
        raise NoTargetError(f"no target/supply pair in the scene for '{goal.text}'")
    held = scene.held_object()
    if held is not None:
        fed = [t for t in targets if t.kind.grows_with(held.kind)]
        if held.kind.category == "supply" and fed:
            return _hold(_toward(scene, _nearest(scene, fed).position))
        return Action(delta=np.zeros(2), gripper_command=OPEN)
    return _approach_and_grasp(scene, _nearest(scene, supplies))


def scripted_policy_action(scene: Scene, goal: Goal) -> Action:
    """
    One controller step toward the goal.

    go: head for the zone's target point with the gripper open.
    grasp: release any wrong object, walk to the nearest matching one, close on contact.
    grow: fetch a compatible supply, carry it onto a matching living thing.

    Raises:
        NoTargetError: If the scene holds nothing the goal can be achieved with
    """
    if goal.predicate == "go":
        return Action(delta=_toward(scene, ZONES[goal.zone].target), gripper_command=OPEN)
    if goal.predicate == "grasp":
        return _grasp_action(scene, goal)
    return _grow_action(scene, goal)


def random_action(rng: np.random.Generator, step_max: float) -> Action:
    """Uniform action over the action box."""
    return Action.from_array(rng.uniform(-1.0, 1.0, size=3), step_max)
