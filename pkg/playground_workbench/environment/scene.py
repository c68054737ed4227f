"""
Playground Scene Simulation

Procedural scene sampling, kinematic body/object dynamics and the flattened
state vector (o_t concatenated with o_t - o_0).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..catalog import (
    BODY_FEATURES, COLORS, GRIPPER_CLOSED, GRIPPER_OPEN, KIND_BY_NAME, KINDS,
    N_KINDS, OBJECT_FEATURES, SUPPLIES, ObjectKind, kinds_matching, sample_rgb,
)
from ..core.errors import EpisodeFinishedError, RejectedHintError
from ..language.grammar import Goal

logger = logging.getLogger(__name__)

SPAWN_BOUND = 0.9
MIN_SEPARATION = 0.25
INITIAL_SIZE_RANGE = (0.2, 0.5)
_MAX_PLACEMENT_TRIES = 200


@dataclass(frozen=True)
class WorldSettings:
    """Geometry and dynamics constants of the arena."""

    bound: float = 1.0
    step_max: float = 0.15
    contact_radius: float = 0.1
    grow_gain: float = 0.3
    size_max: float = 1.0
    horizon: int = 50
    object_kinds: Tuple[str, ...] = ()

    @classmethod
    def from_config(cls, config) -> "WorldSettings":
        return cls(
            bound=config["world_bound"],
            step_max=config["step_max"],
            contact_radius=config["contact_radius"],
            grow_gain=config["grow_gain"],
            size_max=config["size_max"],
            horizon=config["horizon"],
            object_kinds=tuple(config.object_kinds_or_default()),
        )

    @property
    def catalog(self) -> Tuple[ObjectKind, ...]:
        if not self.object_kinds:
            return KINDS
        return tuple(KIND_BY_NAME[name] for name in self.object_kinds)


@dataclass
class BodyState:
    position: np.ndarray
    gripper: float = GRIPPER_OPEN

    def features(self) -> np.ndarray:
        return np.array([self.position[0], self.position[1], self.gripper])


@dataclass
class ObjectState:
    kind: ObjectKind
    position: np.ndarray
    color_rgb: np.ndarray
    color_name: str
    size: float
    grasped: bool = False

    def features(self) -> np.ndarray:
        out = np.zeros(OBJECT_FEATURES)
        out[self.kind.one_hot_index] = 1.0
        out[N_KINDS:N_KINDS + 2] = self.position
        out[N_KINDS + 2:N_KINDS + 5] = self.color_rgb
        out[N_KINDS + 5] = self.size
        out[N_KINDS + 6] = 1.0 if self.grasped else 0.0
        return out


@dataclass
class Action:
    """Translation (clamped to step_max) and a gripper command (>0 closes)."""

    delta: np.ndarray
    gripper_command: float

    @classmethod
    def from_array(cls, values: Sequence[float], step_max: float) -> "Action":
        """Map a policy output in [-1, 1]^3 to world units."""
        values = np.clip(np.asarray(values, dtype=np.float64), -1.0, 1.0)
        return cls(delta=values[:2] * step_max, gripper_command=float(values[2]))

    def to_array(self, step_max: float) -> np.ndarray:
        out = np.empty(3)
        out[:2] = np.clip(self.delta / step_max, -1.0, 1.0)
        out[2] = np.clip(self.gripper_command, -1.0, 1.0)
        return out


@dataclass
class Scene:
    """Single-owner mutable world state of one episode."""

    body: BodyState
    objects: List[ObjectState]
    settings: WorldSettings
    seed: int
    initial_sizes: np.ndarray = field(init=False)
    initial_observation: np.ndarray = field(init=False)
    step_count: int = 0

    def __post_init__(self) -> None:
        self.initial_sizes = np.array([obj.size for obj in self.objects])
        self.initial_observation = self.observation()
        self.initial_observation.setflags(write=False)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def finished(self) -> bool:
        return self.step_count >= self.settings.horizon

    def held_object(self) -> Optional[ObjectState]:
        for obj in self.objects:
            if obj.grasped:
                return obj
        return None

    def observation(self) -> np.ndarray:
        return np.concatenate([self.body.features()] + [obj.features() for obj in self.objects])

    def initial_position(self, index: int) -> np.ndarray:
        """Position of object `index` at reset, read from o_0."""
        start = BODY_FEATURES + index * OBJECT_FEATURES + N_KINDS
        return self.initial_observation[start:start + 2]

    def state_vector(self) -> np.ndarray:
        current = self.observation()
        return np.concatenate([current, current - self.initial_observation])


def _sample_position(rng: np.random.Generator, taken: List[np.ndarray],
                     constraint=None) -> np.ndarray:
    for _ in range(_MAX_PLACEMENT_TRIES):
        candidate = rng.uniform(-SPAWN_BOUND, SPAWN_BOUND, size=2)
        if constraint is not None and not constraint(candidate):
            continue
        if all(np.linalg.norm(candidate - other) >= MIN_SEPARATION for other in taken):
            return candidate
    raise RejectedHintError("could not place objects far enough apart")


def _pick(rng: np.random.Generator, options: Sequence):
    return options[int(rng.integers(len(options)))]


def _new_object(kind: ObjectKind, color: str, position: np.ndarray,
                rng: np.random.Generator) -> ObjectState:
    return ObjectState(kind=kind, position=position, color_rgb=sample_rgb(color, rng),
                       color_name=color, size=float(rng.uniform(*INITIAL_SIZE_RANGE)))


def _hinted_objects(goal: Goal, n_objects: int, catalog: Tuple[ObjectKind, ...],
                    rng: np.random.Generator) -> List[Tuple[ObjectKind, str, object]]:
    """Objects a hint requires, as (kind, color, position constraint) triples."""
    if goal.predicate == "go":
        return []

    color = goal.color if goal.color in COLORS else None

    if goal.is_pairwise:
        if n_objects < 2:
            raise RejectedHintError(f"'{goal.text}' needs two objects")
        if goal.reference in COLORS:
            reference_kind, reference_color = _pick(rng, catalog), goal.reference
        else:
            options = kinds_matching(goal.reference, catalog)
            if not options:
                raise RejectedHintError(f"no object kind matches '{goal.reference}'")
            reference_kind, reference_color = _pick(rng, options), _pick(rng, COLORS)
        held_kind = _pick(rng, tuple(k for k in catalog if k is not reference_kind) or catalog)
        return [(reference_kind, reference_color, "reference"),
                (held_kind, _pick(rng, COLORS), goal.relation)]

    options = kinds_matching(goal.target, catalog)
    if goal.predicate == "grow":
        options = tuple(k for k in options if k.is_living)
    if not options:
        raise RejectedHintError(f"no {goal.predicate}able object kind matches '{goal.text}'")
    target_kind = _pick(rng, options)
    required = [(target_kind, color or _pick(rng, COLORS), None)]

    if goal.predicate == "grow":
        if n_objects < 2:
            raise RejectedHintError(f"'{goal.text}' needs a target and a supply")
        supplies = tuple(KIND_BY_NAME[s] for s in SUPPLIES if target_kind.grows_with(KIND_BY_NAME[s]))
        required.append((_pick(rng, supplies), _pick(rng, COLORS), None))
    return required


def _relation_constraint(relation: str, reference: np.ndarray):
    axis = 0 if relation in ("right_of", "left_of") else 1
    sign = 1.0 if relation in ("right_of", "above") else -1.0
    return lambda p: sign * (p[axis] - reference[axis]) > 0.05


def sample_scene(goal_hint: Optional[Goal], n_objects: int, seed: int,
                 settings: Optional[WorldSettings] = None) -> Scene:
    """
    Sample a scene, conditioned on the goal hint when one is given.

    Args:
        goal_hint: Goal whose object descriptor must be present, or None
        n_objects: Number of objects N (at least 1)
        seed: Seed of the scene's random stream
        settings: Arena constants

    Returns:
        A freshly reset Scene with the body at a random position, gripper open

    Raises:
        RejectedHintError: If the hint cannot be satisfied with this catalog or N
    """
    if n_objects < 1:
        raise RejectedHintError("a scene needs at least one object")
    settings = settings or WorldSettings()
    catalog = settings.catalog
    rng = np.random.default_rng(seed)

    required = _hinted_objects(goal_hint, n_objects, catalog, rng) if goal_hint else []
    if len(required) > n_objects:
        raise RejectedHintError(f"'{goal_hint.text}' needs {len(required)} objects, scene has {n_objects}")

    objects: List[ObjectState] = []
    positions: List[np.ndarray] = []
    reference_position = None
    for kind, color, constraint in required:
        if constraint in (None, "reference"):
            position = _sample_position(rng, positions)
            if constraint == "reference":
                reference_position = position
        else:
            position = _sample_position(rng, positions, _relation_constraint(constraint, reference_position))
        positions.append(position)
        objects.append(_new_object(kind, color, position, rng))

    used = {obj.kind.name for obj in objects}
    while len(objects) < n_objects:
        fresh = tuple(k for k in catalog if k.name not in used) or catalog
        kind = _pick(rng, fresh)
        used.add(kind.name)
        position = _sample_position(rng, positions)
        positions.append(position)
        objects.append(_new_object(kind, _pick(rng, COLORS), position, rng))

    order = rng.permutation(n_objects)
    objects = [objects[i] for i in order]

    body = BodyState(position=rng.uniform(-SPAWN_BOUND, SPAWN_BOUND, size=2))
    scene = Scene(body=body, objects=objects, settings=settings, seed=seed)
    logger.debug(f"Sampled scene seed={seed} N={n_objects} hint={goal_hint}")
    return scene


def _grasp_nearest(scene: Scene) -> None:
    radius = scene.settings.contact_radius
    best, best_distance = None, radius
    for obj in scene.objects:
        distance = float(np.linalg.norm(obj.position - scene.body.position))
        if distance < best_distance:
            best, best_distance = obj, distance
    if best is not None:
        best.grasped = True


def _apply_growth(scene: Scene, held: ObjectState) -> None:
    settings = scene.settings
    for obj in scene.objects:
        if obj is held or not obj.kind.grows_with(held.kind):
            continue
        if np.linalg.norm(obj.position - held.position) < settings.contact_radius:
            obj.size = min(settings.size_max, obj.size + settings.grow_gain)


def step(scene: Scene, action: Action) -> Scene:
    """
    Advance the scene by one step.

    The body moves by the clamped delta; the gripper closing next to an object
    (with nothing held) grasps the nearest one; opening releases it; a held
    supply grows every compatible living thing it touches.
    """
    if scene.finished:
        raise EpisodeFinishedError(f"episode already ran {scene.step_count} steps")
    settings = scene.settings

    delta = np.clip(np.asarray(action.delta, dtype=np.float64), -settings.step_max, settings.step_max)
    scene.body.position = np.clip(scene.body.position + delta, -settings.bound, settings.bound)

    was_open = scene.body.gripper == GRIPPER_OPEN
    held = scene.held_object()
    if action.gripper_command > 0:
        scene.body.gripper = GRIPPER_CLOSED
        if was_open and held is None:
            _grasp_nearest(scene)
            held = scene.held_object()
    else:
        scene.body.gripper = GRIPPER_OPEN
        if held is not None:
            held.grasped = False
            held = None

    if held is not None:
        held.position = scene.body.position.copy()
        if held.kind.category == "supply":
            _apply_growth(scene, held)

    scene.step_count += 1
    return scene


def state_vector(scene: Scene) -> np.ndarray:
    """Flattened network input: body, then objects by index; o_t then delta o_t."""
    return scene.state_vector()
