"""
Playground Object Catalog

Object kinds, categories, colors, zones and the fixed feature layout of the
state vector. Everything here is static; scenes and the grammar both read it.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

ANIMALS = ("dog", "cat", "fly", "parrot", "lion", "mouse", "pig", "cow", "elephant", "human")
PLANTS = ("cactus", "flower", "tree", "bush", "grass", "algae", "tea", "rose", "bonsai", "carnivorous")
FURNITURE = ("door", "sofa", "chair", "desk", "lamp", "table", "cupboard", "sink", "window", "carpet")
SUPPLIES = ("water", "food")

CATEGORIES = ("living_thing", "animal", "plant", "furniture", "supply")
COLORS = ("red", "green", "blue")
RELATIONS = ("right_of", "left_of", "above", "below")

# Body block: x, y, gripper. Object block: one-hot kind, x, y, r, g, b, size, grasped.
BODY_FEATURES = 3
N_KINDS = 32
OBJECT_FEATURES = N_KINDS + 2 + 3 + 1 + 1
BODY_POSITION = slice(0, 2)
BODY_GRIPPER = 2
KIND_ONE_HOT = slice(0, N_KINDS)
OBJECT_POSITION = slice(N_KINDS, N_KINDS + 2)
OBJECT_RGB = slice(N_KINDS + 2, N_KINDS + 5)
OBJECT_SIZE = N_KINDS + 5
OBJECT_GRASPED = N_KINDS + 6

GRIPPER_OPEN = -1.0
GRIPPER_CLOSED = 1.0

# Each named color owns a disjoint box of RGB space: its channel is high, the others low.
_COLOR_HIGH = (0.6, 1.0)
_COLOR_LOW = (0.0, 0.4)


@dataclass(frozen=True)
class ObjectKind:
    """One of the 32 object types."""

    name: str
    category: str
    one_hot_index: int

    @property
    def is_living(self) -> bool:
        return self.category in ("animal", "plant")

    @property
    def categories(self) -> Tuple[str, ...]:
        if self.is_living:
            return (self.category, "living_thing")
        return (self.category,)

    def matches(self, descriptor: str) -> bool:
        """True if the kind is named by a type word, a category word or 'thing'."""
        return descriptor == "thing" or descriptor == self.name or descriptor in self.categories

    def grows_with(self, supply: "ObjectKind") -> bool:
        """Animals take food or water, plants take water only."""
        if self.category == "animal":
            return supply.name in SUPPLIES
        if self.category == "plant":
            return supply.name == "water"
        return False


def _build_kinds() -> Tuple[ObjectKind, ...]:
    kinds = []
    for category, names in (("animal", ANIMALS), ("plant", PLANTS),
                            ("furniture", FURNITURE), ("supply", SUPPLIES)):
        for name in names:
            kinds.append(ObjectKind(name, category, len(kinds)))
    return tuple(kinds)


KINDS: Tuple[ObjectKind, ...] = _build_kinds()
KIND_BY_NAME: Dict[str, ObjectKind] = {kind.name: kind for kind in KINDS}
LIVING_KINDS: Tuple[ObjectKind, ...] = tuple(k for k in KINDS if k.is_living)
TYPE_WORDS: Tuple[str, ...] = tuple(k.name for k in KINDS)
LIVING_TYPE_WORDS: Tuple[str, ...] = tuple(k.name for k in LIVING_KINDS)


def kinds_matching(descriptor: str, catalog: Optional[Sequence[ObjectKind]] = None) -> Tuple[ObjectKind, ...]:
    """All kinds of the catalog named by a descriptor word."""
    return tuple(k for k in (catalog or KINDS) if k.matches(descriptor))


def sample_rgb(color_name: str, rng: np.random.Generator) -> np.ndarray:
    """Uniform RGB inside the color's box."""
    channel = COLORS.index(color_name)
    rgb = rng.uniform(*_COLOR_LOW, size=3)
    rgb[channel] = rng.uniform(*_COLOR_HIGH)
    return rgb


def color_from_rgb(rgb: np.ndarray) -> str:
    """Recover the color name: the boxes make the dominant channel unique."""
    return COLORS[int(np.argmax(rgb))]


@dataclass(frozen=True)
class Zone:
    """A named area of the arena and the point a controller heads to."""

    name: str
    x_range: Tuple[float, float]
    y_range: Tuple[float, float]
    target: Tuple[float, float]
    inclusive: bool = False

    def contains(self, position: np.ndarray) -> bool:
        x, y = float(position[0]), float(position[1])
        if self.inclusive:
            return (self.x_range[0] <= x <= self.x_range[1]
                    and self.y_range[0] <= y <= self.y_range[1])
        return (self.x_range[0] < x < self.x_range[1]
                and self.y_range[0] < y < self.y_range[1])


_INF = float("inf")
_CENTER = 0.33

ZONES: Dict[str, Zone] = {
    z.name: z for z in (
        Zone("top", (-_INF, _INF), (0.0, _INF), (0.0, 0.6)),
        Zone("bottom", (-_INF, _INF), (-_INF, 0.0), (0.0, -0.6)),
        Zone("left", (-_INF, 0.0), (-_INF, _INF), (-0.6, 0.0)),
        Zone("right", (0.0, _INF), (-_INF, _INF), (0.6, 0.0)),
        Zone("top left", (-_INF, 0.0), (0.0, _INF), (-0.6, 0.6)),
        Zone("top right", (0.0, _INF), (0.0, _INF), (0.6, 0.6)),
        Zone("bottom left", (-_INF, 0.0), (-_INF, 0.0), (-0.6, -0.6)),
        Zone("bottom right", (0.0, _INF), (-_INF, 0.0), (0.6, -0.6)),
        Zone("center", (-_CENTER, _CENTER), (-_CENTER, _CENTER), (0.0, 0.0), inclusive=True),
        Zone("middle", (-_CENTER, _CENTER), (-_CENTER, _CENTER), (0.0, 0.0), inclusive=True),
    )
}
ZONE_NAMES: Tuple[str, ...] = tuple(ZONES)
ZONE_WORDS: Tuple[str, ...] = ("top", "bottom", "left", "right", "center", "middle")


def observation_size(n_objects: int) -> int:
    return BODY_FEATURES + OBJECT_FEATURES * n_objects


def state_size(n_objects: int) -> int:
    return 2 * observation_size(n_objects)


def objects_in_state(length: int) -> Optional[int]:
    """Object count encoded by a state vector length, None if inconsistent."""
    if length <= 0 or length % 2:
        return None
    rest = length // 2 - BODY_FEATURES
    if rest <= 0 or rest % OBJECT_FEATURES:
        return None
    return rest // OBJECT_FEATURES
