"""
Goal Grammar

Enumerates the achievable goals of the Playground world, parses goal phrases
and annotates each goal with its split and generalization type.

Grammar:
    go + zone
    grasp + (color | any) + (object type | object category)
    grasp + any + color + thing
    grow + (color | any) + (living thing type | living_thing | animal | plant)
    grow + any + color + thing
    grasp + any + relative position + (color | object type | object category) + thing
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

from ..core.errors import IntegrityError
from ..catalog import (
    CATEGORIES, COLORS, KIND_BY_NAME, LIVING_TYPE_WORDS, PLANTS, RELATIONS,
    TYPE_WORDS, ZONE_NAMES,
)
from .vocabulary import Phrase, default_vocabulary, split_phrase

logger = logging.getLogger(__name__)

PREDICATES = ("go", "grasp", "grow")
COLOR_WORDS = ("any",) + COLORS
GRASP_DESCRIPTORS = TYPE_WORDS + CATEGORIES
GROW_DESCRIPTORS = LIVING_TYPE_WORDS + ("living_thing", "animal", "plant")
PAIR_DESCRIPTORS = COLORS + TYPE_WORDS + CATEGORIES

TRAIN = "train"
TEST = "test"


def _phrases_by_type() -> Dict[int, Tuple[str, ...]]:
    """Held-out goals, grouped by the kind of generalization they test."""
    type5_targets = tuple(p for p in PLANTS if p != "flower") + ("living_thing", "plant")
    return {
        1: ("grasp blue door", "grasp green dog", "grasp red tree", "grow green dog"),
        2: tuple(f"{verb} {color} flower" for verb in ("grasp", "grow") for color in COLOR_WORDS),
        3: tuple(f"grasp {color} animal" for color in COLOR_WORDS),
        4: tuple(f"grasp {color} fly" for color in COLOR_WORDS),
        5: tuple(f"grow {color} {target}" for color in COLOR_WORDS for target in type5_targets),
    }


TEST_PHRASES_BY_TYPE: Dict[int, Tuple[str, ...]] = _phrases_by_type()
TYPE_OF_TEST_PHRASE: Dict[str, int] = {
    phrase: gen_type for gen_type, phrases in TEST_PHRASES_BY_TYPE.items() for phrase in phrases
}
PAIR_TEST_PHRASES = ("grasp any left_of blue thing", "grasp any right_of dog thing")

GENERALIZATION_NAMES = {
    1: "attribute-object",
    2: "attribute extrapolation",
    3: "predicate-category",
    4: "easy predicate-object",
    5: "hard predicate-object",
}


@dataclass(frozen=True, eq=False)
class Goal:
    """A natural-language goal and its parsed structure.

    Equality and hashing use the phrase only, so goals built by different
    routes (enumeration, parsing, loading) compare equal.
    """

    text: str
    predicate: str
    color: Optional[str] = None
    target: Optional[str] = None
    zone: Optional[str] = None
    relation: Optional[str] = None
    reference: Optional[str] = None
    split: str = TRAIN
    gen_type: Optional[int] = None
    tokens: Tuple[int, ...] = field(default=(), repr=False)

    @property
    def words(self) -> Tuple[str, ...]:
        return tuple(self.text.split())

    @property
    def is_pairwise(self) -> bool:
        return self.relation is not None

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Goal):
            return self.text == other.text
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.text)

    def __str__(self) -> str:
        return self.text


def _make_goal(text: str, **parts) -> Goal:
    if parts.get("relation") is not None:
        split = TEST if text in PAIR_TEST_PHRASES else TRAIN
        gen_type = None
    else:
        gen_type = TYPE_OF_TEST_PHRASE.get(text)
        split = TEST if gen_type is not None else TRAIN
    tokens = tuple(default_vocabulary().encode(text))
    return Goal(text=text, split=split, gen_type=gen_type, tokens=tokens, **parts)


def parse_goal(phrase: Phrase) -> Goal:
    """Parse a grammar phrase; anything outside the grammar raises IntegrityError."""
    words = split_phrase(phrase)
    text = " ".join(words)
    if not words or words[0] not in PREDICATES:
        raise IntegrityError(f"'{text}' does not start with a predicate")
    predicate = words[0]
    rest = words[1:]

    if predicate == "go":
        zone = " ".join(rest)
        if zone not in ZONE_NAMES:
            raise IntegrityError(f"'{text}' names no known zone")
        return _make_goal(text, predicate="go", zone=zone)

    descriptors = GRASP_DESCRIPTORS if predicate == "grasp" else GROW_DESCRIPTORS
    if len(rest) == 2 and rest[0] in COLOR_WORDS and rest[1] in descriptors:
        return _make_goal(text, predicate=predicate, color=rest[0], target=rest[1])
    if len(rest) == 3 and rest[0] == "any" and rest[1] in COLORS and rest[2] == "thing":
        return _make_goal(text, predicate=predicate, color=rest[1], target="thing")
    if (predicate == "grasp" and len(rest) == 4 and rest[0] == "any"
            and rest[1] in RELATIONS and rest[2] in PAIR_DESCRIPTORS and rest[3] == "thing"):
        return _make_goal(text, predicate="grasp", color="any", target="thing",
                          relation=rest[1], reference=rest[2])
    raise IntegrityError(f"'{text}' is not produced by the goal grammar")


def enumerate_goals() -> Tuple[Goal, ...]:
    """The 256 achievable one-object goals, in grammar order."""
    phrases = [f"go {zone}" for zone in ZONE_NAMES]
    phrases += [f"grasp {c} {d}" for c in COLOR_WORDS for d in GRASP_DESCRIPTORS]
    phrases += [f"grasp any {c} thing" for c in COLORS]
    phrases += [f"grow {c} {d}" for c in COLOR_WORDS for d in GROW_DESCRIPTORS]
    phrases += [f"grow any {c} thing" for c in COLORS]
    return tuple(parse_goal(p) for p in phrases)


def enumerate_pair_goals() -> Tuple[Goal, ...]:
    """The 160 two-object grasp goals."""
    return tuple(
        parse_goal(f"grasp any {relation} {descriptor} thing")
        for relation in RELATIONS for descriptor in PAIR_DESCRIPTORS
    )


def restrict_goals(goals: Iterable[Goal], object_kinds: Sequence[str]) -> Tuple[Goal, ...]:
    """All go goals plus the grasp goals naming one of the given object types."""
    kinds = set(object_kinds)
    unknown = kinds - set(KIND_BY_NAME)
    if unknown:
        raise IntegrityError(f"Unknown object kinds: {sorted(unknown)}")
    return tuple(
        g for g in goals
        if g.predicate == "go"
        or (g.predicate == "grasp" and not g.is_pairwise and g.target in kinds)
    )
