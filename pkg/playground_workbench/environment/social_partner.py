"""
Social Partner

Hard-coded descriptor of a scene: every grammar phrase that is true in it.
Phrases are produced directly from the scene objects; the oracle in
`language.oracle` decides the same predicates from the state vector alone,
which lets the two be checked against each other.
"""

import logging
from typing import Iterable, List, Optional, Set

from ..catalog import RELATIONS, ZONES
from ..language.grammar import Goal
from ..language.oracle import relation_holds
from .scene import ObjectState, Scene

logger = logging.getLogger(__name__)


def _descriptor_words(obj: ObjectState) -> List[str]:
    return [obj.kind.name] + list(obj.kind.categories)


def _object_phrases(predicate: str, obj: ObjectState) -> Set[str]:
    phrases = {f"{predicate} {color} {word}"
               for color in ("any", obj.color_name) for word in _descriptor_words(obj)}
    phrases.add(f"{predicate} any {obj.color_name} thing")
    return phrases


def _pair_phrases(scene: Scene, held_index: int) -> Set[str]:
    phrases = set()
    held_start = scene.initial_position(held_index)
    for j, other in enumerate(scene.objects):
        if j == held_index:
            continue
        reference_start = scene.initial_position(j)
        references = [other.color_name] + _descriptor_words(other)
        for relation in RELATIONS:
            if relation_holds(relation, held_start, reference_start):
                phrases.update(f"grasp any {relation} {ref} thing" for ref in references)
    return phrases


def describe(scene: Scene, include_pairs: bool = False) -> Set[str]:
    """
    All grammar phrases true in the scene.

    Args:
        scene: Scene to describe (usually at its final step)
        include_pairs: Also emit the two-object "grasp any <relation> ..." phrases

    Returns:
        Set of phrases
    """
    phrases = {f"go {name}" for name, zone in ZONES.items() if zone.contains(scene.body.position)}

    for index, obj in enumerate(scene.objects):
        if obj.grasped:
            phrases |= _object_phrases("grasp", obj)
            if include_pairs:
                phrases |= _pair_phrases(scene, index)
        if obj.kind.is_living and obj.size > scene.initial_sizes[index]:
            phrases |= _object_phrases("grow", obj)

    return phrases


class SocialPartner:
    """Describes final states, restricted to the goals it may talk about."""

    def __init__(self, allowed_goals: Optional[Iterable[Goal]] = None, include_pairs: bool = False):
        self.allowed = None if allowed_goals is None else frozenset(g.text for g in allowed_goals)
        self.include_pairs = include_pairs

    def describe(self, scene: Scene) -> Set[str]:
        phrases = describe(scene, include_pairs=self.include_pairs)
        if self.allowed is not None:
            phrases &= self.allowed
        logger.debug(f"Social partner described {len(phrases)} goals")
        return phrases

