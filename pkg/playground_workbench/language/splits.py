"""
Train/Test Goal Split

Partitions the achievable goals into G^train and G^test and checks the
partition against the manifest shipped with the package.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

from ..core.errors import IntegrityError, NotATestGoalError
from .grammar import TEST, TRAIN, Goal, enumerate_goals, enumerate_pair_goals

logger = logging.getLogger(__name__)

MANIFEST_DIR = Path(__file__).parent / "manifests"
GOAL_MANIFEST = MANIFEST_DIR / "goal_split.tsv"
PAIR_MANIFEST = MANIFEST_DIR / "pair_goal_split.tsv"

ManifestRow = Tuple[str, Optional[int]]


@dataclass(frozen=True)
class GoalSplit:
    """Disjoint training and testing goal sets."""

    train: Tuple[Goal, ...]
    test: Tuple[Goal, ...]

    @property
    def all(self) -> Tuple[Goal, ...]:
        return self.train + self.test


def load_manifest(path: Path) -> Dict[str, ManifestRow]:
    """Read `phrase <TAB> split <TAB> type` lines; '-' marks no type."""
    rows: Dict[str, ManifestRow] = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3 or parts[1] not in (TRAIN, TEST):
                    raise IntegrityError(f"{path.name}:{line_no}: malformed manifest line")
                phrase, split, gen_type = parts
                if phrase in rows:
                    raise IntegrityError(f"{path.name}:{line_no}: duplicate phrase '{phrase}'")
                rows[phrase] = (split, None if gen_type == "-" else int(gen_type))
    except OSError as e:
        logger.error(f"Goal manifest unreadable: {e}")
        raise IntegrityError(f"Cannot read goal manifest {path}: {e}") from e
    return rows


def _verify(goals: Iterable[Goal], manifest: Dict[str, ManifestRow], name: str) -> None:
    goals = tuple(goals)
    texts = {g.text for g in goals}
    missing = texts - set(manifest)
    extra = set(manifest) - texts
    if missing or extra:
        raise IntegrityError(
            f"{name} disagrees with the grammar: {len(missing)} missing, {len(extra)} unexpected"
        )
    for goal in goals:
        split, gen_type = manifest[goal.text]
        if (goal.split, goal.gen_type) != (split, gen_type):
            raise IntegrityError(
                f"{name}: '{goal.text}' is {goal.split}/{goal.gen_type}, "
                f"manifest says {split}/{gen_type}"
            )


def test_split(goals: Optional[Iterable[Goal]] = None,
               manifest_path: Path = GOAL_MANIFEST) -> GoalSplit:
    """Split the achievable goals, verified against the shipped manifest."""
    goals = tuple(goals) if goals is not None else enumerate_goals()
    _verify(goals, load_manifest(manifest_path), manifest_path.name)
    split = GoalSplit(
        train=tuple(g for g in goals if g.split == TRAIN),
        test=tuple(g for g in goals if g.split == TEST),
    )
    logger.debug(f"Goal split: {len(split.train)} train / {len(split.test)} test")
    return split


# Not a pytest test despite the name.
test_split.__test__ = False


def pair_split(manifest_path: Path = PAIR_MANIFEST) -> GoalSplit:
    """Split of the two-object goals, verified against its manifest."""
    goals = enumerate_pair_goals()
    _verify(goals, load_manifest(manifest_path), manifest_path.name)
    return GoalSplit(
        train=tuple(g for g in goals if g.split == TRAIN),
        test=tuple(g for g in goals if g.split == TEST),
    )


def generalization_type(goal: Goal) -> int:
    """Generalization type (1..5) of a held-out goal."""
    if goal.split != TEST or goal.gen_type is None:
        raise NotATestGoalError(f"'{goal.text}' is not a one-object test goal")
    return goal.gen_type
