"""
Trajectory Collection and Persistence

Runs goal-conditioned episodes and stores them as line-delimited JSON: one
header line, then one record per trajectory. State values are written as
fixed-width `%+.17e` decimals so the round trip is lossless. Files ending in
`.gz` are gzip-compressed. The field layout is documented in
`trajectory_schema.json` next to this module.
"""

import gzip
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import (
    DimensionError, NoTargetError, RejectedHintError, SchemaVersionError, TruncatedFileError,
)
from ..core.seeding import derive_seed
from ..language.grammar import Goal
from ..catalog import objects_in_state, state_size
from .scene import Action, Scene, WorldSettings, sample_scene, step
from .scripted_policy import scripted_policy_action
from .social_partner import describe

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SCHEMA_FILE = Path(__file__).parent / "trajectory_schema.json"
RECORD_FIELDS = ("seed", "goal_hint", "T", "states", "descriptions")
_FLOAT_FORMAT = "%+.17e"

PolicyFn = Callable[[Scene, Goal], Action]


@dataclass(frozen=True)
class Trajectory:
    """One episode: states s_0..s_T and the final-state descriptions."""

    seed: int
    goal_hint: Optional[str]
    states: np.ndarray
    descriptions: Tuple[str, ...]

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1

    @property
    def n_objects(self) -> int:
        return objects_in_state(self.states.shape[1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def collect_trajectory(policy: PolicyFn, goal: Optional[Goal], seed: int,
                       n_objects: int = 3, settings: Optional[WorldSettings] = None,
                       include_pairs: bool = False) -> Trajectory:
    """Run one full-horizon episode in a scene sampled with the goal as hint."""
    settings = settings or WorldSettings()
    scene = sample_scene(goal, n_objects, seed, settings)
    states = [scene.state_vector()]
    while not scene.finished:
        step(scene, policy(scene, goal))
        states.append(scene.state_vector())
    return Trajectory(
        seed=seed,
        goal_hint=goal.text if goal is not None else None,
        states=np.stack(states),
        descriptions=tuple(sorted(describe(scene, include_pairs=include_pairs))),
    )


def collect_scripted_dataset(goals: Sequence[Goal], count: int, master_seed: int,
                             n_objects: int = 3, settings: Optional[WorldSettings] = None,
                             include_pairs: bool = False, label: str = "trajectories") -> List[Trajectory]:
    """
    Collect `count` scripted-controller trajectories with uniformly drawn goal hints.

    Goals whose hint cannot be placed in the configured world are redrawn.
    """
    if not goals:
        raise RejectedHintError("no goals to collect trajectories for")
    settings = settings or WorldSettings()
    rng = np.random.default_rng(derive_seed(master_seed, label))
    trajectories: List[Trajectory] = []
    attempt = 0
    while len(trajectories) < count:
        goal = goals[int(rng.integers(len(goals)))]
        seed = derive_seed(master_seed, label, attempt)
        attempt += 1
        try:
            trajectories.append(collect_trajectory(
                scripted_policy_action, goal, seed, n_objects, settings, include_pairs))
        except (RejectedHintError, NoTargetError) as e:
            logger.debug(f"Skipped hint '{goal.text}' (seed {seed}): {e}")
            if attempt > 20 * max(count, 1):
                raise RejectedHintError("too many unsatisfiable goal hints") from e
            continue
        if len(trajectories) % 1000 == 0:
            logger.info(f"Collected {len(trajectories)}/{count} trajectories")
    return trajectories


def _open(path: Path, mode: str):
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def _encode_state(row: np.ndarray) -> str:
    return " ".join(_FLOAT_FORMAT % value for value in row)


def _decode_state(text: str) -> List[float]:
    return [float(value) for value in text.split()]


def persist_dataset(trajectories: Iterable[Trajectory], path) -> int:
    """
    Write trajectories to a dataset file.

    Returns:
        Number of trajectories written
    """
    trajectories = list(trajectories)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    state_dim = int(trajectories[0].states.shape[1]) if trajectories else 0
    if any(t.states.shape[1] != state_dim for t in trajectories):
        raise DimensionError("all trajectories of a dataset must share one object count")

    header = {
        "schema_version": SCHEMA_VERSION,
        "state_dim": state_dim,
        "n_objects": objects_in_state(state_dim) if state_dim else 0,
        "count": len(trajectories),
    }
    try:
        with _open(path, "w") as f:
            f.write(json.dumps(header, sort_keys=True) + "\n")
            for t in trajectories:
                record = {
                    "seed": int(t.seed),
                    "goal_hint": t.goal_hint,
                    "T": t.horizon,
                    "states": [_encode_state(row) for row in t.states],
                    "descriptions": list(t.descriptions),
                }
                f.write(json.dumps(record) + "\n")
    except OSError as e:
        logger.error(f"Writing dataset {path} failed: {e}")
        raise
    logger.info(f"Persisted {len(trajectories)} trajectories to {path}")
    return len(trajectories)


def _iter_lines(path: Path) -> Iterator[str]:
    try:
        with _open(path, "r") as f:
            for line in f:
                if line.strip():
                    yield line
    except (EOFError, gzip.BadGzipFile) as e:
        raise TruncatedFileError(f"{path} ends unexpectedly: {e}") from e


def load_trajectories(path, n_objects: Optional[int] = None) -> List[Trajectory]:
    """
    Read a dataset file, validating schema version, dimensions and record count.

    Args:
        path: Dataset file (optionally gzip-compressed)
        n_objects: Object count the caller expects, if any

    Raises:
        SchemaVersionError: Unknown schema version
        TruncatedFileError: Fewer records than the header announces, or a cut line
        DimensionError: State width disagrees with the header or with n_objects
    """
    path = Path(path)
    lines = _iter_lines(path)
    try:
        header = json.loads(next(lines))
    except StopIteration:
        raise TruncatedFileError(f"{path} is empty") from None
    except json.JSONDecodeError as e:
        raise TruncatedFileError(f"{path} has an unreadable header: {e}") from e

    if header.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{path} has schema version {header.get('schema_version')}, expected {SCHEMA_VERSION}"
        )
    state_dim = int(header["state_dim"])
    if n_objects is not None and state_dim != state_size(n_objects):
        raise DimensionError(
            f"{path} holds {header['n_objects']}-object states, configuration expects {n_objects}"
        )

    trajectories: List[Trajectory] = []
    for line_no, line in enumerate(lines, 2):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise TruncatedFileError(f"{path}:{line_no}: cut record") from e
        states = np.array([_decode_state(row) for row in record["states"]], dtype=np.float64)
        if states.ndim != 2 or states.shape[1] != state_dim or states.shape[0] != record["T"] + 1:
            raise DimensionError(f"{path}:{line_no}: state block has shape {states.shape}")
        trajectories.append(Trajectory(
            seed=int(record["seed"]),
            goal_hint=record["goal_hint"],
            states=states,
            descriptions=tuple(record["descriptions"]),
        ))

    if len(trajectories) != header["count"]:
        raise TruncatedFileError(f"{path}: header announces {header['count']} records, found {len(trajectories)}")
    logger.info(f"Loaded {len(trajectories)} trajectories from {path}")
    return trajectories
