"""
Run configuration management

Flat key-value settings with a fixed table of defaults. Files are read with
pyyaml (JSON files are valid YAML, so `config.json` still works); command-line
overrides win over the file, which wins over the defaults.
"""

import logging
import os
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, Iterator, Mapping, Optional

import numpy as np
import yaml

from .. import __version__
from .errors import ConfigError

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "PLAYGROUND_DATA_DIR"
RESOLVED_CONFIG_NAME = "resolved_config.yaml"

DEFAULT_SETTINGS: Dict[str, Any] = {
    # provenance and io
    "seed": 0,
    "out": "",
    "data": "",
    "log_level": "INFO",
    # world
    "n_objects": 3,
    "horizon": 50,
    "world_bound": 1.0,
    "step_max": 0.15,
    "contact_radius": 0.1,
    "grow_gain": 0.3,
    "size_max": 1.0,
    "object_kinds": [],
    "goal_set": "full",
    "oov_words": [],
    # architectures
    "variant": "ma",
    "precision": "float32",
    "word_embedding": 32,
    "lstm_hidden": 100,
    "object_hidden": [256, 256],
    "flat_hidden": [256, 256],
    "or_hidden": 64,
    "or_width": 3,
    "or_input_gain": 12.0,
    "aggregation": "or_net",
    "freeze_or": True,
    # supervised reward learning
    "trajectories": 5000,
    "test_trajectories": 1000,
    "states_per_test_trajectory": 5,
    "epochs": 30,
    "batches_per_epoch": 200,
    "reward_batch_size": 256,
    "reward_lr": 0.001,
    "or_pretrain_steps": 4000,
    "or_batch_size": 512,
    "or_lr": 0.003,
    "or_accuracy_threshold": 0.995,
    # reinforcement learning
    "episodes": 3000,
    "bootstrap_episodes": 100,
    "scripted_eps": 0.2,
    "batch_size": 256,
    "policy_lr": 0.001,
    "critic_lr": 0.001,
    "gamma": 0.98,
    "tau": 0.05,
    "noise_sigma": 0.2,
    "noise_clip": 0.5,
    "action_l2": 0.1,
    "replay_capacity": 100000,
    "reward_memory_capacity": 50000,
    "reward_update_every": 10,
    "reward_updates": 50,
    "rl_updates_per_episode": 20,
    "hindsight_scan": 50,
    "p_pos": 0.5,
    # evaluation
    "eval_every": 250,
    "episodes_per_goal": 30,
    "n_values": [3, 4, 5, 6, 7, 8, 9, 10],
    "suite": "test",
    "agent_checkpoint": "",
    "reward_checkpoint": "",
    "or_checkpoint": "",
}

CHOICES: Dict[str, tuple] = {
    "variant": ("ma", "fa", "fc", "pair"),
    "precision": ("float32", "float64"),
    "aggregation": ("or_net", "max"),
    "goal_set": ("full", "reduced"),
    "suite": ("train", "test", "vary-n", "per-type", "pairwise"),
    "log_level": ("DEBUG", "INFO", "WARNING", "ERROR"),
}

FULL_SCALE_TRAJECTORIES = 50000

# Default kinds of the reduced desk-scale study (all go goals + grasp goals).
REDUCED_OBJECT_KINDS = ["dog", "cat", "lion", "cactus", "tree", "sofa", "door", "water"]


def _check_type(key: str, value: Any) -> Any:
    """Coerce a value to the type of its default or raise ConfigError."""
    default = DEFAULT_SETTINGS[key]
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"Setting '{key}' expects true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"Setting '{key}' expects an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"Setting '{key}' expects a number, got {value!r}")
        return float(value)
    if isinstance(default, list):
        if isinstance(value, (str, bytes)) or not isinstance(value, (list, tuple)):
            raise ConfigError(f"Setting '{key}' expects a list, got {value!r}")
        return list(value)
    if not isinstance(value, str):
        raise ConfigError(f"Setting '{key}' expects a string, got {value!r}")
    if key in CHOICES and value not in CHOICES[key]:
        raise ConfigError(f"Setting '{key}' must be one of {CHOICES[key]}, got {value!r}")
    return value


class RunConfig(Mapping):
    """Validated, read-only view of the resolved settings of one run."""

    def __init__(self, settings: Optional[Mapping[str, Any]] = None):
        self._settings = deepcopy(DEFAULT_SETTINGS)
        if settings:
            self._apply(settings, source="overrides")
        self._check_consistency()

    @classmethod
    def from_file(cls, config_path: Optional[str] = None,
                  overrides: Optional[Mapping[str, Any]] = None) -> "RunConfig":
        """Load a flat YAML/JSON configuration file and apply overrides."""
        merged: Dict[str, Any] = {}
        if config_path:
            try:
                with open(config_path, "r", encoding="utf-8") as f:
                    loaded = yaml.safe_load(f) or {}
            except (OSError, yaml.YAMLError) as e:
                logger.error(f"Configuration loading failed: {e}")
                raise ConfigError(f"Cannot read configuration '{config_path}': {e}") from e
            if not isinstance(loaded, dict):
                raise ConfigError(f"Configuration '{config_path}' must be a flat mapping")
            loaded.pop("code_version", None)
            merged.update(loaded)
            logger.info(f"Loaded {len(loaded)} settings from {config_path}")
        if overrides:
            merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls(merged)

    def _apply(self, settings: Mapping[str, Any], source: str) -> None:
        unknown = sorted(set(settings) - set(DEFAULT_SETTINGS))
        if unknown:
            raise ConfigError(f"Unknown settings in {source}: {', '.join(unknown)}")
        for key, value in settings.items():
            if isinstance(value, dict):
                raise ConfigError(f"Setting '{key}' is nested; configuration must be flat")
            self._settings[key] = _check_type(key, value)

    def _check_consistency(self) -> None:
        s = self._settings
        if s["n_objects"] < 1:
            raise ConfigError("n_objects must be at least 1")
        if s["variant"] == "pair" and s["n_objects"] < 2:
            raise ConfigError("the pair variant needs at least 2 objects")
        if s["horizon"] < 1:
            raise ConfigError("horizon must be positive")
        if not 0.0 <= s["p_pos"] <= 1.0:
            raise ConfigError("p_pos must lie in [0, 1]")
        if not 0.0 < s["tau"] <= 1.0:
            raise ConfigError("tau must lie in (0, 1]")
        if s["or_width"] < 1:
            raise ConfigError("or_width must be positive")

    def replace(self, **changes: Any) -> "RunConfig":
        """Return a copy with some settings changed."""
        merged = deepcopy(self._settings)
        merged.update(changes)
        return RunConfig(merged)

    def __getitem__(self, key: str) -> Any:
        return self._settings[key]

    def __getattr__(self, key: str) -> Any:
        if key.startswith("_"):
            raise AttributeError(key)
        try:
            return self._settings[key]
        except KeyError:
            raise AttributeError(key) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._settings)

    def __len__(self) -> int:
        return len(self._settings)

    def as_dict(self) -> Dict[str, Any]:
        return deepcopy(self._settings)

    @property
    def dtype(self):
        return np.float32 if self._settings["precision"] == "float32" else np.float64

    def object_kinds_or_default(self) -> list:
        """Kinds allowed in scenes; the reduced goal set implies its own catalog."""
        if self._settings["object_kinds"]:
            return list(self._settings["object_kinds"])
        if self._settings["goal_set"] == "reduced":
            return list(REDUCED_OBJECT_KINDS)
        return []

    def write_resolved(self, out_dir: str) -> Path:
        """Write the resolved settings plus the code version next to the outputs."""
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        target = path / RESOLVED_CONFIG_NAME
        document = {"code_version": __version__, **self._settings}
        with open(target, "w", encoding="utf-8") as f:
            yaml.safe_dump(document, f, sort_keys=True)
        logger.debug(f"Resolved configuration written to {target}")
        return target


def default_data_root() -> str:
    """Data root from PLAYGROUND_DATA_DIR, falling back to ./data."""
    return os.environ.get(DATA_DIR_ENV, "data")
