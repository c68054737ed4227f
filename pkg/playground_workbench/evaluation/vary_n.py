"""
Varying the Number of Objects

Evaluates an agent trained with N objects in scenes with other object counts:
policy success rates on train and test goals, and reward F1 on oracle-labelled
states with the object aggregation replaced by the exact max.
"""

import logging
from typing import TYPE_CHECKING, List, Optional, Sequence

import pandas as pd

from ..core.errors import UnsupportedVariantError
from ..core.seeding import derive_seed, make_rng
from ..environment.scene import WorldSettings
from ..environment.trajectories import collect_scripted_dataset
from ..language.grammar import Goal
from ..reward.architectures import RewardModel
from ..reward.dataset import any_step_set
from .policies import AgentPolicy
from .success import EPISODES_PER_GOAL, reward_f1_report, success_rate

if TYPE_CHECKING:
    from ..agent.agent import Agent

logger = logging.getLogger(__name__)

DEFAULT_N_VALUES = (3, 4, 5, 6, 7, 8, 9, 10)


def vary_n_eval(agent: Optional["Agent"], reward_model: Optional[RewardModel],
                train_goals: Sequence[Goal], test_goals: Sequence[Goal],
                n_values: Sequence[int] = DEFAULT_N_VALUES, seed: int = 0,
                episodes_per_goal: int = EPISODES_PER_GOAL, settings: Optional[WorldSettings] = None,
                trajectories_per_n: int = 200, states_per_trajectory: int = 5) -> pd.DataFrame:
    """
    Curve records {n_objects, metric, split, value} for every N.

    Args:
        agent: Agent whose policy is evaluated (None skips success rates)
        reward_model: Reward model evaluated with exact-max aggregation (None skips F1)
        train_goals, test_goals: Goals evaluated per split
        n_values: Object counts
        trajectories_per_n: Scripted trajectories collected per N for the F1 states

    Raises:
        UnsupportedVariantError: The agent or reward model is not object-modular
    """
    if agent is not None and agent.variant != "ma":
        raise UnsupportedVariantError(f"varying N needs an ma agent, got '{agent.variant}'")
    exact = reward_model.exact_max_view() if reward_model is not None else None
    settings = settings or WorldSettings()
    goals = tuple(train_goals) + tuple(test_goals)
    records: List[dict] = []

    for n in n_values:
        if agent is not None:
            policy = AgentPolicy(agent)
            for split, split_goals in (("train", train_goals), ("test", test_goals)):
                report = success_rate(policy, split_goals, episodes_per_goal, seed, n, settings,
                                      label=f"vary-n:{n}")
                records.append({"n_objects": n, "metric": "SR", "split": split, "value": report.mean()})
        if exact is not None:
            trajectories = collect_scripted_dataset(goals, trajectories_per_n, derive_seed(seed, "vary-n", n),
                                                    n_objects=n, settings=settings, label=f"vary-n:{n}")
            dataset = any_step_set(trajectories, goals, make_rng(seed, "vary-n-states", n),
                                   states_per_trajectory)
            report = reward_f1_report(exact, dataset)
            for split in ("train", "test"):
                records.append({"n_objects": n, "metric": "F1", "split": split, "value": report.mean(split)})
        logger.info(f"Varying N: finished N={n}")
    return pd.DataFrame(records, columns=["n_objects", "metric", "split", "value"])
