"""
Success Rates and Reward F1 Reports

Success is judged by the oracle on the final state of each episode; the
learned reward function is only ever evaluated through F1.
"""

import logging
from typing import Optional, Sequence

from ..core.errors import RejectedHintError
from ..core.seeding import derive_seed
from ..environment.scene import WorldSettings, sample_scene, step
from ..language.grammar import Goal
from ..language.oracle import oracle_reward
from ..reward.architectures import RewardModel
from ..reward.dataset import RewardDataset
from ..reward.training import predict_f1
from .policies import GoalPolicy
from .report import EvalReport

logger = logging.getLogger(__name__)

EPISODES_PER_GOAL = 30


def run_episode(policy: GoalPolicy, goal: Goal, seed: int, n_objects: int,
                settings: WorldSettings) -> bool:
    """One noise-free episode; True iff the goal holds in the final state."""
    try:
        scene = sample_scene(goal, n_objects, seed, settings)
    except RejectedHintError as e:
        logger.debug(f"Hint '{goal.text}' rejected at N={n_objects} ({e}); unconditioned scene")
        scene = sample_scene(None, n_objects, seed, settings)
    while not scene.finished:
        step(scene, policy(scene, goal))
    return oracle_reward(scene.state_vector(), goal)


def success_rate(policy: GoalPolicy, goals: Sequence[Goal], episodes_per_goal: int = EPISODES_PER_GOAL,
                 seed: int = 0, n_objects: int = 3, settings: Optional[WorldSettings] = None,
                 label: str = "success") -> EvalReport:
    """
    Per-goal success rate over hint-conditioned episodes.

    Scene seeds depend on (seed, label, goal, episode) only, so two policies
    evaluated with the same seed face the same scenes.

    Args:
        policy: Evaluated policy (never given exploration noise)
        goals: Goals to evaluate
        episodes_per_goal: Episodes per goal
        seed: Master seed of the evaluation
        n_objects: Objects per scene
        settings: Arena constants

    Returns:
        EvalReport with one SR record per goal
    """
    settings = settings or WorldSettings()
    records = []
    for goal in goals:
        successes = 0
        for episode in range(episodes_per_goal):
            scene_seed = derive_seed(seed, f"{label}:{goal.text}", episode)
            successes += run_episode(policy, goal, scene_seed, n_objects, settings)
        records.append({
            "goal": goal.text,
            "split": goal.split,
            "gen_type": goal.gen_type,
            "metric": "SR",
            "value": successes / episodes_per_goal if episodes_per_goal else 0.0,
            "n_samples": episodes_per_goal,
        })
    report = EvalReport.from_records(records)
    logger.info(f"{getattr(policy, 'name', 'policy')} SR over {len(goals)} goals "
                f"(N={n_objects}): {report.mean():.3f}")
    return report


def reward_f1_report(model: RewardModel, dataset: RewardDataset,
                     goals: Optional[Sequence[Goal]] = None) -> EvalReport:
    """Per-goal F1 records of a reward model, annotated with split and type."""
    table = predict_f1(model, dataset, goals).per_goal
    records = [{
        "goal": row.goal,
        "split": row.split,
        "gen_type": row.gen_type,
        "metric": "F1",
        "value": row.f1,
        "n_samples": row.n_samples,
    } for row in table.itertuples(index=False)]
    return EvalReport.from_records(records)
