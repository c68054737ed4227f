"""
Joint Training Loop

Each episode the goal generator draws a target uniformly from the discovered
goals (scripted bootstrap episodes draw from the training goals instead), the
agent acts, the social partner describes the final state and the memories
grow. Every `reward_update_every` episodes the reward model and its language
model are updated from the reward memory; after each episode the actor-critic
learns from hindsight-relabelled replay. Every `eval_every` episodes the
policy and the reward model are evaluated offline.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..core.config import RunConfig
from ..core.errors import RejectedHintError
from ..core.seeding import derive_seed, make_rng
from ..core.utils import write_records
from ..environment.trajectories import collect_scripted_dataset
from ..evaluation.policies import AgentPolicy
from ..evaluation.success import success_rate
from ..language.grammar import Goal
from ..reward.architectures import RewardModel
from ..reward.dataset import RewardDataset, any_step_set
from ..reward.training import predict_f1
from .agent import Agent, EpisodeResult

logger = logging.getLogger(__name__)

METRICS_FILE = "imagine_records.jsonl"


@dataclass
class ImagineResult:
    agent: Agent
    records: List[Dict[str, Any]] = field(default_factory=list)


def _episode(agent: Agent, config: RunConfig, train_goals: Sequence[Goal], episode: int,
             goal_rng: np.random.Generator, bootstrap_rng: np.random.Generator) -> EpisodeResult:
    scripted = (episode < config["bootstrap_episodes"] or len(agent.registry) == 0
                or bootstrap_rng.random() < config["scripted_eps"])
    if scripted:
        goal, mode = train_goals[int(goal_rng.integers(len(train_goals)))], "scripted"
    else:
        goal, mode = agent.registry.sample(goal_rng), "agent"
    seed = derive_seed(config["seed"], "imagine-episode", episode)
    try:
        return agent.rollout(goal, seed, mode=mode)
    except RejectedHintError as e:
        logger.debug(f"Episode {episode}: hint '{goal.text}' rejected ({e}); unconditioned scene")
        return agent.rollout(goal, seed, mode=mode, hint=False)


def _evaluation_set(config: RunConfig, goals: Sequence[Goal], agent: Agent) -> RewardDataset:
    trajectories = collect_scripted_dataset(goals, config["test_trajectories"], config["seed"],
                                            n_objects=config["n_objects"], settings=agent.settings,
                                            label="imagine-eval")
    return any_step_set(trajectories, goals, make_rng(config["seed"], "imagine-eval-states"),
                        config["states_per_test_trajectory"])


def evaluate_agent(agent: Agent, config: RunConfig, train_goals: Sequence[Goal],
                   test_goals: Sequence[Goal], eval_set: RewardDataset,
                   episode: int, epoch: int) -> List[Dict[str, Any]]:
    """SR and F1 on the train and test goals as metric records."""
    policy = AgentPolicy(agent)
    records = []
    for split, goals in (("train", train_goals), ("test", test_goals)):
        if not goals:
            continue
        sr = success_rate(policy, goals, config["episodes_per_goal"], seed=config["seed"],
                          n_objects=config["n_objects"], settings=agent.settings, label=f"imagine-{split}")
        f1 = predict_f1(agent.reward_model, eval_set, goals).mean
        records.append({"episode": episode, "epoch": epoch, "metric": f"SR_{split}", "split": split,
                        "value": sr.mean()})
        records.append({"episode": episode, "epoch": epoch, "metric": f"F1_{split}", "split": split,
                        "value": f1})
    records.append({"episode": episode, "epoch": epoch, "metric": "discovered_goals", "split": "train",
                    "value": len(agent.registry)})
    summary = " ".join(f"{r['metric']}={r['value']:.3f}" for r in records)
    logger.info(f"Evaluation epoch {epoch} (episode {episode}): {summary}")
    return records


def imagine_train(config: RunConfig, reward_model: RewardModel, train_goals: Sequence[Goal],
                  test_goals: Sequence[Goal] = (), out_dir: Optional[str] = None) -> ImagineResult:
    """
    Train an agent and its reward model together from social-partner feedback.

    Args:
        config: Run settings (episodes, cadences, learning rates, world)
        reward_model: Reward model learned alongside the policy (usually untrained)
        train_goals: Goals the social partner may describe
        test_goals: Held-out goals, only ever evaluated
        out_dir: Directory receiving the metric records and the agent checkpoint

    Returns:
        ImagineResult with the trained agent and its metric records
    """
    train_goals, test_goals = tuple(train_goals), tuple(test_goals)
    if not train_goals:
        raise ValueError("joint training needs at least one training goal")
    agent = Agent(config, reward_model, allowed_goals=train_goals)
    goal_rng = make_rng(config["seed"], "goal-generator")
    bootstrap_rng = make_rng(config["seed"], "bootstrap")
    eval_set = _evaluation_set(config, train_goals + test_goals, agent)
    result = ImagineResult(agent=agent)
    epoch = 0

    logger.info(f"Joint training: {config['episodes']} episodes, {agent.variant} agent, "
                f"{reward_model.variant} reward model, {len(train_goals)} train / {len(test_goals)} test goals")
    for episode in range(config["episodes"]):
        _episode(agent, config, train_goals, episode, goal_rng, bootstrap_rng)

        if (episode + 1) % config["reward_update_every"] == 0:
            agent.update_reward_model()

        if len(agent.registry) and len(agent.replay) >= config["batch_size"]:
            losses = [agent.rl_update(agent.sample_batch()) for _ in range(config["rl_updates_per_episode"])]
            if losses:
                logger.debug(f"Episode {episode}: critic loss {np.mean([u['critic_loss'] for u in losses]):.4f}, "
                             f"actor loss {np.mean([u['actor_loss'] for u in losses]):.4f}")

        if (episode + 1) % config["eval_every"] == 0 or episode + 1 == config["episodes"]:
            epoch += 1
            result.records.extend(evaluate_agent(agent, config, train_goals, test_goals, eval_set,
                                                 episode + 1, epoch))

    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_records(result.records, str(out / METRICS_FILE))
        agent.save(out / "agent.npz")
    return result
