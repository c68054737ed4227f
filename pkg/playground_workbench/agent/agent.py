"""
Agent

Policy, critic, their target copies and optimisers, a reference to the
reward model (whose language model embeds goals for everyone), the discovered
goal registry and both memories.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import RunConfig
from ..core.errors import NoTargetError, NonFiniteLossError, UnsupportedVariantError
from ..core.seeding import make_rng
from ..environment.scene import Action, WorldSettings, sample_scene, step
from ..environment.scripted_policy import random_action, scripted_policy_action
from ..environment.social_partner import SocialPartner
from ..environment.trajectories import Trajectory
from ..language.grammar import Goal, parse_goal
from ..neural.checkpoint import load_into, module_tensors, read_checkpoint, save_checkpoint
from ..neural.layers import clone, soft_update
from ..neural.losses import mean_squared_error
from ..neural.optim import Adam
from ..reward.architectures import RewardModel
from ..reward.language_model import embed_goal_batch
from ..reward.training import reward_training_step
from .hindsight import RLBatch, hindsight_relabel
from .memory import GoalRegistry, ReplayMemory, RewardMemory, Transition
from .networks import Critic, Policy

logger = logging.getLogger(__name__)

ROLLOUT_MODES = ("agent", "scripted", "random")


@dataclass
class EpisodeResult:
    trajectory: Trajectory
    new_goals: List[Goal]
    mode: str


class Agent:
    """Goal-conditioned learner: acts, listens to the social partner and learns from what it hears."""

    def __init__(self, config: RunConfig, reward_model: RewardModel,
                 allowed_goals: Optional[Sequence[Goal]] = None):
        self.config = config
        self.reward_model = reward_model
        self.settings = WorldSettings.from_config(config)
        goal_dim = reward_model.lm.out_features
        init_rng = make_rng(config["seed"], "agent-init")

        self.policy = Policy.from_config(config, goal_dim, init_rng)
        self.critic = Critic.from_config(config, goal_dim, init_rng)
        self.policy_target = clone(self.policy)
        self.critic_target = clone(self.critic)
        self.policy_optimizer = Adam(self.policy, lr=config["policy_lr"])
        self.critic_optimizer = Adam(self.critic, lr=config["critic_lr"])
        self.reward_optimizer = Adam(reward_model, lr=config["reward_lr"])

        self.registry = GoalRegistry()
        self.replay = ReplayMemory(config["replay_capacity"])
        self.reward_memory = RewardMemory(config["reward_memory_capacity"])
        self.social_partner = SocialPartner(allowed_goals)

        self.exploration_rng = make_rng(config["seed"], "exploration")
        self.replay_rng = make_rng(config["seed"], "replay")
        self.hindsight_rng = make_rng(config["seed"], "hindsight")
        self.reward_rng = make_rng(config["seed"], "reward-updates")
        self.episodes = 0

    @property
    def variant(self) -> str:
        return self.policy.variant

    # -- acting ----------------------------------------------------------------

    def embed(self, goals: Sequence[Goal]) -> np.ndarray:
        """Goal embeddings from the reward model's language model (no gradient kept)."""
        g, _ = embed_goal_batch(self.reward_model.lm, [goal.tokens for goal in goals])
        return g

    def act(self, state: np.ndarray, g: np.ndarray, explore: bool = False) -> np.ndarray:
        """
        Action in [-1, 1]^3 for one state and goal embedding.

        With explore, clipped Gaussian noise is added to every component.
        """
        action = self.policy.act(np.asarray(state)[None, :], np.asarray(g)[None, :])[0].astype(np.float64)
        if explore:
            noise = self.exploration_rng.normal(0.0, self.config["noise_sigma"], size=action.shape)
            noise = np.clip(noise, -self.config["noise_clip"], self.config["noise_clip"])
            action = np.clip(action + noise, -1.0, 1.0)
        return action

    def rollout(self, goal: Optional[Goal], seed: int, mode: str = "agent",
                n_objects: Optional[int] = None, learn: bool = True, hint: bool = True) -> EpisodeResult:
        """
        One full-horizon episode in a scene sampled with the goal as hint.

        With learn, the social partner describes the final state, new goals
        enter the registry, transitions go to the replay memory and the final
        state with its descriptions goes to the reward memory.

        Args:
            goal: Targeted goal (None samples an unconditioned scene; agent mode needs a goal)
            seed: Scene seed
            mode: agent (noisy policy), scripted (oracle controller) or random
            hint: Condition the scene on the goal
        """
        if mode not in ROLLOUT_MODES:
            raise ValueError(f"unknown rollout mode '{mode}'")
        if mode == "agent" and goal is None:
            raise ValueError("the agent needs a goal to act upon")
        n_objects = n_objects or self.config["n_objects"]
        scene = sample_scene(goal if hint else None, n_objects, seed, self.settings)
        g = self.embed([goal])[0] if mode == "agent" else None
        episode = self.episodes

        states = [scene.state_vector()]
        transitions = []
        while not scene.finished:
            if mode == "agent":
                values = self.act(states[-1], g, explore=True)
                action = Action.from_array(values, self.settings.step_max)
            else:
                action = self._non_agent_action(scene, goal, mode)
                values = action.to_array(self.settings.step_max)
            step(scene, action)
            states.append(scene.state_vector())
            transitions.append(Transition(
                state=states[-2], action=values, next_state=states[-1],
                goal=goal.text if goal is not None else None, episode=episode, done=scene.finished,
            ))

        descriptions = self.social_partner.describe(scene)
        trajectory = Trajectory(seed=seed, goal_hint=goal.text if goal is not None else None,
                                states=np.stack(states), descriptions=tuple(sorted(descriptions)))
        new_goals: List[Goal] = []
        if learn:
            new_goals = self.registry.add(descriptions, episode)
            self.replay.extend(transitions)
            self.reward_memory.append(states[-1], descriptions)
            self.episodes += 1
        return EpisodeResult(trajectory=trajectory, new_goals=new_goals, mode=mode)

    def _non_agent_action(self, scene, goal: Optional[Goal], mode: str) -> Action:
        if mode == "scripted" and goal is not None:
            try:
                return scripted_policy_action(scene, goal)
            except NoTargetError:
                pass
        return random_action(self.exploration_rng, self.settings.step_max)

    # -- learning ---------------------------------------------------------------

    def update_reward_model(self, updates: Optional[int] = None,
                            batch_size: Optional[int] = None) -> Optional[float]:
        """Reward-model (and language-model) updates on balanced batches of the reward memory."""
        if len(self.registry) == 0 or len(self.reward_memory) == 0:
            return None
        dataset = self.reward_memory.to_dataset(self.registry.goals)
        updates = updates or self.config["reward_updates"]
        batch_size = batch_size or self.config["reward_batch_size"]
        losses = []
        for _ in range(updates):
            states, goal_index, labels = dataset.balanced_batch(self.reward_rng, batch_size)
            tokens = [dataset.goals[k].tokens for k in goal_index]
            losses.append(reward_training_step(self.reward_model, self.reward_optimizer, states, tokens, labels))
        mean_loss = float(np.mean(losses))
        logger.debug(f"Reward model: {updates} updates on {len(dataset)} states, loss {mean_loss:.4f}")
        return mean_loss

    def sample_batch(self, batch_size: Optional[int] = None) -> RLBatch:
        batch = self.replay.sample(self.replay_rng, batch_size or self.config["batch_size"])
        return hindsight_relabel(batch, self.registry, self.reward_model, self.hindsight_rng,
                                 scan=self.config["hindsight_scan"], p_pos=self.config["p_pos"])

    def rl_update(self, batch: RLBatch) -> Dict[str, float]:
        """
        One actor-critic step on a relabelled batch, then soft target updates.

        Raises:
            NonFiniteLossError: A loss or gradient is NaN or infinite
        """
        gamma = self.config["gamma"]
        g = batch.embeddings
        next_actions, _ = self.policy_target.forward(batch.next_states, g)
        next_q, _ = self.critic_target.forward(batch.next_states, next_actions, g)
        targets = batch.rewards + gamma * (1.0 - batch.dones) * next_q
        targets = np.clip(targets, 0.0, 1.0 / (1.0 - gamma))

        try:
            q, critic_tape = self.critic.forward(batch.states, batch.actions, g)
            critic_loss, dq = mean_squared_error(q, targets)
            _, critic_grads = self.critic.backward(critic_tape, dq)
            self.critic_optimizer.step(critic_grads, critic_loss)

            actions, policy_tape = self.policy.forward(batch.states, g)
            q_pi, q_tape = self.critic.forward(batch.states, actions, g)
            l2 = self.config["action_l2"]
            actor_loss = float(-q_pi.mean() + l2 * np.mean(actions * actions))
            (_, dactions, _), _ = self.critic.backward(q_tape, np.full_like(q_pi, -1.0 / len(q_pi)))
            dactions = dactions + l2 * 2.0 * actions / actions.size
            _, policy_grads = self.policy.backward(policy_tape, dactions)
            self.policy_optimizer.step(policy_grads, actor_loss)
        except NonFiniteLossError:
            logger.error(f"Non-finite actor-critic update: reward mean {batch.rewards.mean():.3f}, "
                         f"target range [{targets.min():.3f}, {targets.max():.3f}], "
                         f"state range [{batch.states.min():.3f}, {batch.states.max():.3f}]")
            raise

        tau = self.config["tau"]
        soft_update(self.policy_target, self.policy, tau)
        soft_update(self.critic_target, self.critic, tau)
        return {"critic_loss": critic_loss, "actor_loss": actor_loss,
                "q_mean": float(q.mean()), "positive_fraction": batch.positive_fraction}

    # -- persistence ------------------------------------------------------------

    _PARTS = ("policy", "critic", "policy_target", "critic_target", "reward_model")

    def save(self, path, extra_meta: Optional[Dict[str, Any]] = None):
        tensors: Dict[str, np.ndarray] = {}
        for part in self._PARTS:
            tensors.update(module_tensors(getattr(self, part), prefix=f"{part}."))
        meta = {
            "kind": "agent",
            "variant": self.variant,
            "episodes": self.episodes,
            "config": self.config.as_dict(),
            "reward_model": self.reward_model.meta(),
            "registry": self.registry.to_records(),
            "allowed_goals": sorted(self.social_partner.allowed) if self.social_partner.allowed else None,
            **(extra_meta or {}),
        }
        return save_checkpoint(path, tensors, meta)

    @classmethod
    def load(cls, path) -> Tuple["Agent", Dict[str, Any]]:
        """Rebuild an agent (and its reward model) from a checkpoint."""
        tensors, meta = read_checkpoint(path)
        if meta.get("kind") != "agent":
            raise UnsupportedVariantError(f"{path} is not an agent checkpoint")
        config = RunConfig(meta["config"])
        rm = meta["reward_model"]
        reward_model = RewardModel(
            variant=rm["variant"], vocab_size=rm["vocab_size"], n_train=rm["n_train"],
            embedding_dim=rm["embedding_dim"], lstm_hidden=rm["lstm_hidden"],
            object_hidden=rm["object_hidden"], flat_hidden=rm["flat_hidden"], or_hidden=rm["or_hidden"],
            or_width=rm["or_width"], or_input_gain=rm["or_input_gain"], aggregation=rm["aggregation"],
            freeze_or=rm["freeze_or"], dtype=rm["dtype"],
        )
        allowed = meta.get("allowed_goals")
        agent = cls(config, reward_model, [parse_goal(t) for t in allowed] if allowed else None)
        for part in cls._PARTS:
            load_into(getattr(agent, part), tensors, prefix=f"{part}.")
        agent.registry = GoalRegistry.from_records(meta["registry"])
        agent.episodes = int(meta["episodes"])
        logger.info(f"Loaded {agent.variant} agent from {path} ({len(agent.registry)} discovered goals)")
        return agent, meta
