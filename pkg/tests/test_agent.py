import numpy as np
import pytest

from playground_workbench.agent.agent import Agent
from playground_workbench.agent.hindsight import goal_embeddings, hindsight_relabel
from playground_workbench.agent.imagine import METRICS_FILE, imagine_train
from playground_workbench.agent.memory import (
    GoalRegistry, ReplayMemory, RewardMemory, Transition,
)
from playground_workbench.agent.networks import Critic, Policy, policy_variant
from playground_workbench.core.errors import DimensionError, EmptyRegistryError, UnsupportedVariantError
from playground_workbench.core.utils import read_records
from playground_workbench.neural.gradcheck import grad_check
from playground_workbench.reward.or_network import THRESHOLD

GOAL_DIM = 10


def small_policy(variant, rng):
    return Policy(variant, n_train=3, goal_dim=GOAL_DIM, object_hidden=(12, 12), flat_hidden=(12, 12), rng=rng)


def small_critic(variant, rng, zero_last=False):
    return Critic(variant, n_train=3, goal_dim=GOAL_DIM, object_hidden=(12, 12), flat_hidden=(12, 12),
                  rng=rng, zero_last=zero_last)


def transition(state_width=240, episode=0, goal="go top", done=False, fill=0.0):
    return Transition(state=np.full(state_width, fill), action=np.full(3, fill), next_state=np.full(state_width, fill),
                      goal=goal, episode=episode, done=done)


class TestNetworks:
    def test_policy_variant(self):
        assert policy_variant("pair") == "ma"
        assert policy_variant("fc") == "fc"

    @pytest.mark.parametrize("variant", ["ma", "fa", "fc"])
    def test_policy_gradients(self, variant, rng, random_states):
        policy = small_policy(variant, rng)
        states = random_states(3) + rng.normal(scale=0.05, size=(3, 240))
        report = grad_check(policy, [states, rng.normal(size=(3, GOAL_DIM))])
        assert report.passed, report.errors

    @pytest.mark.parametrize("variant", ["ma", "fa", "fc"])
    def test_critic_gradients(self, variant, rng, random_states):
        critic = small_critic(variant, rng)
        states = random_states(3) + rng.normal(scale=0.05, size=(3, 240))
        report = grad_check(critic, [states, rng.uniform(-1, 1, size=(3, 3)), rng.normal(size=(3, GOAL_DIM))])
        assert report.passed, report.errors

    def test_actions_are_bounded(self, rng, random_states):
        actions = small_policy("ma", rng).act(random_states(8) * 50.0, rng.normal(size=(8, GOAL_DIM)))
        assert actions.shape == (8, 3)
        assert np.all(np.abs(actions) <= 1.0)

    def test_object_order_does_not_matter(self, rng, random_states, permute_objects):
        policy, critic = small_policy("ma", rng), small_critic("ma", rng)
        states = random_states(4, 5)
        shuffled = permute_objects(states, [4, 2, 0, 1, 3])
        g = rng.normal(size=(4, GOAL_DIM))
        actions = rng.uniform(-1, 1, size=(4, 3))
        np.testing.assert_allclose(policy.act(states, g), policy.act(shuffled, g), atol=1e-6)
        np.testing.assert_allclose(critic.forward(states, actions, g)[0],
                                   critic.forward(shuffled, actions, g)[0], atol=1e-5)

    @pytest.mark.parametrize("variant", ["fa", "fc"])
    def test_flat_networks_reject_other_object_counts(self, variant, rng, random_states):
        with pytest.raises(DimensionError):
            small_policy(variant, rng).act(random_states(2, 4), rng.normal(size=(2, GOAL_DIM)))

    def test_latent(self, rng, random_states):
        policy = small_policy("ma", rng)
        assert policy.latent(random_states(2), rng.normal(size=(2, GOAL_DIM))).shape == (2, 3 * 84)
        with pytest.raises(UnsupportedVariantError):
            small_policy("fc", rng).latent(random_states(2), rng.normal(size=(2, GOAL_DIM)))

    def test_zero_last_critic(self, rng, random_states):
        q, _ = small_critic("ma", rng, zero_last=True).forward(random_states(3), np.zeros((3, 3)),
                                                              rng.normal(size=(3, GOAL_DIM)))
        np.testing.assert_array_equal(q, 0.0)

    def test_unknown_variant(self, rng):
        with pytest.raises(UnsupportedVariantError):
            small_policy("pair", rng)


class TestMemories:
    def test_replay_ring_buffer(self, rng):
        memory = ReplayMemory(3)
        for episode in range(5):
            memory.append(transition(episode=episode, fill=float(episode)))
        assert len(memory) == 3
        batch = memory.sample(rng, 50)
        assert set(batch.episodes) <= {2, 3, 4}
        np.testing.assert_array_equal(batch.states[:, 0], batch.episodes)
        assert len(batch) == 50

    def test_replay_rejects_bad_use(self, rng):
        with pytest.raises(ValueError):
            ReplayMemory(0)
        with pytest.raises(ValueError):
            ReplayMemory(4).sample(rng, 2)

    def test_reward_memory_labels(self, goal):
        memory = RewardMemory(2)
        memory.append(np.zeros(240), {"go top"})
        memory.append(np.ones(240), {"go bottom", "go left"})
        memory.append(np.full(240, 2.0), set())
        assert len(memory) == 2
        dataset = memory.to_dataset([goal("go top"), goal("go bottom")])
        np.testing.assert_array_equal(dataset.states[:, 0], [2.0, 1.0])
        np.testing.assert_array_equal(dataset.labels, [[False, False], [False, True]])

    def test_registry(self, rng, goal):
        registry = GoalRegistry()
        with pytest.raises(EmptyRegistryError):
            registry.sample(rng)
        added = registry.add({"go top", "grasp any dog"}, episode=3)
        assert [g.text for g in added] == ["go top", "grasp any dog"]
        assert registry.add({"go top", "go left"}, episode=5) == [goal("go left")]
        assert len(registry) == 3
        assert "go top" in registry and goal("go left") in registry
        assert registry.first_episode("go top") == 3
        assert registry.sample(rng) in registry.goals

    def test_registry_records(self):
        registry = GoalRegistry()
        registry.add({"go top"}, 1)
        registry.add({"grow any plant"}, 4)
        restored = GoalRegistry.from_records(registry.to_records())
        assert restored.goals == registry.goals
        assert restored.first_episode("grow any plant") == 4


@pytest.fixture
def agent(small_config, make_reward_model):
    return Agent(small_config, make_reward_model("ma"))


def scripted_episodes(agent, goal, count=3):
    for seed in range(count):
        agent.rollout(goal("grasp any dog" if seed % 2 else "go top"), seed, mode="scripted")


class TestHindsight:
    def test_empty_registry(self, agent, rng):
        agent.replay.append(transition())
        with pytest.raises(EmptyRegistryError):
            hindsight_relabel(agent.replay.sample(rng, 4), agent.registry, agent.reward_model, rng)

    @pytest.mark.parametrize("p_pos", [0.0, 0.5, 1.0])
    def test_rewards_agree_with_reward_model(self, agent, goal, rng, p_pos):
        scripted_episodes(agent, goal)
        batch = hindsight_relabel(agent.replay.sample(rng, 32), agent.registry, agent.reward_model, rng,
                                  scan=4, p_pos=p_pos)
        assert len(batch) == 32
        assert all(g in agent.registry for g in batch.goals)
        probs, _ = agent.reward_model.forward_embedding(batch.next_states, batch.embeddings)
        np.testing.assert_array_equal(batch.rewards, (probs > THRESHOLD).astype(float))
        assert batch.positive_fraction == pytest.approx(batch.rewards.mean())

    def test_embeddings_match_goals(self, agent, goal, rng):
        scripted_episodes(agent, goal)
        batch = hindsight_relabel(agent.replay.sample(rng, 8), agent.registry, agent.reward_model, rng)
        np.testing.assert_allclose(batch.embeddings, goal_embeddings(agent.reward_model, batch.goals))


class TestAgent:
    def test_scripted_rollout_feeds_memories(self, agent, goal):
        result = agent.rollout(goal("go top"), seed=0, mode="scripted")
        horizon = agent.config["horizon"]
        assert result.trajectory.states.shape == (horizon + 1, 240)
        assert len(agent.replay) == horizon
        assert len(agent.reward_memory) == 1
        assert agent.episodes == 1
        assert {g.text for g in result.new_goals} == set(result.trajectory.descriptions)

    def test_rollout_without_learning(self, agent, goal):
        agent.rollout(goal("go top"), seed=0, mode="random", learn=False)
        assert len(agent.replay) == 0 and len(agent.registry) == 0 and agent.episodes == 0

    def test_rollout_modes(self, agent, goal):
        with pytest.raises(ValueError):
            agent.rollout(goal("go top"), 0, mode="teleport")
        with pytest.raises(ValueError):
            agent.rollout(None, 0, mode="agent")
        result = agent.rollout(goal("grasp any dog"), 1, mode="agent")
        assert np.all(np.abs(result.trajectory.states[:, 0:2]) <= 1.0)

    def test_partner_restricted_to_allowed_goals(self, small_config, make_reward_model, goal):
        agent = Agent(small_config, make_reward_model("ma"), allowed_goals=[goal("go top")])
        for seed in range(4):
            agent.rollout(goal("go top"), seed, mode="scripted")
        assert len(agent.reward_memory) == 4
        assert {g.text for g in agent.registry.goals} <= {"go top"}

    def test_exploration_noise_is_clipped(self, agent, rng):
        g = rng.normal(size=agent.reward_model.lm.out_features)
        state = np.zeros(240)
        for _ in range(20):
            assert np.all(np.abs(agent.act(state, g, explore=True)) <= 1.0)
        np.testing.assert_array_equal(agent.act(state, g), agent.act(state, g))

    def test_rl_update_with_zero_critic(self, agent, goal):
        scripted_episodes(agent, goal)
        for critic in (agent.critic, agent.critic_target):
            last = critic.head.layers[-1]
            last.param("W")[...] = 0.0
            last.param("b")[...] = 0.0
        batch = agent.sample_batch(16)
        stats = agent.rl_update(batch)
        assert stats["q_mean"] == 0.0
        assert stats["critic_loss"] == pytest.approx(batch.positive_fraction)

    def test_rl_update_moves_targets_softly(self, agent, goal):
        scripted_episodes(agent, goal)
        before = {k: v.copy() for k, v in agent.policy_target.named_parameters().items()}
        agent.rl_update(agent.sample_batch(16))
        tau = agent.config["tau"]
        policy = agent.policy.named_parameters()
        for name, value in agent.policy_target.named_parameters().items():
            np.testing.assert_allclose(value, (1 - tau) * before[name] + tau * policy[name])

    def test_reward_model_update(self, agent, goal):
        assert agent.update_reward_model() is None
        scripted_episodes(agent, goal)
        loss = agent.update_reward_model(updates=2, batch_size=8)
        assert np.isfinite(loss)

    def test_save_and_load(self, agent, goal, tmp_path, rng):
        scripted_episodes(agent, goal)
        path = agent.save(tmp_path / "agent.npz", {"note": "x"})
        restored, meta = Agent.load(path)
        assert meta["note"] == "x"
        assert restored.registry.goals == agent.registry.goals
        assert restored.episodes == agent.episodes
        g = agent.embed([goal("go top")])[0]
        np.testing.assert_array_equal(restored.embed([goal("go top")])[0], g)
        state = np.zeros(240)
        np.testing.assert_array_equal(restored.act(state, g), agent.act(state, g))


class TestJointTraining:
    def test_records_and_outputs(self, small_config, make_reward_model, all_goals, tmp_path):
        config = small_config.replace(reward_update_every=2)
        train_goals = [g for g in all_goals if g.predicate == "go"] + [g for g in all_goals if g.text == "grasp any dog"]
        test_goals = [g for g in all_goals if g.text == "grasp blue door"]
        result = imagine_train(config, make_reward_model("ma"), train_goals, test_goals, out_dir=str(tmp_path))

        metrics = [(r["epoch"], r["metric"]) for r in result.records]
        assert metrics == [(e, m) for e in (1, 2)
                           for m in ("SR_train", "F1_train", "SR_test", "F1_test", "discovered_goals")]
        assert all(0.0 <= r["value"] <= 1.0 for r in result.records if r["metric"] != "discovered_goals")
        assert len(result.agent.registry) > 0
        assert all(g.split == "train" for g in result.agent.registry.goals)
        assert read_records(str(tmp_path / METRICS_FILE)) == result.records
        assert (tmp_path / "agent.npz").exists()

    def test_needs_training_goals(self, small_config, make_reward_model):
        with pytest.raises(ValueError):
            imagine_train(small_config, make_reward_model("ma"), [])
