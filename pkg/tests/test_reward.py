import numpy as np
import pytest

from playground_workbench.core.errors import DimensionError, PretrainFailedError, UnsupportedVariantError
from playground_workbench.core.seeding import make_rng
from playground_workbench.environment.scene import WorldSettings
from playground_workbench.environment.trajectories import collect_scripted_dataset, persist_dataset
from playground_workbench.language.grammar import enumerate_pair_goals
from playground_workbench.language.oracle import oracle_labels
from playground_workbench.language.vocabulary import default_vocabulary
from playground_workbench.neural.gradcheck import grad_check
from playground_workbench.neural.optim import Adam
from playground_workbench.reward.architectures import (
    RewardModel, load_reward_model, pair_reward_forward, reward_forward, save_reward_model,
)
from playground_workbench.reward.dataset import (
    RewardDataset, any_step_set, labelled_by_oracle, load_dataset, relabel, training_set,
)
from playground_workbench.reward.features import (
    OBJECT_INPUT, PAIR_INPUT, object_substates, object_substates_backward, pair_substates,
)
from playground_workbench.reward.or_network import (
    MaxAggregator, ORNetwork, evaluate_or, exact_or, pretrain_or,
)
from playground_workbench.reward.training import (
    f1_score, f1_table, install_or, predict_f1, reward_training_step, train_reward,
)

PHRASES = ["grasp red dog", "go top", "grow any plant", "grasp any furniture"]


def tokens_for(goal, count):
    return [goal(PHRASES[i % len(PHRASES)]).tokens for i in range(count)]


def noisy(states, rng):
    return states + rng.normal(scale=0.05, size=states.shape)


class TestFeatures:
    def test_shapes(self, random_states):
        states = random_states(2, 3)
        assert object_substates(states).shape == (2, 3, OBJECT_INPUT)
        assert pair_substates(states).shape == (2, 6, PAIR_INPUT)
        assert OBJECT_INPUT == 84

    def test_pairs_need_two_objects(self, random_states):
        with pytest.raises(DimensionError):
            pair_substates(random_states(1, 1))

    def test_backward_is_the_adjoint(self, random_states, rng):
        states = random_states(3, 4)
        d_inputs = rng.normal(size=(3, 4, OBJECT_INPUT))
        lhs = np.sum(d_inputs * object_substates(states))
        rhs = np.sum(object_substates_backward(d_inputs, states.shape[1]) * states)
        assert lhs == pytest.approx(rhs)


class TestArchitectures:
    @pytest.mark.parametrize("variant", ["ma", "fa", "fc", "pair"])
    def test_outputs_are_probabilities(self, variant, make_reward_model, random_states, goal):
        model = make_reward_model(variant)
        prob = model.predict(random_states(5), tokens_for(goal, 5))
        assert prob.shape == (5,)
        assert np.all((prob > 0) & (prob < 1))

    @pytest.mark.parametrize("variant", ["ma", "fa", "fc", "pair"])
    def test_gradients(self, variant, make_reward_model, random_states, rng):
        model = make_reward_model(variant)
        states = noisy(random_states(3), rng)
        g = rng.normal(size=(3, model.lm.out_features))

        def backward(tape, dout):
            dg, grads = model.backward_embedding(tape, dout)
            return (None, dg), grads

        report = grad_check(model, [states, g], forward=model.forward_embedding, backward=backward)
        assert report.passed, report.errors

    def test_gradients_through_language_model(self, make_reward_model, random_states, goal, rng):
        model = make_reward_model("ma")
        report = grad_check(model, [noisy(random_states(4), rng), tokens_for(goal, 4)])
        assert report.passed, report.errors
        assert any(name.startswith("lm.") for name in report.errors)

    @pytest.mark.parametrize("variant", ["ma", "pair"])
    def test_object_order_does_not_matter(self, variant, make_reward_model, random_states,
                                          permute_objects, goal, rng):
        model = make_reward_model(variant)
        states = noisy(random_states(4, 4), rng)
        tokens = tokens_for(goal, 4)
        shuffled = permute_objects(states, [2, 0, 3, 1])
        np.testing.assert_allclose(model.predict(states, tokens), model.predict(shuffled, tokens), atol=1e-12)

    def test_flat_concatenation_sees_object_order(self, make_reward_model, random_states, permute_objects, goal, rng):
        model = make_reward_model("fc")
        states = noisy(random_states(4), rng)
        tokens = tokens_for(goal, 4)
        shuffled = permute_objects(states, [2, 0, 1])
        assert not np.allclose(model.predict(states, tokens), model.predict(shuffled, tokens), atol=1e-9)

    def test_modular_models_accept_any_object_count(self, make_reward_model, random_states, goal):
        model = make_reward_model("ma")
        prob, items = reward_forward(model, random_states(1, 6)[0], model.lm.forward([goal("go top").tokens])[0][0])
        assert 0 < prob < 1
        assert items.shape == (6,)

    @pytest.mark.parametrize("variant", ["fa", "fc"])
    def test_flat_models_are_bound_to_their_object_count(self, variant, make_reward_model, random_states, goal):
        model = make_reward_model(variant)
        with pytest.raises(DimensionError):
            model.predict(random_states(2, 4), tokens_for(goal, 2))

    def test_pair_model(self, make_reward_model, random_states, goal):
        model = make_reward_model("pair")
        g = model.lm.forward([goal("grasp any above cat thing").tokens])[0][0]
        _, pairs = pair_reward_forward(model, random_states(1, 3)[0], g)
        assert pairs.shape == (3,)
        with pytest.raises(DimensionError):
            model.predict(random_states(1, 1), tokens_for(goal, 1))
        with pytest.raises(UnsupportedVariantError):
            pair_reward_forward(make_reward_model("ma"), random_states(1, 3)[0], g)

    def test_exact_max_view(self, make_reward_model, random_states, goal):
        model = make_reward_model("ma")
        exact = model.exact_max_view()
        assert isinstance(exact.aggregator, MaxAggregator)
        assert isinstance(model.aggregator, ORNetwork)
        g = model.lm.forward([goal("go top").tokens])[0][0]
        prob, items = reward_forward(exact, random_states(1, 5)[0], g)
        assert prob == pytest.approx(items.max())
        with pytest.raises(UnsupportedVariantError):
            make_reward_model("fc").exact_max_view()

    def test_or_network_is_frozen_by_default(self, make_reward_model):
        model = make_reward_model("ma")
        trainable = model.named_parameters(trainable_only=True)
        assert not any(name.startswith("aggregator.") for name in trainable)
        unfrozen = make_reward_model("ma", freeze_or=False)
        assert any(name.startswith("aggregator.") for name in unfrozen.named_parameters(trainable_only=True))

    def test_save_and_load(self, make_reward_model, random_states, goal, tmp_path):
        model = make_reward_model("pair")
        path = save_reward_model(tmp_path / "reward.npz", model, {"seed": 7})
        restored, meta = load_reward_model(path)
        assert meta["seed"] == 7
        assert restored.variant == "pair"
        states, tokens = random_states(3), tokens_for(goal, 3)
        np.testing.assert_array_equal(model.predict(states, tokens), restored.predict(states, tokens))


class TestORNetwork:
    def test_exact_or(self):
        np.testing.assert_array_equal(exact_or(np.array([[0.1, 0.6], [0.5, 0.2]])), [1.0, 0.0])

    def test_any_length_and_order(self, rng):
        net = ORNetwork(width=3, rng=rng, dtype=np.float64)
        probs = rng.uniform(size=(4, 7))
        a, _ = net.forward(probs)
        b, _ = net.forward(probs[:, ::-1])
        np.testing.assert_allclose(a, b)
        short, _ = net.forward(probs[:, :2])
        assert short.shape == (4,)

    def test_gradients(self, rng):
        report = grad_check(ORNetwork(width=3, hidden=8, rng=rng), [rng.uniform(size=(5, 4))])
        assert report.passed, report.errors

    def test_max_aggregator_gradient(self):
        agg = MaxAggregator(np.float64)
        out, tape = agg.forward(np.array([[0.2, 0.9, 0.1]]))
        dprobs, _ = agg.backward(tape, np.array([2.0]))
        assert out[0] == 0.9
        np.testing.assert_array_equal(dprobs, [[0.0, 2.0, 0.0]])

    def test_short_pretraining_fails_threshold(self, rng):
        with pytest.raises(PretrainFailedError):
            pretrain_or(ORNetwork(rng=rng), rng, steps=1, batch_size=8, accuracy_threshold=1.01,
                        eval_samples=100)

    @pytest.mark.slow
    def test_pretraining_reaches_threshold(self):
        rng = make_rng(0, "or-pretrain")
        net = ORNetwork(rng=rng)
        result = pretrain_or(net, rng)
        assert result.accuracy >= 0.995
        assert evaluate_or(net, rng, 2000) >= 0.99

    def test_install_or(self, make_reward_model, rng):
        model = make_reward_model("ma")
        net = ORNetwork(model.aggregator.width, 8, rng=np.random.default_rng(5), dtype=np.float64)
        install_or(model, net)
        np.testing.assert_array_equal(model.aggregator.named_parameters()["mlp.0.W"],
                                      net.named_parameters()["mlp.0.W"])
        install_or(make_reward_model("fc"), net)


@pytest.fixture
def trajectories(all_goals):
    goals = [g for g in all_goals if g.split == "train"][:60]
    return collect_scripted_dataset(goals, 30, master_seed=4, settings=WorldSettings(horizon=30))


class TestDatasets:
    def test_training_set_labels_follow_descriptions(self, trajectories, all_goals):
        dataset = training_set(trajectories, all_goals)
        assert dataset.states.shape == (30, 240)
        for row, t in enumerate(trajectories):
            described = set(t.descriptions)
            assert {g.text for g, hit in zip(all_goals, dataset.labels[row]) if hit} == described

    def test_empty_training_set(self, all_goals):
        with pytest.raises(ValueError):
            training_set([], all_goals)

    def test_balanced_batches(self, trajectories, all_goals, rng):
        dataset = training_set(trajectories, all_goals)
        goals = [g for g in all_goals if g not in dataset.degenerate_goals()]
        dataset = dataset.subset_goals(goals)
        _, _, labels = dataset.balanced_batch(rng, 4000)
        assert 0.45 < labels.mean() < 0.55

    def test_degenerate_goals_fall_back(self, rng, goal):
        dataset = RewardDataset(np.zeros((3, 240)), (goal("go top"),), np.zeros((3, 1), dtype=bool))
        assert dataset.degenerate_goals() == [goal("go top")]
        _, _, labels = dataset.balanced_batch(rng, 10)
        assert not labels.any()

    def test_label_shape_checked(self, goal):
        with pytest.raises(ValueError):
            RewardDataset(np.zeros((3, 240)), (goal("go top"),), np.zeros((2, 1), dtype=bool))

    def test_positive_counts_sorted(self, trajectories, all_goals):
        counts = training_set(trajectories, all_goals).positive_counts()
        assert list(counts["positives"]) == sorted(counts["positives"], reverse=True)
        assert len(counts) == 256

    def test_any_step_set_uses_oracle(self, trajectories, all_goals, rng):
        dataset = any_step_set(trajectories, all_goals, rng, states_per_trajectory=3)
        assert len(dataset) == 90
        np.testing.assert_array_equal(dataset.labels, labelled_by_oracle(dataset.states, all_goals).labels)

    def test_relabel_with_pair_goals(self, trajectories):
        pair_goals = enumerate_pair_goals()
        dataset = relabel(training_set(trajectories, pair_goals), pair_goals)
        assert dataset.labels.shape == (30, 160)

    def test_load_dataset_matches_oracle(self, trajectories, all_goals, tmp_path):
        path = tmp_path / "trajectories.jsonl"
        persist_dataset(trajectories, path)
        dataset = load_dataset(path, all_goals, n_objects=3)
        assert dataset.states.shape == (30, 240)
        expected = np.stack([oracle_labels(t.final_state, all_goals) for t in trajectories])
        np.testing.assert_array_equal(dataset.labels, expected)
        assert dataset.labels.any()


class TestTraining:
    def test_f1_score(self):
        assert f1_score(0, 0, 0) == 0.0
        assert f1_score(3, 1, 2) == pytest.approx(6 / 9)

    def test_f1_table_flags_degenerate_goals(self, goal):
        goals = [goal("go top"), goal("go bottom")]
        predictions = np.array([[True, False], [False, False]])
        labels = np.array([[True, False], [True, False]])
        table = f1_table(predictions, labels, goals)
        assert table.loc[0, "f1"] == pytest.approx(2 / 3)
        assert table.loc[1, "f1"] == 0.0
        assert list(table["degenerate"]) == [False, True]

    def test_predict_f1_needs_states(self, make_reward_model, goal):
        empty = RewardDataset(np.zeros((0, 240)), (goal("go top"),), np.zeros((0, 1), dtype=bool))
        with pytest.raises(ValueError):
            predict_f1(make_reward_model("ma"), empty)

    def test_training_step_updates_language_model(self, make_reward_model, random_states, goal):
        model = make_reward_model("ma")
        before = model.lm.named_parameters()["embedding.table"].copy()
        caster = model.caster.param("W").copy()
        frozen = model.aggregator.named_parameters()["mlp.0.W"].copy()
        loss = reward_training_step(model, Adam(model, lr=0.01), random_states(4), tokens_for(goal, 4),
                                    np.array([True, False, True, False]))
        assert np.isfinite(loss)
        assert not np.array_equal(before, model.lm.named_parameters()["embedding.table"])
        assert not np.array_equal(caster, model.caster.param("W"))
        np.testing.assert_array_equal(frozen, model.aggregator.named_parameters()["mlp.0.W"])

    def test_train_reward_records_curves(self, make_reward_model, trajectories, all_goals, small_config, rng):
        dataset = training_set(trajectories, all_goals)
        config = small_config.replace(epochs=2, batches_per_epoch=3)
        result = train_reward(make_reward_model("ma"), dataset, config, rng, eval_sets={"train": dataset})
        losses = [r for r in result.curves if r["metric"] == "loss"]
        assert [r["epoch"] for r in losses] == [1, 2]
        assert "train" in result.final

    @pytest.mark.slow
    def test_learns_go_goals(self, small_config, all_goals):
        go_goals = [g for g in all_goals if g.predicate == "go"]
        config = small_config.replace(epochs=15, batches_per_epoch=100, object_hidden=[64, 64],
                                      lstm_hidden=32, word_embedding=16, aggregation="max")
        model = RewardModel.from_config(config, len(default_vocabulary()), rng=make_rng(0, "reward-init"))
        data = collect_scripted_dataset(go_goals, 400, master_seed=0, settings=WorldSettings(horizon=30))
        train_reward(model, training_set(data, go_goals), config, make_rng(0, "batches"))
        assert predict_f1(model, training_set(data, go_goals)).mean > 0.7

