import json

import numpy as np
import pytest

from playground_workbench.catalog import GRIPPER_CLOSED, state_size
from playground_workbench.core.errors import (
    DimensionError, EpisodeFinishedError, NoTargetError, RejectedHintError, SchemaVersionError,
    TruncatedFileError,
)
from playground_workbench.environment.scene import Action, WorldSettings, sample_scene, step
from playground_workbench.environment.scripted_policy import random_action, scripted_policy_action
from playground_workbench.environment.social_partner import SocialPartner, describe
from playground_workbench.environment.trajectories import (
    collect_scripted_dataset, collect_trajectory, load_trajectories, persist_dataset,
)
from playground_workbench.language.grammar import enumerate_pair_goals
from playground_workbench.language.oracle import oracle_labels, oracle_reward

LONG_EPISODES = WorldSettings(horizon=50)


def placed_trajectories(target, count, include_pairs=False):
    """Scripted episodes for the first `count` seeds whose scene can host the hint."""
    trajectories, seed = [], 0
    while len(trajectories) < count:
        try:
            trajectories.append(collect_trajectory(scripted_policy_action, target, seed, 3, LONG_EPISODES,
                                                   include_pairs=include_pairs))
        except RejectedHintError:
            pass
        seed += 1
    return trajectories


def random_play(seed, n_objects, settings, rng):
    """Yield the scene after every uniformly random step, starting on top of an object."""
    scene = sample_scene(None, n_objects, seed=seed, settings=settings)
    scene.body.position = scene.objects[0].position.copy()
    while not scene.finished:
        yield step(scene, random_action(rng, settings.step_max))


class TestScene:
    def test_sampling_is_seeded(self, goal):
        a = sample_scene(goal("grasp red dog"), 3, seed=5)
        b = sample_scene(goal("grasp red dog"), 3, seed=5)
        np.testing.assert_array_equal(a.state_vector(), b.state_vector())

    def test_state_vector_layout(self):
        scene = sample_scene(None, 4, seed=1)
        state = scene.state_vector()
        assert state.shape == (state_size(4),)
        np.testing.assert_array_equal(state[state_size(4) // 2:], 0.0)

    def test_hint_places_target(self, goal):
        for seed in range(10):
            scene = sample_scene(goal("grasp red dog"), 3, seed=seed)
            assert any(o.kind.name == "dog" and o.color_name == "red" for o in scene.objects)

    def test_grow_hint_places_supply(self, goal):
        scene = sample_scene(goal("grow any plant"), 3, seed=2)
        assert any(o.kind.name == "water" for o in scene.objects)

    def test_rejected_hints(self, goal):
        with pytest.raises(RejectedHintError):
            sample_scene(None, 0, seed=0)
        with pytest.raises(RejectedHintError):
            sample_scene(goal("grasp any left_of dog thing"), 1, seed=0)
        with pytest.raises(RejectedHintError):
            sample_scene(goal("grow any dog"), 1, seed=0)
        with pytest.raises(RejectedHintError):
            sample_scene(goal("grasp any dog"), 2, seed=0, settings=WorldSettings(object_kinds=("sofa", "door")))

    def test_step_clamps_motion(self):
        settings = WorldSettings(step_max=0.1)
        scene = sample_scene(None, 2, seed=3, settings=settings)
        scene.body.position = np.array([0.0, 0.0])
        step(scene, Action(delta=np.array([1.0, -1.0]), gripper_command=-1.0))
        np.testing.assert_allclose(scene.body.position, [0.1, -0.1])

    def test_body_stays_in_arena(self):
        scene = sample_scene(None, 2, seed=3)
        scene.body.position = np.array([0.95, 0.95])
        step(scene, Action(delta=np.array([0.15, 0.15]), gripper_command=-1.0))
        assert np.all(np.abs(scene.body.position) <= 1.0)

    def test_grasp_and_carry(self):
        scene = sample_scene(None, 3, seed=4)
        target = scene.objects[0]
        scene.body.position = target.position.copy()
        step(scene, Action(delta=np.zeros(2), gripper_command=1.0))
        assert target.grasped
        assert scene.body.gripper == GRIPPER_CLOSED
        step(scene, Action(delta=np.array([0.05, 0.0]), gripper_command=1.0))
        np.testing.assert_allclose(target.position, scene.body.position)
        step(scene, Action(delta=np.zeros(2), gripper_command=-1.0))
        assert not target.grasped

    def test_episode_ends_at_horizon(self):
        scene = sample_scene(None, 1, seed=0, settings=WorldSettings(horizon=2))
        for _ in range(2):
            step(scene, Action(delta=np.zeros(2), gripper_command=-1.0))
        assert scene.finished
        with pytest.raises(EpisodeFinishedError):
            step(scene, Action(delta=np.zeros(2), gripper_command=-1.0))

    def test_pair_hint_uses_distinct_kinds(self, goal):
        settings = WorldSettings(object_kinds=("dog", "cat"))
        placed = 0
        for text in ("grasp any left_of dog thing", "grasp any above red thing"):
            for seed in range(20):
                try:
                    scene = sample_scene(goal(text), 2, seed=seed, settings=settings)
                except RejectedHintError:
                    continue
                placed += 1
                assert sorted(o.kind.name for o in scene.objects) == ["cat", "dog"]
        assert placed >= 20


class TestDynamics:
    GROWTH_WORLD = WorldSettings(object_kinds=("dog", "cactus", "sofa", "water", "food"),
                                 contact_radius=0.3, horizon=40)

    def test_sizes_never_shrink(self):
        rng = np.random.default_rng(5)
        for seed in range(15):
            previous = None
            for scene in random_play(seed, 5, self.GROWTH_WORLD, rng):
                sizes = np.array([o.size for o in scene.objects])
                if previous is not None:
                    assert np.all(sizes >= previous)
                assert np.all(sizes >= scene.initial_sizes)
                previous = sizes

    def test_at_most_one_object_held(self):
        rng = np.random.default_rng(6)
        for seed in range(15):
            for scene in random_play(seed, 5, self.GROWTH_WORLD, rng):
                assert sum(o.grasped for o in scene.objects) <= 1

    def test_same_seed_and_actions_give_identical_states(self):
        runs = []
        for _ in range(2):
            rng = np.random.default_rng(7)
            runs.append([scene.state_vector() for scene in random_play(3, 4, self.GROWTH_WORLD, rng)])
        assert len(runs[0]) == self.GROWTH_WORLD.horizon
        for a, b in zip(*runs):
            assert a.tobytes() == b.tobytes()

    def test_supply_only_grows_living_things(self):
        settings = WorldSettings(object_kinds=("cactus", "sofa", "water"))
        scene = sample_scene(None, 3, seed=2, settings=settings)
        by_kind = {o.kind.name: o for o in scene.objects}
        water, sofa, cactus = by_kind["water"], by_kind["sofa"], by_kind["cactus"]
        scene.body.position = water.position.copy()
        step(scene, Action(delta=np.zeros(2), gripper_command=1.0))
        assert water.grasped

        sofa_size, cactus_size = sofa.size, cactus.size
        sofa.position = scene.body.position.copy()
        cactus.position = scene.body.position.copy()
        step(scene, Action(delta=np.zeros(2), gripper_command=1.0))
        assert sofa.size == sofa_size
        assert cactus.size > cactus_size

    def test_nothing_grasped_or_grown_at_reset(self, all_goals):
        goals = [g for g in all_goals + enumerate_pair_goals() if g.predicate in ("grasp", "grow")]
        for seed, hint in enumerate(all_goals[::5]):
            try:
                scene = sample_scene(hint, 1 + seed % 5, seed=seed)
            except RejectedHintError:
                continue
            assert not oracle_labels(scene.state_vector(), goals).any()


class TestScriptedPolicy:
    @pytest.mark.parametrize("text", ["go top left", "grasp any dog", "grasp any blue thing",
                                      "grow any plant", "grow red animal"])
    def test_reaches_goal(self, goal, text):
        target = goal(text)
        successes = sum(oracle_reward(t.final_state, target) for t in placed_trajectories(target, 10))
        assert successes >= 9

    def test_pairwise_goal(self, goal):
        target = goal("grasp any left_of cat thing")
        successes = sum(oracle_reward(t.final_state, target) for t in placed_trajectories(target, 10, True))
        assert successes >= 9

    def test_no_target(self, goal):
        scene = sample_scene(None, 1, seed=0, settings=WorldSettings(object_kinds=("sofa",)))
        with pytest.raises(NoTargetError):
            scripted_policy_action(scene, goal("grasp any dog"))


class TestSocialPartner:
    def test_descriptions_match_oracle(self, all_goals, goal):
        hints = ["grasp any animal", "grow any living_thing", "go bottom right", "grasp any red thing"]
        for seed, text in enumerate(hints * 3):
            trajectory = collect_trajectory(scripted_policy_action, goal(text), seed, 3, LONG_EPISODES)
            labels = oracle_labels(trajectory.final_state, all_goals)
            assert {g.text for g, hit in zip(all_goals, labels) if hit} == set(trajectory.descriptions)

    def test_pair_descriptions_match_oracle(self, goal):
        pair_goals = enumerate_pair_goals()
        for trajectory in placed_trajectories(goal("grasp any above plant thing"), 6, include_pairs=True):
            labels = oracle_labels(trajectory.final_state, pair_goals)
            described = {d for d in trajectory.descriptions if len(d.split()) == 5}
            assert {g.text for g, hit in zip(pair_goals, labels) if hit} == described

    def test_random_play_descriptions_match_oracle(self, all_goals):
        goals = all_goals + enumerate_pair_goals()
        rng = np.random.default_rng(11)
        for seed in range(60):
            n_objects = int(rng.integers(1, 6))
            *_, scene = random_play(seed, n_objects, LONG_EPISODES, rng)
            labels = oracle_labels(scene.state_vector(), goals)
            assert describe(scene, include_pairs=True) == {g.text for g, hit in zip(goals, labels) if hit}

    def test_restricted_partner(self, goal):
        scene = sample_scene(goal("go top"), 2, seed=0)
        scene.body.position = np.array([0.5, 0.5])
        everything = describe(scene)
        assert "go top" in everything and "go right" in everything
        partner = SocialPartner([goal("go top")])
        assert partner.describe(scene) == {"go top"}


class TestTrajectoryFiles:
    @pytest.fixture
    def trajectories(self, all_goals, settings):
        go_goals = [g for g in all_goals if g.predicate == "go"]
        return collect_scripted_dataset(go_goals, 4, master_seed=2, n_objects=2, settings=settings)

    @pytest.mark.parametrize("name", ["data.jsonl", "data.jsonl.gz"])
    def test_round_trip_is_lossless(self, trajectories, tmp_path, name):
        path = tmp_path / name
        assert persist_dataset(trajectories, path) == 4
        loaded = load_trajectories(path, n_objects=2)
        assert len(loaded) == 4
        for original, restored in zip(trajectories, loaded):
            np.testing.assert_array_equal(original.states, restored.states)
            assert original.descriptions == restored.descriptions
            assert original.goal_hint == restored.goal_hint

    def test_collection_is_reproducible(self, all_goals, settings):
        goals = all_goals[:20]
        a = collect_scripted_dataset(goals, 3, master_seed=1, settings=settings)
        b = collect_scripted_dataset(goals, 3, master_seed=1, settings=settings)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.states, y.states)

    def test_wrong_object_count(self, trajectories, tmp_path):
        path = tmp_path / "data.jsonl"
        persist_dataset(trajectories, path)
        with pytest.raises(DimensionError):
            load_trajectories(path, n_objects=3)

    def test_unknown_schema_version(self, trajectories, tmp_path):
        path = tmp_path / "data.jsonl"
        persist_dataset(trajectories, path)
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        header["schema_version"] = 99
        path.write_text("\n".join([json.dumps(header)] + lines[1:]) + "\n")
        with pytest.raises(SchemaVersionError):
            load_trajectories(path)

    def test_missing_records(self, trajectories, tmp_path):
        path = tmp_path / "data.jsonl"
        persist_dataset(trajectories, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(TruncatedFileError):
            load_trajectories(path)

    def test_cut_record(self, trajectories, tmp_path):
        path = tmp_path / "data.jsonl"
        persist_dataset(trajectories, path)
        text = path.read_text()
        path.write_text(text[: len(text) - 40])
        with pytest.raises(TruncatedFileError):
            load_trajectories(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(TruncatedFileError):
            load_trajectories(path)
