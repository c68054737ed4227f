import json

import pandas as pd
import pytest
import yaml

from playground_workbench import __version__
from playground_workbench.cli import run
from playground_workbench.core.config import RESOLVED_CONFIG_NAME
from playground_workbench.core.utils import read_records
from playground_workbench.environment.trajectories import load_trajectories

DESK_SETTINGS = {
    "seed": 3,
    "goal_set": "reduced",
    "precision": "float64",
    "aggregation": "max",
    "trajectories": 8,
    "test_trajectories": 4,
    "states_per_test_trajectory": 2,
    "horizon": 10,
    "word_embedding": 6,
    "lstm_hidden": 10,
    "object_hidden": [12, 12],
    "flat_hidden": [12, 12],
    "epochs": 1,
    "batches_per_epoch": 2,
    "reward_batch_size": 16,
    "episodes": 4,
    "bootstrap_episodes": 2,
    "eval_every": 2,
    "batch_size": 8,
    "rl_updates_per_episode": 1,
    "reward_updates": 1,
    "reward_update_every": 2,
    "hindsight_scan": 4,
    "replay_capacity": 200,
    "reward_memory_capacity": 20,
    "episodes_per_goal": 1,
}


@pytest.fixture
def desk_config(tmp_path):
    path = tmp_path / "desk.yaml"
    path.write_text(yaml.safe_dump(DESK_SETTINGS))
    return str(path)


class TestUsage:
    def test_unknown_flag(self):
        assert run(["make-data", "--bogus"]) == 2

    def test_invalid_variant(self, tmp_path):
        assert run(["train-reward", "--variant", "cnn", "--out", str(tmp_path)]) == 2

    def test_missing_config_file(self, tmp_path):
        assert run(["make-data", "--config", str(tmp_path / "absent.yaml")]) == 2

    def test_version(self, capsys):
        assert run(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_bad_config_file(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump({"horizon": "long"}))
        assert run(["make-data", "--config", str(path), "--out", str(tmp_path / "out")]) == 1

    def test_suite_needs_agent(self, desk_config, tmp_path):
        assert run(["evaluate", "--config", desk_config, "--suite", "per-type", "--out", str(tmp_path)]) == 1

    def test_report_needs_records(self, desk_config, tmp_path):
        assert run(["report", "--config", desk_config, "--out", str(tmp_path)]) == 1


class TestPipeline:
    def test_make_data(self, desk_config, tmp_path, capsys):
        out = tmp_path / "data"
        assert run(["make-data", "--config", desk_config, "--out", str(out)]) == 0
        assert "8 train / 4 test" in capsys.readouterr().out

        assert len(load_trajectories(out / "trajectories.jsonl", n_objects=3)) == 8
        assert len(load_trajectories(out / "test_trajectories.jsonl", n_objects=3)) == 4
        assert (out / "trajectory_schema.json").exists()
        counts = pd.read_csv(out / "positive_counts.csv")
        assert list(counts.columns) == ["goal", "split", "positives"]

        resolved = yaml.safe_load((out / RESOLVED_CONFIG_NAME).read_text())
        assert resolved["trajectories"] == 8 and resolved["goal_set"] == "reduced"
        report = json.loads((out / "make-data_report.json").read_text())
        assert report["data"]["dataset"]["train_trajectories"] == 8

    def test_flags_override_file(self, desk_config, tmp_path):
        out = tmp_path / "data"
        assert run(["make-data", "--config", desk_config, "--out", str(out), "--trajectories", "3"]) == 0
        assert len(load_trajectories(out / "trajectories.jsonl")) == 3

    def test_reward_agent_and_report(self, desk_config, tmp_path):
        data, reward, agent = tmp_path / "data", tmp_path / "reward", tmp_path / "agent"
        assert run(["make-data", "--config", desk_config, "--out", str(data)]) == 0
        assert run(["train-reward", "--config", desk_config, "--data", str(data), "--out", str(reward)]) == 0
        assert (reward / "reward_model.npz").exists()
        curves = read_records(str(reward / "reward_records.jsonl"))
        assert {r["metric"] for r in curves} == {"loss", "f1_eval"}

        assert run(["train-agent", "--config", desk_config, "--out", str(agent),
                    "--reward", str(reward / "reward_model.npz")]) == 0
        epochs = {r["epoch"] for r in read_records(str(agent / "imagine_records.jsonl"))}
        assert epochs == {1, 2}

        assert run(["evaluate", "--config", desk_config, "--suite", "test", "--data", str(data),
                    "--agent", str(agent / "agent.npz"), "--reward", str(reward / "reward_model.npz"),
                    "--out", str(agent)]) == 0
        evaluated = read_records(str(agent / "test_records.jsonl"))
        assert {r["metric"] for r in evaluated} == {"SR", "F1"}

        assert run(["report", "--config", desk_config, "--out", str(agent)]) == 0
        sheets = pd.read_excel(agent / "report.xlsx", sheet_name=None)
        assert set(sheets) == {"summary", "imagine", "test"}
        assert set(sheets["summary"]["source"]) == {"imagine", "test"}
