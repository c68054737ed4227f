"""
Playground Workbench - Pipeline Orchestrator

Runs the workbench commands end to end: scripted dataset generation, OR
pretraining, supervised reward training, joint agent training, offline
evaluation and report rendering. Every command writes its resolved
configuration next to its outputs.
"""

import logging
import shutil
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from . import __version__
from .agent.agent import Agent
from .agent.imagine import imagine_train
from .core.config import FULL_SCALE_TRAJECTORIES, RunConfig, default_data_root
from .core.errors import ConfigError, UnsupportedVariantError
from .core.seeding import make_rng
from .core.utils import WorkbenchReport, read_records, write_records
from .environment.scene import WorldSettings
from .environment.trajectories import SCHEMA_FILE, collect_scripted_dataset, load_trajectories, persist_dataset
from .evaluation.policies import AgentPolicy
from .evaluation.report import per_type_report
from .evaluation.success import reward_f1_report, success_rate
from .evaluation.vary_n import vary_n_eval
from .language.grammar import Goal, restrict_goals
from .language.splits import GoalSplit, pair_split, test_split
from .language.vocabulary import default_vocabulary
from .neural.checkpoint import load_checkpoint, module_tensors, save_checkpoint
from .reward.architectures import RewardModel, load_reward_model, save_reward_model
from .reward.dataset import any_step_set, load_dataset, relabel, training_set
from .reward.or_network import ORNetwork
from .reward.training import install_or, predict_f1, pretrained_or, train_reward

logger = logging.getLogger(__name__)

TRAIN_FILE = "trajectories.jsonl"
TEST_FILE = "test_trajectories.jsonl"
OR_CHECKPOINT = "or_network.npz"
REWARD_CHECKPOINT = "reward_model.npz"
AGENT_CHECKPOINT = "agent.npz"


class Workbench:
    """
    Pipeline orchestrator for the playground workbench.

    Each `run_*` method is one command; results are written under the
    output directory and summarised in a JSON report.
    """

    def __init__(self, config: RunConfig, console: Optional[Console] = None):
        self.config = config
        self.out_dir = Path(config["out"] or default_data_root())
        self.data_dir = Path(config["data"] or config["out"] or default_data_root())
        self.settings = WorldSettings.from_config(config)
        self.console = console or Console()
        logger.info(f"Playground Workbench {__version__} initialized (out={self.out_dir})")

    # -- shared pieces -----------------------------------------------------------

    def _prepare(self, command: str) -> WorkbenchReport:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.config.write_resolved(str(self.out_dir))
        logger.info(f"Starting {command} (seed {self.config['seed']})")
        return WorkbenchReport(command, str(self.out_dir))

    def goal_split(self) -> GoalSplit:
        """Train/test goals; the reduced goal set keeps go goals and grasp goals over the scene kinds."""
        split = test_split()
        if self.config["goal_set"] == "reduced":
            kinds = self.config.object_kinds_or_default()
            split = GoalSplit(train=restrict_goals(split.train, kinds), test=restrict_goals(split.test, kinds))
            logger.info(f"Reduced goal set: {len(split.train)} train / {len(split.test)} test goals")
        return split

    def _reward_goals(self, variant: str) -> Tuple[Tuple[Goal, ...], Tuple[Goal, ...]]:
        split = self.goal_split()
        if variant != "pair":
            return split.train, split.test
        pairs = pair_split()
        return split.train + pairs.train, split.test + pairs.test

    def _new_reward_model(self, variant: Optional[str] = None) -> RewardModel:
        rng = make_rng(self.config["seed"], "reward-init")
        model = RewardModel.from_config(self.config, len(default_vocabulary()), rng, variant=variant)
        if model.is_modular and self.config["aggregation"] == "or_net":
            install_or(model, self._or_network())
        return model

    def _or_network(self) -> ORNetwork:
        path = self.config["or_checkpoint"] or (self.out_dir / OR_CHECKPOINT)
        net = ORNetwork(self.config["or_width"], self.config["or_hidden"], self.config["or_input_gain"],
                        dtype=self.config.dtype)
        if Path(path).exists():
            load_checkpoint(path, net)
            return net
        logger.info("No pretrained OR network found; pretraining one now")
        return pretrained_or(self.config, make_rng(self.config["seed"], "or-pretrain"), self.config.dtype)

    def _train_path(self) -> Path:
        path = self.data_dir / TRAIN_FILE
        if not path.exists():
            raise ConfigError(f"No dataset at {path}; run make-data first")
        return path

    def _load_data(self) -> Tuple[list, list]:
        train_path, test_path = self._train_path(), self.data_dir / TEST_FILE
        train = load_trajectories(train_path, self.config["n_objects"])
        test = load_trajectories(test_path, self.config["n_objects"]) if test_path.exists() else []
        return train, test

    # -- commands ------------------------------------------------------------------

    def run_make_data(self, full_scale: bool = False) -> Dict[str, Any]:
        """Collect scripted trajectories, persist them and summarise positives per goal."""
        report = self._prepare("make-data")
        try:
            count = FULL_SCALE_TRAJECTORIES if full_scale else self.config["trajectories"]
            split = self.goal_split()
            hints = split.train
            include_pairs = self.config["variant"] == "pair"
            if include_pairs:
                hints = hints + pair_split().train
            n = self.config["n_objects"]
            seed = self.config["seed"]

            train = collect_scripted_dataset(hints, count, seed, n, self.settings, include_pairs, label="train")
            test = collect_scripted_dataset(split.all, self.config["test_trajectories"], seed, n,
                                            self.settings, include_pairs, label="test")
            self.data_dir.mkdir(parents=True, exist_ok=True)
            persist_dataset(train, self.data_dir / TRAIN_FILE)
            persist_dataset(test, self.data_dir / TEST_FILE)
            shutil.copyfile(SCHEMA_FILE, self.data_dir / SCHEMA_FILE.name)

            counts = training_set(train, split.train).positive_counts()
            counts.to_csv(self.data_dir / "positive_counts.csv", index=False)
            self._print_table("Positive examples per goal", counts.head(20))

            report.add_section("dataset", {"train_trajectories": len(train), "test_trajectories": len(test),
                                           "full_scale": full_scale, "n_objects": n})
            report.add_section("positive_counts", counts)
            return {"report": report.export(), "train": len(train), "test": len(test)}
        except Exception as e:
            logger.error(f"make-data failed: {e}")
            raise

    def run_pretrain_or(self) -> Dict[str, Any]:
        """Pretrain the OR network on synthetic probability vectors and save it."""
        report = self._prepare("pretrain-or")
        try:
            net = pretrained_or(self.config, make_rng(self.config["seed"], "or-pretrain"), self.config.dtype)
            path = save_checkpoint(self.out_dir / OR_CHECKPOINT, module_tensors(net),
                                   {"kind": "or_network", "width": net.width})
            report.add_section("or_network", {"checkpoint": str(path), "width": net.width})
            return {"report": report.export(), "checkpoint": str(path)}
        except Exception as e:
            logger.error(f"pretrain-or failed: {e}")
            raise

    def run_train_reward(self) -> Dict[str, Any]:
        """Supervised reward training on the scripted dataset, with F1 curves per split."""
        report = self._prepare("train-reward")
        try:
            variant = self.config["variant"]
            train_goals, test_goals = self._reward_goals(variant)
            n = self.config["n_objects"]
            train_set = load_dataset(self._train_path(), train_goals, n)
            model = self._new_reward_model(variant)

            if variant == "pair":
                # two-object labels may be missing from data collected without pair descriptions
                train_set = relabel(train_set, train_goals)
            test_path = self.data_dir / TEST_FILE
            if test_path.exists():
                eval_set = any_step_set(load_trajectories(test_path, n), train_goals + test_goals,
                                        make_rng(self.config["seed"], "reward-eval-states"),
                                        self.config["states_per_test_trajectory"])
            else:
                eval_set = relabel(train_set, train_goals + test_goals)
            result = train_reward(model, train_set, self.config, make_rng(self.config["seed"], "reward-batches"),
                                  eval_sets={"eval": eval_set})

            write_records(result.curves, str(self.out_dir / "reward_records.jsonl"))
            per_goal = predict_f1(model, eval_set).per_goal
            per_goal.to_csv(self.out_dir / "reward_f1_per_goal.csv", index=False)
            path = save_reward_model(self.out_dir / REWARD_CHECKPOINT, model)

            report.add_section("final_f1", result.final)
            report.add_section("per_goal_f1", per_goal)
            return {"report": report.export(), "checkpoint": str(path), "final": result.final}
        except Exception as e:
            logger.error(f"train-reward failed: {e}")
            raise

    def run_train_agent(self) -> Dict[str, Any]:
        """Joint agent and reward-model training from social-partner feedback."""
        report = self._prepare("train-agent")
        try:
            split = self.goal_split()
            if self.config["reward_checkpoint"]:
                model, _ = load_reward_model(self.config["reward_checkpoint"])
            else:
                model = self._new_reward_model()
            result = imagine_train(self.config, model, split.train, split.test, out_dir=str(self.out_dir))
            report.add_section("metrics", result.records)
            report.add_section("discovered_goals", result.agent.registry.to_records())
            return {"report": report.export(), "checkpoint": str(self.out_dir / AGENT_CHECKPOINT),
                    "records": result.records}
        except Exception as e:
            logger.error(f"train-agent failed: {e}")
            raise

    def run_evaluate(self, suite: Optional[str] = None) -> Dict[str, Any]:
        """Offline evaluation suites: train, test, vary-n, per-type, pairwise."""
        suite = suite or self.config["suite"]
        report = self._prepare(f"evaluate-{suite}")
        try:
            if suite == "pairwise":
                frame = self._evaluate_pairwise()
            elif suite == "vary-n":
                agent = self._load_agent(required=False)
                reward_model = self._load_reward_model() or (agent.reward_model if agent else None)
                split = self.goal_split()
                frame = vary_n_eval(agent, reward_model, split.train, split.test,
                                    self.config["n_values"], self.config["seed"],
                                    self.config["episodes_per_goal"], self.settings)
            else:
                frame = self._evaluate_policy(suite)
            records_file = self.out_dir / f"{suite.replace('-', '_')}_records.jsonl"
            write_records(frame.to_dict(orient="records"), str(records_file))
            self._print_table(f"Evaluation: {suite}", frame)
            report.add_section(suite, frame)
            return {"report": report.export(), "records": str(records_file), "table": frame}
        except Exception as e:
            logger.error(f"evaluate {suite} failed: {e}")
            raise

    def _evaluate_policy(self, suite: str) -> pd.DataFrame:
        agent = self._load_agent(required=True)
        split = self.goal_split()
        goals = split.train if suite == "train" else split.test
        result = success_rate(AgentPolicy(agent), goals, self.config["episodes_per_goal"],
                              seed=self.config["seed"], n_objects=self.config["n_objects"],
                              settings=self.settings, label=f"evaluate-{suite}")
        if suite == "per-type":
            return per_type_report(result)
        reward_model = self._load_reward_model()
        if reward_model is not None and (self.data_dir / TEST_FILE).exists():
            _, test_trajectories = self._load_data()
            eval_set = any_step_set(test_trajectories, goals, make_rng(self.config["seed"], "evaluate-states"),
                                    self.config["states_per_test_trajectory"])
            result = result.merged(reward_f1_report(reward_model, eval_set))
        return result.records

    def _evaluate_pairwise(self) -> pd.DataFrame:
        model = self._load_reward_model()
        if model is None or model.variant != "pair":
            raise UnsupportedVariantError("the pairwise suite needs a pair reward checkpoint (reward_checkpoint)")
        train_goals, test_goals = self._reward_goals("pair")
        train_trajectories, test_trajectories = self._load_data()
        eval_set = any_step_set(test_trajectories or train_trajectories, train_goals + test_goals,
                                make_rng(self.config["seed"], "pairwise-states"),
                                self.config["states_per_test_trajectory"])
        records = reward_f1_report(model, eval_set).records
        pair_texts = {g.text for g in pair_split().all}
        records["objects"] = np.where(records["goal"].isin(pair_texts), "two", "one")
        return records

    def _load_agent(self, required: bool) -> Optional[Agent]:
        path = self.config["agent_checkpoint"]
        if not path:
            if required:
                raise ConfigError("this suite needs an agent checkpoint (--agent)")
            return None
        agent, _ = Agent.load(path)
        return agent

    def _load_reward_model(self) -> Optional[RewardModel]:
        path = self.config["reward_checkpoint"]
        if not path:
            return None
        model, _ = load_reward_model(path)
        return model

    def run_report(self) -> Dict[str, Any]:
        """Render every *_records.jsonl of the output directory into report.xlsx and a summary."""
        report = self._prepare("report")
        try:
            files = sorted(self.out_dir.glob("*_records.jsonl"))
            if not files:
                raise ConfigError(f"No *_records.jsonl files in {self.out_dir}")
            frames = {f.name[:-len("_records.jsonl")]: pd.DataFrame(read_records(str(f))) for f in files}
            summary = self._summarise(frames)
            workbook = self.out_dir / "report.xlsx"
            with pd.ExcelWriter(workbook, engine="openpyxl") as writer:
                summary.to_excel(writer, sheet_name="summary", index=False)
                for name, frame in frames.items():
                    frame.to_excel(writer, sheet_name=name[:31], index=False)
            self._print_table("Run summary", summary)
            report.add_section("summary", summary)
            return {"report": report.export(), "workbook": str(workbook)}
        except Exception as e:
            logger.error(f"report failed: {e}")
            raise

    @staticmethod
    def _summarise(frames: Dict[str, pd.DataFrame]) -> pd.DataFrame:
        rows: List[Dict[str, Any]] = []
        for source, frame in frames.items():
            if not {"metric", "value"} <= set(frame.columns):
                continue
            keys = ["metric", "split"] if "split" in frame.columns else ["metric"]
            if "epoch" in frame.columns:
                frame = frame[frame["epoch"] == frame["epoch"].max()]
            for key, group in frame.groupby(keys):
                key = key if isinstance(key, tuple) else (key,)
                rows.append({"source": source, "metric": key[0], "split": key[1] if len(key) > 1 else "",
                             "mean": float(group["value"].mean()), "count": int(len(group))})
        return pd.DataFrame(rows, columns=["source", "metric", "split", "mean", "count"])

    def _print_table(self, title: str, frame: pd.DataFrame) -> None:
        table = Table(title=title)
        for column in frame.columns:
            table.add_column(str(column))
        for row in frame.itertuples(index=False):
            table.add_row(*[f"{v:.3f}" if isinstance(v, float) else str(v) for v in row])
        self.console.print(table)
