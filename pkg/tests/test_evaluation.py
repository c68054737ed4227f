import numpy as np
import pandas as pd
import pytest
from scipy import stats

from playground_workbench.agent.agent import Agent
from playground_workbench.core.errors import MissingCoverageError, UndefinedTestError, UnsupportedVariantError
from playground_workbench.environment.scene import WorldSettings
from playground_workbench.environment.trajectories import collect_scripted_dataset
from playground_workbench.evaluation.policies import RandomPolicy, ScriptedPolicy
from playground_workbench.evaluation.report import EvalReport, per_type_report
from playground_workbench.evaluation.statistics import compare_architectures, welch_test
from playground_workbench.evaluation.success import reward_f1_report, success_rate
from playground_workbench.evaluation.vary_n import vary_n_eval
from playground_workbench.language.splits import test_split
from playground_workbench.reward.dataset import any_step_set


class TestWelch:
    def test_matches_scipy(self):
        a = [0.61, 0.72, 0.68, 0.70, 0.65]
        b = [0.41, 0.55, 0.38, 0.60, 0.47, 0.52]
        result = welch_test(a, b)
        reference = stats.ttest_ind(a, b, equal_var=False)
        assert result.t_statistic == pytest.approx(reference.statistic)
        assert result.p_value == pytest.approx(reference.pvalue)
        assert result.significant

    def test_not_significant(self):
        result = welch_test([0.5, 0.6, 0.55], [0.52, 0.58, 0.57])
        assert not result.significant
        assert 0.0 < result.p_value <= 1.0

    def test_undefined_cases(self):
        with pytest.raises(UndefinedTestError):
            welch_test([0.5], [0.4, 0.6])
        with pytest.raises(UndefinedTestError):
            welch_test([0.5, 0.5, 0.5], [0.4, 0.6, 0.5])

    def test_compare_architectures(self):
        table = compare_architectures({
            "ma": [0.9, 0.92, 0.88, 0.91],
            "fa": [0.5, 0.55, 0.45, 0.52],
            "fc": [0.3, 0.3, 0.3, 0.3],
        })
        assert list(table["variant"]) == ["ma", "fa", "fc"]
        rows = table.set_index("variant")
        assert rows.loc["fa", "significant"]
        assert pd.isna(rows.loc["fc", "p_value"])
        assert rows.loc["ma", "mean"] == pytest.approx(0.9025)

    def test_missing_reference(self):
        with pytest.raises(UndefinedTestError):
            compare_architectures({"fa": [0.1, 0.2]})


class TestPerType:
    @pytest.fixture
    def held_out(self):
        return test_split().test

    def report_for(self, goals):
        return EvalReport.from_records({
            "goal": g.text, "split": g.split, "gen_type": g.gen_type, "metric": "SR",
            "value": 0.1 if g.gen_type == 2 else 0.8, "n_samples": 10,
        } for g in goals)

    def test_breakdown(self, held_out):
        table = per_type_report(self.report_for(held_out))
        assert list(table["gen_type"]) == [1, 2, 3, 4, 5]
        assert list(table["count"]) == [4, 8, 4, 4, 44]
        assert list(table["note"]) == ["", "extrapolation", "", "", ""]
        np.testing.assert_allclose(table["mean"], [0.8, 0.1, 0.8, 0.8, 0.8])
        np.testing.assert_allclose(table["std"], 0.0, atol=1e-12)

    def test_ignores_train_records(self, held_out, all_goals):
        train = [g for g in all_goals if g.split == "train"][:10]
        table = per_type_report(self.report_for(list(held_out) + train))
        assert table["count"].sum() == 64

    def test_missing_type(self, held_out):
        with pytest.raises(MissingCoverageError):
            per_type_report(self.report_for([g for g in held_out if g.gen_type != 3]))

    def test_summary(self, held_out):
        summary = self.report_for(held_out).summary()
        assert list(summary.columns) == ["metric", "split", "mean", "std", "count"]
        assert summary.loc[0, "count"] == 64


class TestSuccessRate:
    @pytest.fixture
    def goals(self, all_goals):
        texts = {"go top", "go bottom left", "grasp any dog", "grasp blue door"}
        return [g for g in all_goals if g.text in texts]

    def test_reproducible(self, goals, settings):
        a = success_rate(ScriptedPolicy(), goals, 3, seed=5, settings=settings)
        b = success_rate(ScriptedPolicy(), goals, 3, seed=5, settings=settings)
        pd.testing.assert_frame_equal(a.records, b.records)
        assert len(a) == 4
        assert set(a.records["metric"]) == {"SR"}
        assert set(a.records["n_samples"]) == {3}

    def test_random_policy(self, goals, settings):
        a = success_rate(RandomPolicy(np.random.default_rng(1)), goals, 2, seed=2, settings=settings)
        b = success_rate(RandomPolicy(np.random.default_rng(1)), goals, 2, seed=2, settings=settings)
        pd.testing.assert_frame_equal(a.records, b.records)
        assert all(0.0 <= v <= 1.0 for v in a.records["value"])

    def test_split_annotations(self, goals, settings):
        report = success_rate(ScriptedPolicy(), goals, 1, settings=settings)
        rows = report.records.set_index("goal")
        assert rows.loc["grasp blue door", "split"] == "test"
        assert rows.loc["grasp blue door", "gen_type"] == 1
        assert rows.loc["go top", "split"] == "train"

    @pytest.mark.slow
    def test_scripted_controller_succeeds(self, goals):
        report = success_rate(ScriptedPolicy(), goals, 20, seed=9, settings=WorldSettings(horizon=50))
        assert report.mean() >= 0.95


class TestRewardF1Report:
    def test_records(self, make_reward_model, all_goals, settings):
        goals = [g for g in all_goals if g.predicate == "go"]
        trajectories = collect_scripted_dataset(goals, 6, master_seed=3, settings=settings)
        dataset = any_step_set(trajectories, goals, np.random.default_rng(0), 2)
        report = reward_f1_report(make_reward_model("ma"), dataset)
        assert len(report) == len(goals)
        assert set(report.records["metric"]) == {"F1"}
        assert all(0.0 <= v <= 1.0 for v in report.records["value"])


class TestVaryN:
    @pytest.fixture
    def goals(self, all_goals):
        train = [g for g in all_goals if g.text in ("go top", "grasp any dog")]
        test = [g for g in all_goals if g.text == "grasp blue door"]
        return train, test

    def test_needs_object_modular_agent(self, small_config, make_reward_model, goals):
        agent = Agent(small_config.replace(variant="fc"), make_reward_model("fc"))
        with pytest.raises(UnsupportedVariantError):
            vary_n_eval(agent, None, *goals, n_values=(3,))

    def test_reward_curves(self, make_reward_model, goals, settings):
        table = vary_n_eval(None, make_reward_model("ma"), *goals, n_values=(3, 4), settings=settings,
                            trajectories_per_n=3, states_per_trajectory=2)
        assert list(table.columns) == ["n_objects", "metric", "split", "value"]
        assert list(table["n_objects"]) == [3, 3, 4, 4]
        assert set(table["metric"]) == {"F1"}
        assert list(table["split"]) == ["train", "test", "train", "test"]

    def test_policy_curves_beyond_training_count(self, small_config, make_reward_model, goals, settings):
        agent = Agent(small_config, make_reward_model("ma"))
        table = vary_n_eval(agent, None, *goals, n_values=(5,), episodes_per_goal=1, settings=settings)
        assert list(table["metric"]) == ["SR", "SR"]
        assert list(table["n_objects"]) == [5, 5]
        assert all(0.0 <= v <= 1.0 for v in table["value"])
