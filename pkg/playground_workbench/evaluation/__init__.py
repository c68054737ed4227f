"""
Evaluation Harness
Success rates, reward F1 reports, per-type breakdowns, varying-N curves and
significance tests
"""

from .policies import AgentPolicy, GoalPolicy, RandomPolicy, ScriptedPolicy
from .report import EvalReport, per_type_report
from .statistics import WelchResult, compare_architectures, welch_test
from .success import reward_f1_report, run_episode, success_rate
from .vary_n import vary_n_eval

__all__ = ['AgentPolicy', 'GoalPolicy', 'RandomPolicy', 'ScriptedPolicy', 'EvalReport',
           'per_type_report', 'WelchResult', 'compare_architectures', 'welch_test',
           'reward_f1_report', 'run_episode', 'success_rate', 'vary_n_eval']
