"""
Reward Functions
Goal-conditioned reward classifiers (ma, fa, fc, pair), OR aggregation,
datasets, supervised training and F1 evaluation
"""

from .architectures import (
    VARIANTS, RewardModel, load_reward_model, pair_reward_forward, reward_forward, save_reward_model,
)
from .dataset import RewardDataset, any_step_set, labelled_by_oracle, load_dataset, relabel, training_set
from .features import object_substates, object_substates_backward, pair_substates
from .language_model import embed_goal
from .or_network import MaxAggregator, ORNetwork, evaluate_or, exact_or, pretrain_or
from .training import (
    F1Result, TrainingResult, f1_score, install_or, predict_f1, pretrained_or, train_reward,
)

__all__ = ['VARIANTS', 'RewardModel', 'load_reward_model', 'pair_reward_forward', 'reward_forward',
           'save_reward_model', 'RewardDataset', 'any_step_set', 'labelled_by_oracle', 'load_dataset',
           'relabel', 'training_set', 'object_substates', 'object_substates_backward', 'pair_substates', 'embed_goal',
           'MaxAggregator', 'ORNetwork', 'evaluate_or', 'exact_or', 'pretrain_or', 'F1Result',
           'TrainingResult', 'f1_score', 'install_or', 'predict_f1', 'pretrained_or', 'train_reward']
