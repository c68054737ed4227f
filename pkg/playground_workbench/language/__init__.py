"""
Goal Language
Grammar enumeration, train/test split, tokenization and the reward oracle
"""

from .grammar import (
    Goal, enumerate_goals, enumerate_pair_goals, parse_goal, restrict_goals,
    GENERALIZATION_NAMES, PAIR_TEST_PHRASES,
)
from .oracle import decode_state, oracle_labels, oracle_reward
from .splits import GoalSplit, generalization_type, pair_split, test_split
from .vocabulary import Vocabulary, default_vocabulary, detokenize, tokenize

__all__ = ['Goal', 'enumerate_goals', 'enumerate_pair_goals', 'parse_goal',
           'restrict_goals', 'GENERALIZATION_NAMES', 'PAIR_TEST_PHRASES',
           'decode_state', 'oracle_labels', 'oracle_reward', 'GoalSplit',
           'generalization_type', 'pair_split', 'test_split', 'Vocabulary',
           'default_vocabulary', 'detokenize', 'tokenize']
