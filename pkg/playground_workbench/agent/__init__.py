"""
Policy Learner
Goal-conditioned actor and critic, memories, hindsight relabelling and the
joint training loop
"""

from .agent import Agent, EpisodeResult
from .hindsight import RLBatch, hindsight_relabel
from .imagine import ImagineResult, evaluate_agent, imagine_train
from .memory import GoalRegistry, ReplayBatch, ReplayMemory, RewardMemory, Transition
from .networks import Critic, Policy, policy_variant

__all__ = ['Agent', 'EpisodeResult', 'RLBatch', 'hindsight_relabel', 'ImagineResult',
           'evaluate_agent', 'imagine_train', 'GoalRegistry', 'ReplayBatch', 'ReplayMemory',
           'RewardMemory', 'Transition', 'Critic', 'Policy', 'policy_variant']
