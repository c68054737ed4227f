"""
Playground Environment
Scene simulation, social-partner descriptions, scripted control and trajectory files
"""

from .scene import Action, BodyState, ObjectState, Scene, WorldSettings, sample_scene, state_vector, step
from .scripted_policy import random_action, scripted_policy_action
from .social_partner import SocialPartner, describe
from .trajectories import (
    Trajectory, collect_scripted_dataset, collect_trajectory, load_trajectories, persist_dataset,
)

__all__ = ['Action', 'BodyState', 'ObjectState', 'Scene', 'WorldSettings', 'sample_scene',
           'state_vector', 'step', 'random_action', 'scripted_policy_action', 'SocialPartner',
           'describe', 'Trajectory', 'collect_scripted_dataset', 'collect_trajectory',
           'load_trajectories', 'persist_dataset']
