"""
Evaluation Policies

Anything that maps (scene, goal) to an action can be evaluated. Three
implementations: the trained agent without exploration noise, the scripted
controller and a uniform random policy.
"""

from typing import TYPE_CHECKING, Dict, Optional, Protocol

import numpy as np

from ..core.errors import NoTargetError
from ..environment.scene import Action, Scene
from ..environment.scripted_policy import OPEN, random_action, scripted_policy_action
from ..language.grammar import Goal

if TYPE_CHECKING:
    from ..agent.agent import Agent


class GoalPolicy(Protocol):
    name: str

    def __call__(self, scene: Scene, goal: Goal) -> Action:
        ...


class AgentPolicy:
    """Noise-free actions of an agent; goal embeddings are cached per phrase."""

    name = "agent"

    def __init__(self, agent: "Agent"):
        self.agent = agent
        self._embeddings: Dict[str, np.ndarray] = {}

    def __call__(self, scene: Scene, goal: Goal) -> Action:
        g = self._embeddings.get(goal.text)
        if g is None:
            g = self._embeddings[goal.text] = self.agent.embed([goal])[0]
        values = self.agent.act(scene.state_vector(), g, explore=False)
        return Action.from_array(values, scene.settings.step_max)


class ScriptedPolicy:
    """The scripted oracle controller; stands still when it has no target."""

    name = "scripted"

    def __call__(self, scene: Scene, goal: Goal) -> Action:
        try:
            return scripted_policy_action(scene, goal)
        except NoTargetError:
            return Action(delta=np.zeros(2), gripper_command=OPEN)


class RandomPolicy:
    name = "random"

    def __init__(self, rng: Optional[np.random.Generator] = None):
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def __call__(self, scene: Scene, goal: Goal) -> Action:
        return random_action(self.rng, scene.settings.step_max)
