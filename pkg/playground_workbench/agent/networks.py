"""
Policy and Critic Networks

Goal-conditioned actor and critic in three variants.

    ma    Deep Sets over objects: each object sub-state is gated by a goal
          attention vector, projected by a shared network into a latent of
          size n_train x input width, summed over objects and decoded by a head
    fa    the whole state (and action) gated by the goal, then an MLP
    fc    MLP over the concatenation of state, action and goal embedding

The goal embedding comes from the reward model's language model and is an
input here; no gradient flows back into the language model from RL losses.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from ..catalog import state_size
from ..core.errors import DimensionError, UnsupportedVariantError
from ..neural.layers import MLP, Dense, Grads, Module, Tape, prefixed
from ..reward.features import OBJECT_INPUT, n_objects_of, object_substates, object_substates_backward

logger = logging.getLogger(__name__)

POLICY_VARIANTS = ("ma", "fa", "fc")
ACTION_DIM = 3


def policy_variant(reward_variant: str) -> str:
    """Actor-critic variant paired with a reward variant (pair models drive an ma agent)."""
    return "ma" if reward_variant == "pair" else reward_variant


class GoalConditionedNetwork(Module):
    """Shared plumbing of the actor and the critic."""

    output_activation = "identity"
    extra_width = 0

    def __init__(self, variant: str, n_train: int = 3, goal_dim: int = 100,
                 object_hidden: Sequence[int] = (256, 256), flat_hidden: Sequence[int] = (256, 256),
                 out_features: int = 1, rng: Optional[np.random.Generator] = None,
                 dtype=np.float32, zero_last: bool = False):
        super().__init__(dtype)
        if variant not in POLICY_VARIANTS:
            raise UnsupportedVariantError(f"unknown actor-critic variant '{variant}'")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.variant = variant
        self.n_train = n_train
        self.goal_dim = goal_dim

        if variant == "ma":
            width = OBJECT_INPUT + self.extra_width
            self.latent_dim = n_train * width
            self.caster = self.add_child("caster", Dense(goal_dim, width, "sigmoid", rng, dtype))
            self.projector = self.add_child(
                "projector", MLP([width, object_hidden[0], self.latent_dim], "relu", "relu", rng, dtype))
            self.head = self.add_child(
                "head", MLP([self.latent_dim, object_hidden[-1], out_features], "relu",
                            self.output_activation, rng, dtype, zero_last=zero_last))
        elif variant == "fa":
            width = state_size(n_train) + self.extra_width
            self.caster = self.add_child("caster", Dense(goal_dim, width, "sigmoid", rng, dtype))
            self.head = self.add_child(
                "head", MLP([width, *flat_hidden, out_features], "relu", self.output_activation,
                            rng, dtype, zero_last=zero_last))
        else:
            width = state_size(n_train) + self.extra_width + goal_dim
            self.head = self.add_child(
                "head", MLP([width, *flat_hidden, out_features], "relu", self.output_activation,
                            rng, dtype, zero_last=zero_last))

    def _states(self, states: np.ndarray) -> Tuple[np.ndarray, int]:
        states = np.asarray(states, dtype=self.dtype)
        if states.ndim == 1:
            states = states[None, :]
        n = n_objects_of(states)
        if self.variant != "ma" and n != self.n_train:
            raise DimensionError(f"{self.variant} network was built for N={self.n_train}, state holds N={n}")
        return states, n

    # -- Deep Sets path ------------------------------------------------------

    def _set_forward(self, inputs: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, Tape]:
        gate, caster_tape = self.caster.forward(g)
        projected, projector_tape = self.projector.forward(inputs * gate[:, None, :])
        latent = projected.sum(axis=1)
        out, head_tape = self.head.forward(latent)
        return out, self._record(inputs=inputs, gate=gate, caster=caster_tape,
                                 projector=projector_tape, head=head_tape, latent=latent)

    def _set_backward(self, tape: Tape, dout: np.ndarray) -> Tuple[np.ndarray, np.ndarray, Grads]:
        dlatent, head_grads = self.head.backward(tape["head"], dout)
        n = tape["inputs"].shape[1]
        dprojected = np.repeat(dlatent[:, None, :], n, axis=1)
        dx, projector_grads = self.projector.backward(tape["projector"], dprojected)
        dg, caster_grads = self.caster.backward(tape["caster"], np.sum(dx * tape["inputs"], axis=1))
        grads = prefixed("head", head_grads)
        grads.update(prefixed("projector", projector_grads))
        grads.update(prefixed("caster", caster_grads))
        return dx * tape["gate"][:, None, :], dg, grads

    # -- flat paths ----------------------------------------------------------

    def _flat_forward(self, x: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, Tape]:
        if self.variant == "fa":
            gate, caster_tape = self.caster.forward(g)
            out, head_tape = self.head.forward(x * gate)
            return out, self._record(x=x, gate=gate, caster=caster_tape, head=head_tape)
        out, head_tape = self.head.forward(np.concatenate([x, g], axis=1))
        return out, self._record(width=x.shape[1], head=head_tape)

    def _flat_backward(self, tape: Tape, dout: np.ndarray) -> Tuple[np.ndarray, np.ndarray, Grads]:
        dh, head_grads = self.head.backward(tape["head"], dout)
        grads = prefixed("head", head_grads)
        if self.variant == "fa":
            dg, caster_grads = self.caster.backward(tape["caster"], dh * tape["x"])
            grads.update(prefixed("caster", caster_grads))
            return dh * tape["gate"], dg, grads
        width = tape["width"]
        return dh[:, :width], dh[:, width:], grads


class Policy(GoalConditionedNetwork):
    """Deterministic actor Π(s, g) with actions in [-1, 1]^3."""

    output_activation = "tanh"

    def __init__(self, variant: str = "ma", n_train: int = 3, goal_dim: int = 100,
                 object_hidden: Sequence[int] = (256, 256), flat_hidden: Sequence[int] = (256, 256),
                 rng: Optional[np.random.Generator] = None, dtype=np.float32):
        super().__init__(variant, n_train, goal_dim, object_hidden, flat_hidden,
                         out_features=ACTION_DIM, rng=rng, dtype=dtype)

    @classmethod
    def from_config(cls, config, goal_dim: int, rng: Optional[np.random.Generator] = None) -> "Policy":
        return cls(policy_variant(config["variant"]), config["n_objects"], goal_dim,
                   config["object_hidden"], config["flat_hidden"], rng=rng, dtype=config.dtype)

    def forward(self, states: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, Tape]:
        states, _ = self._states(states)
        g = np.asarray(g, dtype=self.dtype)
        if self.variant == "ma":
            actions, inner = self._set_forward(object_substates(states), g)
        else:
            actions, inner = self._flat_forward(states, g)
        return actions, self._record(inner=inner, width=states.shape[1])

    def backward(self, tape: Tape, dactions: np.ndarray) -> Tuple[Tuple[np.ndarray, np.ndarray], Grads]:
        self._check(tape)
        dactions = np.asarray(dactions, dtype=self.dtype)
        if self.variant == "ma":
            dinputs, dg, grads = self._set_backward(tape["inner"], dactions)
            dstates = object_substates_backward(dinputs, tape["width"])
        else:
            dstates, dg, grads = self._flat_backward(tape["inner"], dactions)
        return (dstates, dg), grads

    def act(self, states: np.ndarray, g: np.ndarray) -> np.ndarray:
        actions, _ = self.forward(states, g)
        return actions

    def latent(self, states: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Summed object latent fed to the head (ma only)."""
        if self.variant != "ma":
            raise UnsupportedVariantError(f"{self.variant} policy has no object latent")
        _, tape = self.forward(states, g)
        return tape["inner"]["latent"]


class Critic(GoalConditionedNetwork):
    """Action-value Q(s, a, g)."""

    extra_width = ACTION_DIM

    def __init__(self, variant: str = "ma", n_train: int = 3, goal_dim: int = 100,
                 object_hidden: Sequence[int] = (256, 256), flat_hidden: Sequence[int] = (256, 256),
                 rng: Optional[np.random.Generator] = None, dtype=np.float32, zero_last: bool = False):
        super().__init__(variant, n_train, goal_dim, object_hidden, flat_hidden,
                         out_features=1, rng=rng, dtype=dtype, zero_last=zero_last)

    @classmethod
    def from_config(cls, config, goal_dim: int, rng: Optional[np.random.Generator] = None,
                    zero_last: bool = False) -> "Critic":
        return cls(policy_variant(config["variant"]), config["n_objects"], goal_dim,
                   config["object_hidden"], config["flat_hidden"], rng=rng, dtype=config.dtype,
                   zero_last=zero_last)

    def forward(self, states: np.ndarray, actions: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, Tape]:
        states, n = self._states(states)
        actions = np.asarray(actions, dtype=self.dtype).reshape(states.shape[0], ACTION_DIM)
        g = np.asarray(g, dtype=self.dtype)
        if self.variant == "ma":
            per_object = np.repeat(actions[:, None, :], n, axis=1)
            inputs = np.concatenate([object_substates(states), per_object], axis=2)
            q, inner = self._set_forward(inputs, g)
        else:
            q, inner = self._flat_forward(np.concatenate([states, actions], axis=1), g)
        return q[:, 0], self._record(inner=inner, width=states.shape[1])

    def backward(self, tape: Tape, dq: np.ndarray) -> Tuple[Tuple[np.ndarray, np.ndarray, np.ndarray], Grads]:
        self._check(tape)
        dq = np.asarray(dq, dtype=self.dtype)[:, None]
        width = tape["width"]
        if self.variant == "ma":
            dinputs, dg, grads = self._set_backward(tape["inner"], dq)
            dstates = object_substates_backward(dinputs[..., :OBJECT_INPUT], width)
            dactions = dinputs[..., OBJECT_INPUT:].sum(axis=1)
        else:
            dx, dg, grads = self._flat_backward(tape["inner"], dq)
            dstates, dactions = dx[:, :width], dx[:, width:]
        return (dstates, dactions, dg), grads
