"""
Reward Function Architectures

All variants share the goal language model (LM) and output a probability that
the goal holds in the state.

    ma    per-object classifier on s_obj(i) gated by a goal attention vector,
          OR-aggregated over objects
    pair  same as ma on ordered object pairs; a pair scores the better of its
          two orderings and the OR runs over the C(N, 2) pairs
    fa    attention at the scene level: the whole state gated, then an MLP
    fc    MLP over the concatenation of state and goal embedding

ma and pair are invariant to object order and accept any N; fa and fc are
bound to the object count they were built for.
"""

import logging
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from ..catalog import state_size
from ..core.errors import DimensionError, UnsupportedVariantError
from ..neural.checkpoint import load_into, module_tensors, read_checkpoint, save_checkpoint
from ..neural.layers import MLP, Dense, Grads, Module, Tape, clone, prefixed
from ..neural.lstm import LanguageModel
from .features import OBJECT_INPUT, PAIR_INPUT, n_objects_of, object_substates, pair_substates
from .language_model import TokenSeq, embed_goal_batch, embed_goal_batch_backward
from .or_network import MaxAggregator, ORNetwork

logger = logging.getLogger(__name__)

VARIANTS = ("ma", "fa", "fc", "pair")


class RewardModel(Module):
    """Language-conditioned reward classifier R(s, g)."""

    def __init__(self, variant: str, vocab_size: int, n_train: int = 3, embedding_dim: int = 32,
                 lstm_hidden: int = 100, object_hidden: Sequence[int] = (256, 256),
                 flat_hidden: Sequence[int] = (256, 256), or_hidden: int = 64, or_width: int = 3,
                 or_input_gain: float = 12.0, aggregation: str = "or_net", freeze_or: bool = True,
                 rng: Optional[np.random.Generator] = None, dtype=np.float32):
        super().__init__(dtype)
        if variant not in VARIANTS:
            raise UnsupportedVariantError(f"unknown reward variant '{variant}'")
        if variant == "pair" and n_train < 2:
            raise DimensionError("the pair variant needs at least two objects")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.variant = variant
        self.n_train = n_train
        self.aggregation = aggregation
        self.hyper = {
            "embedding_dim": embedding_dim, "lstm_hidden": lstm_hidden,
            "object_hidden": list(object_hidden), "flat_hidden": list(flat_hidden),
            "or_hidden": or_hidden, "or_width": or_width, "or_input_gain": or_input_gain,
            "aggregation": aggregation, "freeze_or": freeze_or,
        }

        self.lm = self.add_child("lm", LanguageModel(vocab_size, embedding_dim, lstm_hidden, rng, dtype))
        if variant in ("ma", "pair"):
            width = OBJECT_INPUT if variant == "ma" else PAIR_INPUT
            self.caster = self.add_child("caster", Dense(lstm_hidden, width, "sigmoid", rng, dtype))
            self.classifier = self.add_child(
                "classifier", MLP([width, *object_hidden, 1], "relu", "sigmoid", rng, dtype))
            if aggregation == "max":
                self.aggregator = self.add_child("aggregator", MaxAggregator(dtype))
            else:
                self.aggregator = self.add_child(
                    "aggregator", ORNetwork(or_width, or_hidden, or_input_gain, rng, dtype))
            self.aggregator.frozen = freeze_or
        elif variant == "fa":
            width = state_size(n_train)
            self.caster = self.add_child("caster", Dense(lstm_hidden, width, "sigmoid", rng, dtype))
            self.classifier = self.add_child(
                "classifier", MLP([width, *flat_hidden, 1], "relu", "sigmoid", rng, dtype))
        else:
            width = state_size(n_train) + lstm_hidden
            self.classifier = self.add_child(
                "classifier", MLP([width, *flat_hidden, 1], "relu", "sigmoid", rng, dtype))

    @classmethod
    def from_config(cls, config, vocab_size: int, rng: Optional[np.random.Generator] = None,
                    variant: Optional[str] = None) -> "RewardModel":
        return cls(
            variant=variant or config["variant"], vocab_size=vocab_size, n_train=config["n_objects"],
            embedding_dim=config["word_embedding"], lstm_hidden=config["lstm_hidden"],
            object_hidden=config["object_hidden"], flat_hidden=config["flat_hidden"],
            or_hidden=config["or_hidden"], or_width=config["or_width"],
            or_input_gain=config["or_input_gain"], aggregation=config["aggregation"],
            freeze_or=config["freeze_or"], rng=rng, dtype=config.dtype,
        )

    @property
    def is_modular(self) -> bool:
        return self.variant in ("ma", "pair")

    def _states(self, states: np.ndarray) -> Tuple[np.ndarray, int]:
        states = np.asarray(states, dtype=self.dtype)
        if states.ndim == 1:
            states = states[None, :]
        n = n_objects_of(states)
        if not self.is_modular and n != self.n_train:
            raise DimensionError(
                f"{self.variant} reward model was built for N={self.n_train}, state holds N={n}"
            )
        if self.variant == "pair" and n < 2:
            raise DimensionError("the pair variant needs at least two objects")
        return states, n

    # -- scoring from a goal embedding ---------------------------------------

    def forward_embedding(self, states: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, Tape]:
        states, n = self._states(states)
        g = np.asarray(g, dtype=self.dtype)
        if self.variant == "ma":
            return self._modular_forward(object_substates(states), g)
        if self.variant == "pair":
            return self._pair_forward(pair_substates(states), g)
        if self.variant == "fa":
            alpha, caster_tape = self.caster.forward(g)
            out, cls_tape = self.classifier.forward(states * alpha)
            return out[:, 0], self._record(states=states, caster=caster_tape, classifier=cls_tape,
                                           items=np.zeros((states.shape[0], 0), dtype=self.dtype))
        out, cls_tape = self.classifier.forward(np.concatenate([states, g], axis=1))
        return out[:, 0], self._record(width=states.shape[1], classifier=cls_tape,
                                       items=np.zeros((states.shape[0], 0), dtype=self.dtype))

    def _modular_forward(self, inputs: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, Tape]:
        alpha, caster_tape = self.caster.forward(g)
        scores, cls_tape = self.classifier.forward(inputs * alpha[:, None, :])
        per_object = scores[..., 0]
        out, agg_tape = self.aggregator.forward(per_object)
        return out, self._record(inputs=inputs, caster=caster_tape, classifier=cls_tape,
                                 aggregator=agg_tape, items=per_object)

    def _pair_forward(self, inputs: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, Tape]:
        alpha, caster_tape = self.caster.forward(g)
        scores, cls_tape = self.classifier.forward(inputs * alpha[:, None, :])
        ordered = scores[..., 0]
        forward_order, reverse_order = ordered[:, 0::2], ordered[:, 1::2]
        reverse_wins = reverse_order > forward_order
        per_pair = np.where(reverse_wins, reverse_order, forward_order)
        out, agg_tape = self.aggregator.forward(per_pair)
        return out, self._record(inputs=inputs, caster=caster_tape, classifier=cls_tape,
                                 aggregator=agg_tape, reverse_wins=reverse_wins, items=per_pair)

    def backward_embedding(self, tape: Tape, dout: np.ndarray) -> Tuple[np.ndarray, Grads]:
        self._check(tape)
        dout = np.asarray(dout, dtype=self.dtype)
        grads: Grads = {}
        if self.variant in ("ma", "pair"):
            ditems, agg_grads = self.aggregator.backward(tape["aggregator"], dout)
            grads.update(prefixed("aggregator", agg_grads))
            if self.variant == "pair":
                wins = tape["reverse_wins"]
                dordered = np.zeros(ditems.shape[:1] + (2 * ditems.shape[1],), dtype=self.dtype)
                dordered[:, 0::2] = np.where(wins, 0.0, ditems)
                dordered[:, 1::2] = np.where(wins, ditems, 0.0)
                ditems = dordered
            dx, cls_grads = self.classifier.backward(tape["classifier"], ditems[..., None])
            dalpha = np.sum(dx * tape["inputs"], axis=1)
            dg, caster_grads = self.caster.backward(tape["caster"], dalpha)
            grads.update(prefixed("caster", caster_grads))
        elif self.variant == "fa":
            dx, cls_grads = self.classifier.backward(tape["classifier"], dout[:, None])
            dg, caster_grads = self.caster.backward(tape["caster"], dx * tape["states"])
            grads.update(prefixed("caster", caster_grads))
        else:
            dx, cls_grads = self.classifier.backward(tape["classifier"], dout[:, None])
            dg = dx[:, tape["width"]:]
        grads.update(prefixed("classifier", cls_grads))
        return dg, grads

    # -- scoring from goal tokens --------------------------------------------

    def forward(self, states: np.ndarray, goal_tokens: Sequence[TokenSeq]) -> Tuple[np.ndarray, Tape]:
        g, goal_tape = embed_goal_batch(self.lm, goal_tokens)
        out, head_tape = self.forward_embedding(states, g)
        return out, self._record(goal=goal_tape, head=head_tape)

    def backward(self, tape: Tape, dout: np.ndarray) -> Tuple[None, Grads]:
        self._check(tape)
        dg, grads = self.backward_embedding(tape["head"], dout)
        grads.update(prefixed("lm", embed_goal_batch_backward(self.lm, tape["goal"], dg)))
        return None, grads

    def predict(self, states: np.ndarray, goal_tokens: Sequence[TokenSeq]) -> np.ndarray:
        out, _ = self.forward(states, goal_tokens)
        return out

    def exact_max_view(self) -> "RewardModel":
        """Copy of a modular model whose OR network is replaced by the exact max."""
        if not self.is_modular:
            raise UnsupportedVariantError(f"{self.variant} reward model has no object aggregation")
        twin = clone(self)
        twin.aggregator = twin.add_child("aggregator", MaxAggregator(self.dtype))
        twin.aggregation = "max"
        return twin

    def meta(self) -> Dict[str, Any]:
        return {"kind": "reward_model", "variant": self.variant, "n_train": self.n_train,
                "vocab_size": self.lm.vocab_size, "dtype": self.dtype.name, **self.hyper}


def reward_forward(model: RewardModel, state: np.ndarray, g: np.ndarray) -> Tuple[float, np.ndarray]:
    """Probability for one state and goal embedding, plus per-object probabilities (ma/pair)."""
    out, tape = model.forward_embedding(np.asarray(state)[None, :], np.asarray(g)[None, :])
    return float(out[0]), tape["items"][0]


def pair_reward_forward(model: RewardModel, state: np.ndarray, g: np.ndarray) -> Tuple[float, np.ndarray]:
    """Probability plus the C(N, 2) pair scores of a pair model."""
    if model.variant != "pair":
        raise UnsupportedVariantError(f"pair_reward_forward needs the pair variant, got '{model.variant}'")
    return reward_forward(model, state, g)


def save_reward_model(path, model: RewardModel, extra_meta: Optional[Dict[str, Any]] = None):
    meta = {**model.meta(), **(extra_meta or {})}
    return save_checkpoint(path, module_tensors(model), meta)


def load_reward_model(path, rng: Optional[np.random.Generator] = None) -> Tuple[RewardModel, Dict[str, Any]]:
    """Rebuild a reward model from its checkpoint metadata and load its weights."""
    tensors, meta = read_checkpoint(path)
    if meta.get("kind") != "reward_model":
        raise UnsupportedVariantError(f"{path} is not a reward model checkpoint")
    model = RewardModel(
        variant=meta["variant"], vocab_size=meta["vocab_size"], n_train=meta["n_train"],
        embedding_dim=meta["embedding_dim"], lstm_hidden=meta["lstm_hidden"],
        object_hidden=meta["object_hidden"], flat_hidden=meta["flat_hidden"],
        or_hidden=meta["or_hidden"], or_width=meta["or_width"], or_input_gain=meta["or_input_gain"],
        aggregation=meta["aggregation"], freeze_or=meta["freeze_or"], rng=rng, dtype=meta["dtype"],
    )
    load_into(model, tensors)
    logger.info(f"Loaded {model.variant} reward model from {path}")
    return model, meta
