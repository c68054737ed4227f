"""
OR Aggregation

NN^OR, a small network approximating "any probability above 0.5", and the
exact max used as its reference. NN^OR reads the probabilities sorted in
decreasing order, truncated or zero-padded to a fixed width, so it is
invariant to object order and runs at any object count.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..core.errors import PretrainFailedError
from ..neural.layers import MLP, Grads, Module, Tape, prefixed
from ..neural.losses import binary_cross_entropy
from ..neural.optim import Adam

logger = logging.getLogger(__name__)

THRESHOLD = 0.5


class ORNetwork(Module):
    """Differentiable OR over a variable-length vector of probabilities."""

    def __init__(self, width: int = 3, hidden: int = 64, input_gain: float = 12.0,
                 rng: Optional[np.random.Generator] = None, dtype=np.float32):
        super().__init__(dtype)
        self.width = width
        self.input_gain = input_gain
        self.mlp = self.add_child("mlp", MLP([width, hidden, 1], "relu", "sigmoid", rng=rng, dtype=dtype))

    def forward(self, probs: np.ndarray) -> Tuple[np.ndarray, Tape]:
        probs = np.asarray(probs, dtype=self.dtype)
        batch, count = probs.shape
        order = np.argsort(-probs, axis=1, kind="stable")
        kept = min(count, self.width)
        top = np.zeros((batch, self.width), dtype=self.dtype)
        top[:, :kept] = np.take_along_axis(probs, order[:, :kept], axis=1)
        out, mlp_tape = self.mlp.forward(self.input_gain * (top - THRESHOLD))
        return out[:, 0], self._record(mlp=mlp_tape, order=order, kept=kept, shape=probs.shape)

    def backward(self, tape: Tape, dout: np.ndarray) -> Tuple[np.ndarray, Grads]:
        self._check(tape)
        dx, mlp_grads = self.mlp.backward(tape["mlp"], np.asarray(dout, dtype=self.dtype)[:, None])
        kept = tape["kept"]
        dprobs = np.zeros(tape["shape"], dtype=self.dtype)
        np.put_along_axis(dprobs, tape["order"][:, :kept], self.input_gain * dx[:, :kept], axis=1)
        return dprobs, prefixed("mlp", mlp_grads)


class MaxAggregator(Module):
    """Exact max; the gradient goes to the arg-max entry."""

    def forward(self, probs: np.ndarray) -> Tuple[np.ndarray, Tape]:
        probs = np.asarray(probs, dtype=self.dtype)
        winner = np.argmax(probs, axis=1)
        out = probs[np.arange(probs.shape[0]), winner]
        return out, self._record(winner=winner, shape=probs.shape)

    def backward(self, tape: Tape, dout: np.ndarray) -> Tuple[np.ndarray, Grads]:
        self._check(tape)
        dprobs = np.zeros(tape["shape"], dtype=self.dtype)
        dprobs[np.arange(dprobs.shape[0]), tape["winner"]] = dout
        return dprobs, {}


def exact_or(probs: np.ndarray) -> np.ndarray:
    """Reference OR: 1 where the largest probability is strictly above 0.5."""
    return (np.max(np.asarray(probs), axis=-1) > THRESHOLD).astype(np.float64)


def _synthetic_batch(rng: np.random.Generator, batch: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform vectors mixed with vectors whose max sits at or just around 0.5."""
    u = rng.uniform(0.0, 1.0, size=(batch, width))
    near = rng.random(batch) < 0.5
    offsets = rng.uniform(0.0005, 0.05, size=batch) * rng.choice([-1.0, 1.0], size=batch)
    offsets[rng.random(batch) < 0.1] = 0.0
    peak = THRESHOLD + offsets
    slot = rng.integers(width, size=batch)
    scaled = u * peak[:, None]
    scaled[np.arange(batch), slot] = peak
    u = np.where(near[:, None], scaled, u)
    return u, exact_or(u)


@dataclass
class PretrainResult:
    accuracy: float
    losses: List[float] = field(default_factory=list)


def evaluate_or(net: ORNetwork, rng: np.random.Generator, samples: int = 10000) -> float:
    """Accuracy on held-out uniform vectors of the network's width."""
    u = rng.uniform(0.0, 1.0, size=(samples, net.width))
    out, _ = net.forward(u)
    return float(np.mean((out > THRESHOLD) == (exact_or(u) > THRESHOLD)))


def pretrain_or(net: ORNetwork, rng: np.random.Generator, steps: int = 4000, batch_size: int = 512,
                lr: float = 0.003, accuracy_threshold: float = 0.995,
                eval_samples: int = 10000) -> PretrainResult:
    """
    Fit NN^OR on synthetic vectors labelled 1{max > 0.5}.

    Raises:
        PretrainFailedError: Held-out accuracy stays below the threshold
    """
    optimizer = Adam(net, lr=lr)
    losses: List[float] = []
    for step in range(steps):
        u, labels = _synthetic_batch(rng, batch_size, net.width)
        out, tape = net.forward(u)
        loss, dout = binary_cross_entropy(out, labels)
        _, grads = net.backward(tape, dout)
        optimizer.step(grads, loss)
        losses.append(loss)
        if step % 1000 == 0:
            logger.debug(f"OR pretraining step {step}: loss {loss:.4f}")

    accuracy = evaluate_or(net, rng, eval_samples)
    logger.info(f"OR network pretrained: held-out accuracy {accuracy:.4f}")
    if accuracy < accuracy_threshold:
        raise PretrainFailedError(
            f"OR network reached {accuracy:.4f} accuracy, below the {accuracy_threshold} threshold"
        )
    return PretrainResult(accuracy=accuracy, losses=losses)
