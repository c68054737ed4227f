"""
Neural Core: Embedding, LSTM and the Goal Language Model

The LSTM runs over a padded batch of token sequences; rows whose sequence has
ended carry their state unchanged, so the returned hidden state is the one at
each sequence's last token.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from ..core.errors import EmptySequenceError, ShapeError
from .layers import Grads, Module, Tape, glorot_uniform, prefixed

logger = logging.getLogger(__name__)

PAD_ID = 0


class Embedding(Module):
    """Lookup table of word vectors."""

    def __init__(self, vocab_size: int, dim: int, rng: Optional[np.random.Generator] = None,
                 dtype=np.float32):
        super().__init__(dtype)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.vocab_size = vocab_size
        self.dim = dim
        self.add_param("table", rng.uniform(-0.1, 0.1, size=(vocab_size, dim)))

    def forward(self, ids: np.ndarray) -> Tuple[np.ndarray, Tape]:
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.vocab_size):
            raise ShapeError(f"token id outside [0, {self.vocab_size})")
        return self._params["table"][ids], self._record(ids=ids)

    def backward(self, tape: Tape, dy: np.ndarray) -> Tuple[None, Grads]:
        self._check(tape)
        grad = np.zeros_like(self._params["table"])
        np.add.at(grad, tape["ids"], np.asarray(dy, dtype=self.dtype))
        return None, {"table": grad}


class LSTM(Module):
    """Single-layer LSTM; gate blocks ordered input, forget, output, candidate."""

    def __init__(self, input_dim: int, hidden: int, rng: Optional[np.random.Generator] = None,
                 dtype=np.float32):
        super().__init__(dtype)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.input_dim = input_dim
        self.hidden = hidden
        self.add_param("W", glorot_uniform(rng, input_dim + hidden, 4 * hidden))
        bias = np.zeros(4 * hidden)
        bias[hidden:2 * hidden] = 1.0
        self.add_param("b", bias)

    def forward(self, x: np.ndarray, lengths: np.ndarray) -> Tuple[np.ndarray, Tape]:
        x = self._input(x, self.input_dim)
        if x.ndim != 3:
            raise ShapeError(f"LSTM input must be (batch, time, features), got {x.shape}")
        batch, steps, _ = x.shape
        H = self.hidden
        W, b = self._params["W"], self._params["b"]
        lengths = np.asarray(lengths)
        h = np.zeros((batch, H), dtype=self.dtype)
        c = np.zeros((batch, H), dtype=self.dtype)

        cache = []
        for t in range(steps):
            xh = np.concatenate([x[:, t], h], axis=1)
            z = xh @ W + b
            i, f, o = expit(z[:, :H]), expit(z[:, H:2 * H]), expit(z[:, 2 * H:3 * H])
            g = np.tanh(z[:, 3 * H:])
            c_new = f * c + i * g
            tanh_c = np.tanh(c_new)
            h_new = o * tanh_c
            mask = (t < lengths)[:, None].astype(self.dtype)
            cache.append((xh, i, f, o, g, c, tanh_c, mask))
            c = mask * c_new + (1 - mask) * c
            h = mask * h_new + (1 - mask) * h
        return h, self._record(cache=cache, steps=steps, batch=batch)

    def backward(self, tape: Tape, dh: np.ndarray) -> Tuple[np.ndarray, Grads]:
        self._check(tape)
        H, E = self.hidden, self.input_dim
        W = self._params["W"]
        dW = np.zeros_like(W)
        db = np.zeros_like(self._params["b"])
        dx = np.zeros((tape["batch"], tape["steps"], E), dtype=self.dtype)

        dh_next = np.asarray(dh, dtype=self.dtype)
        dc_next = np.zeros_like(dh_next)
        for t in reversed(range(tape["steps"])):
            xh, i, f, o, g, c_prev, tanh_c, mask = tape["cache"][t]
            dh_t, dc_t = dh_next * mask, dc_next * mask
            do = dh_t * tanh_c
            dc = dc_t + dh_t * o * (1.0 - tanh_c * tanh_c)
            dz = np.concatenate([
                dc * g * i * (1.0 - i),
                dc * c_prev * f * (1.0 - f),
                do * o * (1.0 - o),
                dc * i * (1.0 - g * g),
            ], axis=1)
            dW += xh.T @ dz
            db += dz.sum(axis=0)
            dxh = dz @ W.T
            dx[:, t] = dxh[:, :E]
            dh_next = dxh[:, E:] + dh_next * (1 - mask)
            dc_next = dc * f + dc_next * (1 - mask)
        return dx, {"W": dW, "b": db}


def pad_tokens(sequences: Sequence[Sequence[int]]) -> Tuple[np.ndarray, np.ndarray]:
    """Right-pad token sequences into an id matrix; returns (ids, lengths)."""
    lengths = np.array([len(s) for s in sequences], dtype=np.int64)
    if len(sequences) == 0 or lengths.min() == 0:
        raise EmptySequenceError("cannot embed an empty token sequence")
    ids = np.full((len(sequences), int(lengths.max())), PAD_ID, dtype=np.int64)
    for row, seq in enumerate(sequences):
        ids[row, :len(seq)] = seq
    return ids, lengths


class LanguageModel(Module):
    """Word embeddings read by an LSTM; the final hidden state embeds the goal."""

    def __init__(self, vocab_size: int, embedding_dim: int = 32, hidden: int = 100,
                 rng: Optional[np.random.Generator] = None, dtype=np.float32):
        super().__init__(dtype)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.vocab_size = vocab_size
        self.hidden = hidden
        self.embedding = self.add_child("embedding", Embedding(vocab_size, embedding_dim, rng, dtype))
        self.lstm = self.add_child("lstm", LSTM(embedding_dim, hidden, rng, dtype))

    @property
    def out_features(self) -> int:
        return self.hidden

    def forward(self, sequences: Sequence[Sequence[int]]) -> Tuple[np.ndarray, Tape]:
        ids, lengths = pad_tokens(sequences)
        vectors, embed_tape = self.embedding.forward(ids)
        g, lstm_tape = self.lstm.forward(vectors, lengths)
        return g, self._record(embedding=embed_tape, lstm=lstm_tape)

    def backward(self, tape: Tape, dg: np.ndarray) -> Tuple[None, Grads]:
        self._check(tape)
        dvectors, lstm_grads = self.lstm.backward(tape["lstm"], dg)
        _, embed_grads = self.embedding.backward(tape["embedding"], dvectors)
        grads = prefixed("lstm", lstm_grads)
        grads.update(prefixed("embedding", embed_grads))
        return None, grads
