"""
Goal Embedding

Runs the language model once per distinct goal of a batch and scatters the
embeddings (and, backward, their gradients) to the batch rows.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..core.errors import EmptySequenceError
from ..neural.layers import Grads, Tape
from ..neural.lstm import LanguageModel

TokenSeq = Tuple[int, ...]


@dataclass
class GoalBatchTape:
    lm_tape: Tape
    inverse: np.ndarray
    n_unique: int


def embed_goal(lm: LanguageModel, tokens: Sequence[int]) -> np.ndarray:
    """Final LSTM hidden state for one token sequence."""
    if len(tokens) == 0:
        raise EmptySequenceError("cannot embed an empty goal")
    g, _ = lm.forward([tuple(tokens)])
    return g[0]


def embed_goal_batch(lm: LanguageModel, token_rows: Sequence[TokenSeq]) -> Tuple[np.ndarray, GoalBatchTape]:
    """(batch, H) embeddings for per-row token sequences."""
    index = {}
    inverse = np.empty(len(token_rows), dtype=np.int64)
    for row, tokens in enumerate(token_rows):
        inverse[row] = index.setdefault(tuple(tokens), len(index))
    unique = list(index)
    g_unique, lm_tape = lm.forward(unique)
    return g_unique[inverse], GoalBatchTape(lm_tape, inverse, len(unique))


def embed_goal_batch_backward(lm: LanguageModel, tape: GoalBatchTape, dg: np.ndarray) -> Grads:
    dg_unique = np.zeros((tape.n_unique, dg.shape[1]), dtype=dg.dtype)
    np.add.at(dg_unique, tape.inverse, dg)
    _, grads = lm.backward(tape.lm_tape, dg_unique)
    return grads
