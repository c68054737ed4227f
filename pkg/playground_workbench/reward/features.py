"""
Object and Pair Sub-States

Fixed index maps from the flat state vector to per-object inputs
(body current, body delta, object current, object delta) and per-ordered-pair
inputs (body current and delta, then both objects' current and delta).
"""

from functools import lru_cache
from itertools import combinations
from typing import List, Tuple

import numpy as np

from ..catalog import BODY_FEATURES, OBJECT_FEATURES, objects_in_state, observation_size
from ..core.errors import DimensionError

OBJECT_INPUT = 2 * BODY_FEATURES + 2 * OBJECT_FEATURES
PAIR_INPUT = 2 * BODY_FEATURES + 4 * OBJECT_FEATURES


def n_objects_of(states: np.ndarray) -> int:
    """Object count of a (batch, length) state matrix."""
    if states.ndim != 2:
        raise DimensionError(f"states must be (batch, length), got shape {states.shape}")
    n = objects_in_state(states.shape[1])
    if n is None:
        raise DimensionError(f"state length {states.shape[1]} matches no object count")
    return n


def _body_index(n_objects: int) -> List[int]:
    half = observation_size(n_objects)
    body = list(range(BODY_FEATURES))
    return body + [half + k for k in body]


def _object_index(n_objects: int, i: int) -> List[int]:
    half = observation_size(n_objects)
    block = list(range(BODY_FEATURES + i * OBJECT_FEATURES, BODY_FEATURES + (i + 1) * OBJECT_FEATURES))
    return block + [half + k for k in block]


@lru_cache(maxsize=None)
def object_index(n_objects: int) -> np.ndarray:
    body = _body_index(n_objects)
    return np.array([body + _object_index(n_objects, i) for i in range(n_objects)], dtype=np.int64)


@lru_cache(maxsize=None)
def unordered_pairs(n_objects: int) -> Tuple[Tuple[int, int], ...]:
    return tuple(combinations(range(n_objects), 2))


@lru_cache(maxsize=None)
def pair_index(n_objects: int) -> np.ndarray:
    """Index rows for both orderings of every unordered pair: (i, j) then (j, i)."""
    body = _body_index(n_objects)
    rows = []
    for i, j in unordered_pairs(n_objects):
        rows.append(body + _object_index(n_objects, i) + _object_index(n_objects, j))
        rows.append(body + _object_index(n_objects, j) + _object_index(n_objects, i))
    return np.array(rows, dtype=np.int64).reshape(-1, PAIR_INPUT)


def object_substates(states: np.ndarray) -> np.ndarray:
    """(batch, N, 84) per-object inputs."""
    return states[:, object_index(n_objects_of(states))]


def pair_substates(states: np.ndarray) -> np.ndarray:
    """(batch, 2 * C(N, 2), 162) per-ordered-pair inputs."""
    n = n_objects_of(states)
    if n < 2:
        raise DimensionError("pairwise inputs need at least two objects")
    return states[:, pair_index(n)]


def object_substates_backward(d_inputs: np.ndarray, state_width: int) -> np.ndarray:
    """Scatter-add (batch, N, 84) input gradients back onto (batch, state_width) states."""
    batch, n = d_inputs.shape[:2]
    index = object_index(n).reshape(-1)
    d_states = np.zeros((state_width, batch), dtype=d_inputs.dtype)
    np.add.at(d_states, index, d_inputs.reshape(batch, -1).T)
    return d_states.T
