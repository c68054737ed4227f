"""
Seed derivation

Every random stream is a numpy Generator derived from the run's master seed
and a purpose label, so independent consumers never share a stream and reruns
reproduce bit-for-bit.
"""

import zlib
from typing import Union

import numpy as np


def _label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def derive_seed(master_seed: int, label: str, worker_id: int = 0) -> int:
    """Deterministic 32-bit seed for (master seed, purpose, worker)."""
    sequence = np.random.SeedSequence([int(master_seed), _label_key(label), int(worker_id)])
    return int(sequence.generate_state(1)[0])


def make_rng(master_seed: Union[int, np.random.SeedSequence], label: str = "",
             worker_id: int = 0) -> np.random.Generator:
    """Generator for one purpose of one worker."""
    return np.random.default_rng(derive_seed(int(master_seed), label, worker_id))
