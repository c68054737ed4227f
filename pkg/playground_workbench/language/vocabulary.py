"""
Goal Vocabulary and Tokenizer

Word-to-id table for goal phrases. Id 0 is reserved for out-of-vocabulary
words; the remaining ids follow the grammar's fixed word order.
"""

import hashlib
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from ..catalog import CATEGORIES, COLORS, RELATIONS, TYPE_WORDS, ZONE_WORDS

OOV_TOKEN = "<oov>"
OOV_ID = 0

GRAMMAR_WORDS: Tuple[str, ...] = (
    ("go", "grasp", "grow", "any", "thing")
    + COLORS + ZONE_WORDS + RELATIONS + TYPE_WORDS + CATEGORIES
)

Phrase = Union[str, Sequence[str]]


def split_phrase(phrase: Phrase) -> Tuple[str, ...]:
    if isinstance(phrase, str):
        return tuple(phrase.split())
    return tuple(phrase)


class Vocabulary:
    """Deterministic word ↔ id mapping with a reserved OOV id."""

    def __init__(self, held_out: Iterable[str] = ()):
        self.held_out = frozenset(held_out)
        self.words: Tuple[str, ...] = (OOV_TOKEN,) + tuple(
            w for w in GRAMMAR_WORDS if w not in self.held_out
        )
        self.word_to_id: Dict[str, int] = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_id and word != OOV_TOKEN

    def encode(self, phrase: Phrase) -> List[int]:
        return [self.word_to_id.get(word, OOV_ID) for word in split_phrase(phrase)]

    def decode(self, token_ids: Sequence[int]) -> List[str]:
        return [self.words[i] for i in token_ids]

    def fingerprint(self) -> str:
        """Stable identifier stored in checkpoint metadata."""
        return hashlib.sha1("\n".join(self.words).encode("utf-8")).hexdigest()[:12]


_DEFAULT = Vocabulary()


def default_vocabulary() -> Vocabulary:
    """Vocabulary over the whole grammar, held-out words included."""
    return _DEFAULT


def tokenize(phrase: Phrase, vocab: Vocabulary = None) -> List[int]:
    """Per-word lookup; unknown words map to the OOV id."""
    return (vocab or _DEFAULT).encode(phrase)


def detokenize(token_ids: Sequence[int], vocab: Vocabulary = None) -> str:
    return " ".join((vocab or _DEFAULT).decode(token_ids))
