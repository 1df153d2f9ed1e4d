from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import VocabularyError


@dataclass
class EmbeddingSpace:
    """Words and their vectors, stored as one row per word.

    ``meta`` carries training or loading metadata (loss history, duplicate
    counts, determinism flag) and is never serialized into vector files.
    """

    words: list[str]
    matrix: np.ndarray
    normalized: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.words):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match {len(self.words)} words")
        if self.matrix.shape[1] < 1:
            raise ValueError("dim must be >= 1")
        if not np.all(np.isfinite(self.matrix)):
            bad = int(np.argwhere(~np.isfinite(self.matrix))[0, 0])
            raise ValueError(f"non-finite component in vector for {self.words[bad]!r}")
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate words in embedding space")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __getitem__(self, word: str) -> np.ndarray:
        try:
            return self.matrix[self.index[word]]
        except KeyError:
            raise VocabularyError(f"{word!r} not in embedding space", word=word) from None

    def rows(self, words) -> np.ndarray:
        return self.matrix[[self.index[w] for w in words]]


def normalize(space: EmbeddingSpace) -> EmbeddingSpace:
    """Scale every vector to unit L2 norm. Zero vectors are rejected."""
    norms = np.linalg.norm(space.matrix.astype(np.float64), axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        word = space.words[int(zero[0])]
        raise VocabularyError(f"cannot normalize zero vector of {word!r}", word=word)
    matrix = (space.matrix / norms[:, None]).astype(space.matrix.dtype)
    return EmbeddingSpace(list(space.words), matrix, normalized=True, meta=dict(space.meta))
