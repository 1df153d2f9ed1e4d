"""Exhaustive cosine ranking of projected queries against a target vocabulary."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingSpace
from .errors import VocabularyError
from .projection import ProjectionModel, apply


@dataclass(frozen=True)
class TranslationCandidates:
    query: str
    ranked: tuple[tuple[str, float], ...]

    @property
    def words(self) -> list[str]:
        return [w for w, _ in self.ranked]


class TargetIndex:
    """Unit-normalized target matrix plus a lexicographic tie-break key."""

    def __init__(self, target_space: EmbeddingSpace):
        self.words = list(target_space.words)
        mat = np.asarray(target_space.matrix, dtype=np.float64)
        norms = np.linalg.norm(mat, axis=1)
        norms[norms == 0] = 1.0
        self.unit = mat / norms[:, None]
        order = sorted(range(len(self.words)), key=self.words.__getitem__)
        self.lex_rank = np.empty(len(self.words), dtype=np.int64)
        self.lex_rank[order] = np.arange(len(self.words))

    def __len__(self) -> int:
        return len(self.words)

    def rank(self, vectors: np.ndarray, k: int) -> list[list[tuple[str, float]]]:
        vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        out = []
        for v in vectors:
            # One matrix-vector product per query keeps batch and single
            # scoring bit-identical regardless of BLAS blocking.
            norm = np.linalg.norm(v)
            row = np.clip(self.unit @ (v / norm if norm > 0 else v), -1.0, 1.0)
            if k < row.size:
                # Keep every word tied with the k-th best score, then order exactly.
                kth = np.partition(-row, k - 1)[k - 1]
                pool = np.flatnonzero(-row <= kth)
            else:
                pool = np.arange(row.size)
            order = pool[np.lexsort((self.lex_rank[pool], -row[pool]))][:k]
            out.append([(self.words[i], float(row[i])) for i in order])
        return out


def _check_k(k: int, n: int):
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")


def translate(query: str, model: ProjectionModel, source_space: EmbeddingSpace,
              target_space: EmbeddingSpace | TargetIndex, k: int = 10) -> TranslationCandidates:
    """Top-``k`` target words for ``query`` by cosine to its projection.

    Ties are broken by the target word's lexicographic order.
    """
    index = target_space if isinstance(target_space, TargetIndex) else TargetIndex(target_space)
    _check_k(k, len(index))
    if query not in source_space:
        raise VocabularyError(f"query {query!r} is out of vocabulary", word=query)
    y = apply(model, source_space[query])
    return TranslationCandidates(query, tuple(index.rank(y, k)[0]))


def translate_batch(queries, model: ProjectionModel, source_space: EmbeddingSpace,
                    target_space: EmbeddingSpace | TargetIndex, k: int = 10,
                    chunk: int = 256) -> tuple[list[TranslationCandidates], list[str]]:
    """Translate many queries. Out-of-vocabulary queries go to the skip list."""
    index = target_space if isinstance(target_space, TargetIndex) else TargetIndex(target_space)
    _check_k(k, len(index))
    known = [q for q in queries if q in source_space]
    skipped = [q for q in queries if q not in source_space]
    results = []
    for i in range(0, len(known), chunk):
        part = known[i:i + chunk]
        projected = [apply(model, source_space[q]) for q in part]
        for q, ranked in zip(part, index.rank(np.array(projected), k)):
            results.append(TranslationCandidates(q, tuple(ranked)))
    return results, skipped


def format_tsv(results) -> str:
    return "".join(
        f"{r.query}\t{rank}\t{word}\t{score:.6f}\n"
        for r in results for rank, (word, score) in enumerate(r.ranked, 1))
