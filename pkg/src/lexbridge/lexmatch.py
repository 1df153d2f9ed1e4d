"""Edit-distance candidate sets and probabilistic corpus rewriting.

A word ``w`` of the unlabeled language is linked to every word of the
labeled related language within Levenshtein distance ``phi``. Rewriting then
walks the unlabeled corpus and, per occurrence, swaps ``w`` for a uniformly
chosen member of its candidate set with probability ``pi``.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, Lexicon, _decode, split_lines
from .errors import ConfigError, FormatError, VocabularyError


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit costs over code points."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def within_distance(a: str, b: str, bound: int) -> bool:
    """True iff ``edit_distance(a, b) <= bound``.

    Only the diagonal band of width ``2 * bound + 1`` is filled, and the
    scan stops as soon as every cell in a row exceeds the bound.
    """
    la, lb = len(a), len(b)
    if abs(la - lb) > bound:
        return False
    if a == b:
        return True
    if bound == 0:
        return False
    big = bound + 1
    prev = [j if j <= bound else big for j in range(lb + 1)]
    for i in range(1, la + 1):
        lo = max(1, i - bound)
        hi = min(lb, i + bound)
        cur = [big] * (lb + 1)
        cur[0] = i if i <= bound else big
        ca = a[i - 1]
        row_min = cur[0]
        for j in range(lo, hi + 1):
            v = prev[j - 1] + (ca != b[j - 1])
            if prev[j] + 1 < v:
                v = prev[j] + 1
            if cur[j - 1] + 1 < v:
                v = cur[j - 1] + 1
            if v > big:
                v = big
            cur[j] = v
            if v < row_min:
                row_min = v
        if row_min > bound:
            return False
        prev = cur
    return prev[lb] <= bound


@dataclass(frozen=True)
class CandidateMap:
    phi: int
    candidates: dict[str, frozenset[str]]

    def __getitem__(self, word: str) -> frozenset[str]:
        return self.candidates[word]

    def __contains__(self, word: str) -> bool:
        return word in self.candidates

    def __len__(self) -> int:
        return len(self.candidates)

    def to_tsv(self) -> str:
        return "".join(
            f"{w}\t{','.join(sorted(self.candidates[w]))}\n" for w in sorted(self.candidates))


@dataclass(frozen=True)
class RewriteConfig:
    pi: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.pi <= 1.0:
            raise ConfigError(f"pi must lie in [0, 1], got {self.pi}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class RewriteStats:
    eligible: int
    replaced: int
    distinct_words_touched: int

    @property
    def replacement_rate(self) -> float:
        return self.replaced / self.eligible if self.eligible else 0.0

    def to_text(self) -> str:
        return (f"eligible={self.eligible}\n"
                f"replaced={self.replaced}\n"
                f"replacement_rate={self.replacement_rate:.6f}\n"
                f"distinct_words_touched={self.distinct_words_touched}\n")


class LengthIndex:
    """Words of one lexicon bucketed by length."""

    def __init__(self, words):
        buckets = defaultdict(list)
        for w in words:
            buckets[len(w)].append(w)
        self.buckets = {n: sorted(ws) for n, ws in buckets.items()}

    def query(self, word: str, phi: int) -> frozenset[str]:
        n = len(word)
        hits = []
        for length in range(max(0, n - phi), n + phi + 1):
            for cand in self.buckets.get(length, ()):
                if within_distance(word, cand, phi):
                    hits.append(cand)
        return frozenset(hits)


def _query_chunk(args):
    index, words, phi = args
    return [(w, index.query(w, phi)) for w in words]


def build_candidate_map(lex_b2: Lexicon, lex_b1: Lexicon, phi: int = 1,
                        workers: int = 1) -> CandidateMap:
    """Map each word of ``lex_b2`` to all words of ``lex_b1`` within ``phi`` edits.

    Every word of ``lex_b2`` gets an entry, empty sets included. ``workers > 1``
    splits the query words across processes; the result is identical.
    """
    if phi < 0:
        raise ConfigError(f"phi must be >= 0, got {phi}")
    index = LengthIndex(lex_b1.entries)
    words = sorted(lex_b2.entries)
    if workers <= 1 or len(words) < 2 * workers:
        return CandidateMap(phi, {w: index.query(w, phi) for w in words})
    chunks = [(index, words[i::workers], phi) for i in range(workers)]
    candidates = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_query_chunk, chunks):
            candidates.update(part)
    return CandidateMap(phi, candidates)


def rewrite_corpus(corpus_b2: Corpus, cmap: CandidateMap,
                   cfg: RewriteConfig) -> tuple[Corpus, RewriteStats]:
    """Probabilistically replace tokens by edit-distance neighbours.

    Tokens are visited in corpus order. Each occurrence with a non-empty
    candidate set consumes one uniform draw from a PCG64 stream seeded with
    ``cfg.seed``; if the draw is below ``pi`` a second draw picks a candidate
    from the lexicographically sorted set. The stream is therefore fully
    determined by the corpus, the map and the seed.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    ordered: dict[str, tuple[str, ...]] = {}
    eligible = replaced = 0
    touched = set()
    out_lines = []
    for line in corpus_b2.lines:
        new_line = []
        for tok in line:
            cands = ordered.get(tok)
            if cands is None:
                if tok not in cmap.candidates:
                    raise VocabularyError(
                        f"token {tok!r} has no candidate-map entry", word=tok)
                cands = ordered[tok] = tuple(sorted(cmap.candidates[tok]))
            if not cands:
                new_line.append(tok)
                continue
            eligible += 1
            if rng.random() < cfg.pi:
                replaced += 1
                touched.add(tok)
                new_line.append(cands[int(rng.integers(len(cands)))])
            else:
                new_line.append(tok)
        out_lines.append(tuple(new_line))
    stats = RewriteStats(eligible, replaced, len(touched))
    return Corpus(tuple(out_lines), label=corpus_b2.label), stats


def concat_corpora(a: Corpus, b: Corpus) -> Corpus:
    return Corpus(a.lines + b.lines, label=f"{a.label}+{b.label}")


def write_candidate_map(cmap: CandidateMap, path: str | Path) -> None:
    Path(path).write_bytes(cmap.to_tsv().encode("utf-8"))


def read_candidate_map(path: str | Path, phi: int) -> CandidateMap:
    candidates = {}
    for lineno, line in enumerate(split_lines(_decode(Path(path).read_bytes())), 1):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected word<TAB>candidates", record=lineno)
        word, field = parts
        candidates[word] = frozenset(field.split(",")) if field else frozenset()
    return CandidateMap(phi, candidates)
