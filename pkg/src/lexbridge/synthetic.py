"""Toy related languages with a planted dictionary.

Every language realizes the same set of concepts. Sentences are random
walks over a sparse concept graph, sampled independently per language, so
the corpora are comparable but not parallel. Language B reuses language A's
surface form for each concept, except that a chosen fraction of forms get one
random character edit. English forms are unrelated strings.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .lexmatch import within_distance

ALPHABET = string.ascii_lowercase


@dataclass
class ToyLanguages:
    forms_a: list[str]
    forms_b: list[str]
    forms_en: list[str]
    edited: list[bool]
    corpus_a: Corpus
    corpus_b: Corpus
    corpus_en: Corpus
    train_concepts: list[int]
    test_concepts: list[int]

    def train_pairs(self) -> list[tuple[str, str]]:
        return [(self.forms_a[c], self.forms_en[c]) for c in self.train_concepts]

    def test_pairs(self) -> list[tuple[str, str]]:
        return [(self.forms_b[c], self.forms_en[c]) for c in self.test_concepts]


def _random_word(rng, lo=5, hi=8):
    n = int(rng.integers(lo, hi + 1))
    return "".join(ALPHABET[i] for i in rng.integers(0, len(ALPHABET), n))


def _distinct_forms(rng, n, min_distance=3):
    forms: list[str] = []
    while len(forms) < n:
        w = _random_word(rng)
        if all(not within_distance(w, f, min_distance - 1) for f in forms):
            forms.append(w)
    return forms


def _one_edit(rng, word):
    pos = int(rng.integers(0, len(word) + 1))
    letter = ALPHABET[int(rng.integers(0, len(ALPHABET)))]
    op = int(rng.integers(0, 3))
    if op == 0 and pos < len(word):
        return word[:pos] + letter + word[pos + 1:]
    if op == 1 and pos < len(word) and len(word) > 2:
        return word[:pos] + word[pos + 1:]
    return word[:pos] + letter + word[pos:]


def _walk_corpus(rng, graph, weights, forms, n_tokens, label, lo=6, hi=12):
    n = len(forms)
    lines, total = [], 0
    while total < n_tokens:
        length = min(int(rng.integers(lo, hi + 1)), n_tokens - total)
        c = int(rng.integers(0, n))
        line = []
        for _ in range(length):
            line.append(forms[c])
            c = int(graph[c][rng.choice(len(graph[c]), p=weights[c])])
        lines.append(tuple(line))
        total += length
    return Corpus(tuple(lines), label=label)


def make_toy_languages(n_concepts: int = 100, tokens_per_language: int = 2000,
                       edit_fraction: float = 0.7, train_fraction: float = 0.5,
                       successors: int = 3, seed: int = 0) -> ToyLanguages:
    rng = np.random.Generator(np.random.PCG64(seed))
    forms_a = _distinct_forms(rng, n_concepts)
    forms_en = _distinct_forms(rng, n_concepts)

    n_edit = int(round(edit_fraction * n_concepts))
    to_edit = set(int(i) for i in rng.permutation(n_concepts)[:n_edit])
    forms_b, edited = [], []
    for c, a in enumerate(forms_a):
        if c not in to_edit:
            forms_b.append(a)
            edited.append(False)
            continue
        while True:
            b = _one_edit(rng, a)
            # The edited form must stay a 1-edit neighbour of its own A form only.
            if b != a and b not in forms_b and all(
                    not within_distance(b, o, 1) for i, o in enumerate(forms_a) if i != c):
                break
        forms_b.append(b)
        edited.append(True)

    graph = [rng.choice(n_concepts, size=successors, replace=False) for _ in range(n_concepts)]
    weights = [rng.dirichlet(np.ones(successors)) for _ in range(n_concepts)]
    corpus_a = _walk_corpus(rng, graph, weights, forms_a, tokens_per_language, "A")
    corpus_b = _walk_corpus(rng, graph, weights, forms_b, tokens_per_language, "B")
    corpus_en = _walk_corpus(rng, graph, weights, forms_en, tokens_per_language, "EN")

    order = [int(i) for i in rng.permutation(n_concepts)]
    n_train = int(round(train_fraction * n_concepts))
    return ToyLanguages(forms_a, forms_b, forms_en, edited, corpus_a, corpus_b, corpus_en,
                        sorted(order[:n_train]), sorted(order[n_train:]))


def write_pairs(pairs, path: str | Path) -> None:
    Path(path).write_bytes("".join(f"{s}\t{t}\n" for s, t in pairs).encode("utf-8"))


def write_fixture(outdir: str | Path, n_concepts: int = 100, tokens_per_language: int = 2000,
                  dim: int = 20, seed: int = 7) -> dict[str, Path]:
    """Write a pipeline-ready fixture: two toy corpora, English vectors trained
    on a third toy corpus, the planted seed dictionary and the test dictionary."""
    from .corpus import write_corpus
    from .embeddings import SgnsConfig, save_embeddings, train_sgns

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    toy = make_toy_languages(n_concepts, tokens_per_language, seed=seed)
    paths = {name: out / name for name in ("b1.txt", "b2.txt", "en.vec", "train.tsv", "test.tsv")}
    write_corpus(toy.corpus_a, paths["b1.txt"])
    write_corpus(toy.corpus_b, paths["b2.txt"])
    en = train_sgns(toy.corpus_en, SgnsConfig(dim=dim, epochs=20, subsample_threshold=0.0,
                                              seed=seed))
    save_embeddings(en, paths["en.vec"], "text")
    write_pairs(toy.train_pairs(), paths["train.tsv"])
    write_pairs(toy.test_pairs(), paths["test.tsv"])
    return paths


if __name__ == "__main__":
    import sys

    write_fixture(sys.argv[1] if len(sys.argv) > 1 else "fixture")
