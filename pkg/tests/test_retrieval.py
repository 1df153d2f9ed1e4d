import numpy as np
import pytest

from lexbridge.embeddings import EmbeddingSpace
from lexbridge.errors import VocabularyError
from lexbridge.projection import ProjectionModel
from lexbridge.retrieval import format_tsv, translate, translate_batch

from oracles import cosine_rank_brute_force

IDENT = ProjectionModel(np.eye(2), 0.0)


def test_self_hit():
    src = EmbeddingSpace(["q"], [[0.3, 0.4]])
    tgt = EmbeddingSpace(["q", "r"], [[0.3, 0.4], [1.0, 0.0]])
    res = translate("q", IDENT, src, tgt, k=1)
    assert res.ranked[0][0] == "q" and res.ranked[0][1] == pytest.approx(1.0)


def test_orthogonal_pair():
    src = EmbeddingSpace(["q"], [[1.0, 0.0]])
    tgt = EmbeddingSpace(["e2", "e1"], [[0.0, 1.0], [1.0, 0.0]])
    assert translate("q", IDENT, src, tgt, k=2).ranked == (("e1", 1.0), ("e2", 0.0))


def test_ties_break_lexicographically():
    src = EmbeddingSpace(["q"], [[1.0, 0.0]])
    tgt = EmbeddingSpace(["c", "a", "b", "d"], [[1, 1], [1, 1], [1, 1], [1, 0]])
    assert translate("q", IDENT, src, tgt, k=3).words == ["d", "a", "b"]
    assert translate("q", IDENT, src, tgt, k=2).words == ["d", "a"]


def _random(n=200, d=12, seed=0):
    rng = np.random.default_rng(seed)
    tgt = EmbeddingSpace(["t%03d" % i for i in range(n)], rng.normal(size=(n, d)))
    src = EmbeddingSpace(["s%03d" % i for i in range(100)], rng.normal(size=(100, d)))
    return src, tgt, ProjectionModel(rng.normal(size=(d, d)), 1.0)


def test_matches_brute_force():
    src, tgt, model = _random()
    for q in src.words[:20]:
        got = translate(q, model, src, tgt, k=10)
        y = src[q] @ model.W
        assert got.words == cosine_rank_brute_force(y, tgt.words, tgt.matrix, 10)
        scores = [s for _, s in got.ranked]
        assert all(-1 <= s <= 1 for s in scores) and scores == sorted(scores, reverse=True)


def test_batch_equals_single_and_skips_oov():
    src, tgt, model = _random(seed=1)
    queries = src.words + ["missing"]
    batch, skipped = translate_batch(queries, model, src, tgt, k=7, chunk=13)
    assert skipped == ["missing"]
    for r in batch:
        assert r == translate(r.query, model, src, tgt, k=7)
    assert translate_batch([], model, src, tgt, k=3) == ([], [])
    assert translate_batch(["s000"], model, src, tgt, k=3)[0][0] == translate(
        "s000", model, src, tgt, k=3)


def test_scale_invariance():
    src, tgt, model = _random(seed=2)
    scaled_tgt = EmbeddingSpace(tgt.words, 3.5 * tgt.matrix)
    scaled_model = ProjectionModel(0.2 * model.W, 1.0)
    for q in src.words[:10]:
        base = translate(q, model, src, tgt, k=15).words
        assert translate(q, model, src, scaled_tgt, k=15).words == base
        assert translate(q, scaled_model, src, tgt, k=15).words == base


def test_oov_query_raises():
    src, tgt, model = _random()
    with pytest.raises(VocabularyError, match="'nope'"):
        translate("nope", model, src, tgt)


def test_tsv_format():
    src = EmbeddingSpace(["q"], [[1.0, 0.0]])
    tgt = EmbeddingSpace(["e1", "e2"], [[1.0, 0.0], [0.0, 1.0]])
    res = translate("q", IDENT, src, tgt, k=2)
    assert format_tsv([res]) == "q\t1\te1\t1.000000\nq\t2\te2\t0.000000\n"
