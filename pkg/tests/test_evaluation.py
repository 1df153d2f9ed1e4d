import math

import numpy as np
import pytest

from lexbridge.errors import ConfigError
from lexbridge.evaluation import (TestDictionary, evaluate, hit_probability,
                                  load_test_dictionary, precision_at_k, random_baseline,
                                  rd_column, trend_export)

from oracles import precision_naive


def gold_of(d):
    return TestDictionary({k: frozenset(v) for k, v in d.items()})


def test_perfect_and_empty():
    gold = gold_of({"a": {"x"}, "b": {"y"}})
    assert precision_at_k({"a": ["x", "y"], "b": ["y", "x"]}, gold, 1)[0] == 1.0
    for k in (1, 2):
        assert precision_at_k({"a": ["q", "r"], "b": ["q", "r"]}, gold, k)[0] == 0.0
    with pytest.raises(ValueError):
        precision_at_k({}, TestDictionary({}), 1)


def test_hand_evaluated_ranks():
    # gold hits at ranks 1, 3, 12 and never
    filler = ["f%d" % i for i in range(20)]

    def ranked(gold_word, rank):
        lst = list(filler)
        if rank:
            lst[rank - 1] = gold_word
        return lst

    preds = {"q1": ranked("g1", 1), "q2": ranked("g2", 3), "q3": ranked("g3", 12),
             "q4": ranked("g4", None)}
    gold = gold_of({f"q{i}": {f"g{i}"} for i in range(1, 5)})
    assert precision_at_k(preds, gold, 1)[0] == 0.25
    assert precision_at_k(preds, gold, 5)[0] == 0.50
    assert precision_at_k(preds, gold, 10)[0] == 0.50


def test_oov_handling():
    gold = gold_of({"a": {"x"}, "b": {"y"}})
    p, n, skipped = precision_at_k({"a": ["x"]}, gold, 1)
    assert (p, n, skipped) == (1.0, 1, 1)
    assert precision_at_k({"a": ["x"]}, gold, 1, oov_as_miss=True)[0] == 0.5


def test_any_gold_counts():
    gold = gold_of({"a": {"x", "z"}})
    assert precision_at_k({"a": ["z", "q"]}, gold, 1)[0] == 1.0


def test_short_prediction_lists_rejected():
    gold = gold_of({"a": {"x"}})
    with pytest.raises(ValueError):
        precision_at_k({"a": ["x"]}, gold, 2)
    assert precision_at_k({"a": ["x"]}, gold, 2, vocab_size=1)[0] == 1.0


def test_against_naive_oracle():
    rng = np.random.default_rng(0)
    for _ in range(200):
        vocab = ["w%d" % i for i in range(30)]
        n = int(rng.integers(1, 10))
        preds, gold = {}, {}
        for i in range(n):
            q = "q%d" % i
            gold[q] = set(rng.choice(vocab, int(rng.integers(1, 4))))
            if rng.random() < 0.8:
                preds[q] = list(rng.permutation(vocab))
        if not preds:
            continue
        for k in (1, 3, 10, 30):
            assert precision_at_k(preds, gold_of(gold), k)[0] == precision_naive(preds, gold, k)


def test_hit_probability():
    for N, k in ((10, 3), (33522, 10), (100, 100)):
        assert hit_probability(N, 1, k) == pytest.approx(k / N, abs=1e-15)
    assert hit_probability(50, 3, 50) == 1.0
    exact = 1 - math.comb(40 - 3, 7) / math.comb(40, 7)
    assert hit_probability(40, 3, 7) == pytest.approx(exact, rel=1e-12)


def test_random_baseline_small():
    res = random_baseline(20, [1, 2, 2], 5, trials=4000, seed=1)
    assert abs(res.empirical - res.expected) <= 3 * res.stderr
    assert random_baseline(33522, [1], 10, trials=0).expected == pytest.approx(10 / 33522)
    assert round(10 / 33522, 2) == 0.0
    assert random_baseline(7, [1, 3], 7, trials=10).empirical == 1.0


def test_rd_column():
    assert rd_column(100) == 10
    assert rd_column(33522) == 3352
    assert rd_column(10, 1.0) == 10
    assert rd_column(3) == 1
    assert rd_column(25) == 3  # 2.5 rounds half up


def _ranked_predictions(rng, n_queries=30, N=50):
    vocab = ["w%d" % i for i in range(N)]
    preds = {"q%d" % i: list(rng.permutation(vocab)) for i in range(n_queries)}
    gold = gold_of({q: {p[int(rng.integers(0, N))]} for q, p in preds.items()})
    return preds, gold


def test_report_and_trend():
    preds, gold = _ranked_predictions(np.random.default_rng(4))
    rep = evaluate(preds, gold, [1, 5, 10], 50, provenance={"phi": 1, "pi": 0.5})
    assert rep.rd_k == 5
    assert list(rep.per_k) == [1, 5, 10]
    assert rep.rd_precision == rep.per_k[5]
    row = rep.table_row()
    assert row.splitlines()[0] == "P@1\tP@5\tP@10\tRD=0.10"
    assert len(row.splitlines()[1].split("\t")) == 4
    text = rep.to_text()
    assert "provenance.phi=1" in text and "rd_k=5" in text
    csv = trend_export(rep, [1, 5, 10])
    lines = csv.splitlines()
    assert lines[0] == "k,precision,baseline_precision"
    values = [float(x.split(",")[1]) for x in lines[1:]]
    assert values == sorted(values)
    assert values == [rep.per_k[1], rep.per_k[5], rep.per_k[10]] or \
        [round(v, 6) for v in values] == [round(rep.per_k[k], 6) for k in (1, 5, 10)]
    assert trend_export(rep, [5]).count("\n") == 2
    with pytest.raises(ConfigError):
        trend_export(rep, [5, 1])


def test_load_test_dictionary(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("a\tx\na\ty\nb\tz\n")
    gold = load_test_dictionary(p)
    assert gold.n == 2 and gold.gold["a"] == {"x", "y"}
