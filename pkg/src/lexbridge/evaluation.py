"""Precision@k, the uniform random ranker baseline, and trend tables."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .projection import read_pairs


@dataclass
class TestDictionary:
    gold: dict[str, frozenset[str]]

    __test__ = False  # keep pytest from collecting this class

    @property
    def n(self) -> int:
        return len(self.gold)

    def __post_init__(self):
        for src, targets in self.gold.items():
            if not targets:
                raise ValueError(f"empty gold set for {src!r}")


def load_test_dictionary(path: str | Path) -> TestDictionary:
    gold: dict[str, set[str]] = {}
    for _, src, tgt in read_pairs(path):
        gold.setdefault(src, set()).add(tgt)
    return TestDictionary({s: frozenset(t) for s, t in gold.items()})


def _hits_at(predictions: Mapping[str, Sequence[str]], gold: TestDictionary,
             k: int, vocab_size: int | None) -> tuple[int, int, int]:
    hits = evaluated = skipped = 0
    for query, targets in gold.gold.items():
        ranked = predictions.get(query)
        if ranked is None:
            skipped += 1
            continue
        if len(ranked) < k and (vocab_size is None or len(ranked) != vocab_size):
            raise ValueError(
                f"prediction list for {query!r} has {len(ranked)} entries, need {k}")
        evaluated += 1
        if any(w in targets for w in ranked[:k]):
            hits += 1
    return hits, evaluated, skipped


def precision_at_k(predictions: Mapping[str, Sequence[str]], gold: TestDictionary, k: int,
                   oov_as_miss: bool = False,
                   vocab_size: int | None = None) -> tuple[float, int, int]:
    """Fraction of test queries with a gold target among their top ``k``.

    Queries absent from ``predictions`` are out of vocabulary: they are left
    out of the denominator unless ``oov_as_miss`` is set. Returns
    ``(precision, n_evaluated, n_skipped_oov)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if gold.n == 0:
        raise ValueError("empty test set")
    hits, evaluated, skipped = _hits_at(predictions, gold, k, vocab_size)
    denom = evaluated + skipped if oov_as_miss else evaluated
    if denom == 0:
        raise ValueError("no test query is in vocabulary")
    return hits / denom, evaluated, skipped


def hit_probability(N: int, g: int, k: int) -> float:
    """Chance that a uniform k-subset of N words contains one of g gold words,
    1 - C(N-g, k) / C(N, k)."""
    if not 0 <= k <= N:
        raise ValueError(f"k must lie in [0, {N}]")
    g = min(g, N)
    miss = 1.0
    for i in range(g):
        miss *= max(N - k - i, 0) / (N - i)
    return 1.0 - miss


@dataclass(frozen=True)
class BaselineResult:
    expected: float
    empirical: float
    stderr: float
    trials: int


def random_baseline(N: int, gold_sizes: Sequence[int], k: int, trials: int = 10_000,
                    seed: int = 0) -> BaselineResult:
    """Analytic and simulated precision of a ranker that returns k uniform words.

    Each trial draws one k-subset without replacement per distinct gold-set
    size and scores it against gold indices ``0..g-1``; per-size hit rates are
    averaged with the queries' size frequencies as weights.
    """
    if not 1 <= k <= N:
        raise ValueError(f"k must lie in [1, {N}]")
    if not gold_sizes:
        raise ValueError("gold_sizes is empty")
    sizes = Counter(min(int(g), N) for g in gold_sizes)
    n = sum(sizes.values())
    expected = sum(c * hit_probability(N, g, k) for g, c in sizes.items()) / n
    if trials < 1:
        return BaselineResult(expected, float("nan"), float("nan"), 0)
    rng = np.random.Generator(np.random.PCG64(seed))
    empirical = var = 0.0
    for g, c in sorted(sizes.items()):
        hits = 0
        for _ in range(trials):
            draw = rng.choice(N, size=k, replace=False)
            hits += bool(np.any(draw < g))
        rate = hits / trials
        w = c / n
        empirical += w * rate
        var += w * w * rate * (1 - rate) / trials
    return BaselineResult(expected, empirical, math.sqrt(var), trials)


def rd_column(N: int, target_precision: float = 0.10) -> int:
    """k at which a single-gold uniform ranker reaches ``target_precision``:
    round-half-up of ``target_precision * N``, clamped to [1, N]."""
    if not 0 < target_precision <= 1:
        raise ValueError("target_precision must lie in (0, 1]")
    return min(N, max(1, math.floor(target_precision * N + 0.5)))


def _fmt(x: float) -> str:
    return f"{x:.6f}"


@dataclass
class EvalReport:
    per_k: dict[int, float]
    n_evaluated: int
    n_skipped_oov: int
    target_vocab_size: int
    rd_target: float
    rd_k: int
    rd_precision: float
    baseline: dict[int, float]
    oov_as_miss: bool = False
    label: str = ""
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        ks = sorted(self.per_k)
        for a, b in zip(ks, ks[1:]):
            if self.per_k[a] > self.per_k[b] + 1e-12:
                raise AssertionError(f"P@{a} > P@{b}: precision must be non-decreasing in k")
        for k, p in self.per_k.items():
            if not 0.0 <= p <= 1.0:
                raise AssertionError(f"P@{k} = {p} outside [0, 1]")

    def table_row(self, ks=(1, 5, 10)) -> str:
        """Header and one row: P@k for each of ``ks`` then the RD column."""
        head = [f"P@{k}" for k in ks] + [f"RD={self.rd_target:.2f}"]
        vals = [f"{self.per_k[k]:.4f}" for k in ks] + [f"{self.rd_precision:.4f}"]
        return "\t".join(head) + "\n" + "\t".join(vals) + "\n"

    def to_text(self) -> str:
        lines = [
            f"label={self.label}",
            f"n_evaluated={self.n_evaluated}",
            f"n_skipped_oov={self.n_skipped_oov}",
            f"oov_as_miss={str(self.oov_as_miss).lower()}",
            f"target_vocab_size={self.target_vocab_size}",
        ]
        lines += [f"p@{k}={_fmt(self.per_k[k])}" for k in sorted(self.per_k)]
        lines += [f"baseline@{k}={_fmt(self.baseline[k])}" for k in sorted(self.baseline)]
        lines += [
            f"rd_target={self.rd_target:g}",
            f"rd_k={self.rd_k}",
            f"rd_precision={_fmt(self.rd_precision)}",
        ]
        lines += [f"provenance.{key}={self.provenance[key]}" for key in sorted(self.provenance)]
        return "\n".join(lines) + "\n"


def evaluate(predictions: Mapping[str, Sequence[str]], gold: TestDictionary, ks,
             target_vocab_size: int, rd_target: float = 0.10, oov_as_miss: bool = False,
             label: str = "", provenance: dict | None = None) -> EvalReport:
    """Score ``predictions`` at every k in ``ks`` and at the RD column's k.

    Prediction lists must reach ``max(ks)`` and ``rd_column(N, rd_target)``.
    """
    N = target_vocab_size
    rd_k = rd_column(N, rd_target)
    per_k = {}
    evaluated = skipped = 0
    for k in sorted(set(ks) | {rd_k}):
        per_k[k], evaluated, skipped = precision_at_k(
            predictions, gold, k, oov_as_miss=oov_as_miss, vocab_size=N)
    sizes = [len(gold.gold[q]) for q in gold.gold if oov_as_miss or q in predictions]
    baseline = {k: random_baseline(N, sizes, k, trials=0).expected for k in per_k}
    report = EvalReport(
        per_k={k: per_k[k] for k in sorted(set(ks))}, n_evaluated=evaluated,
        n_skipped_oov=skipped, target_vocab_size=N, rd_target=rd_target, rd_k=rd_k,
        rd_precision=per_k[rd_k], baseline={k: baseline[k] for k in sorted(set(ks))},
        oov_as_miss=oov_as_miss, label=label, provenance=dict(provenance or {}))
    report.baseline[rd_k] = baseline[rd_k]
    return report


def trend_export(report: EvalReport, grid: Sequence[int]) -> str:
    """CSV ``k,precision,baseline_precision`` over ``grid``."""
    grid = list(grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("k grid must be strictly increasing")
    rows = ["k,precision,baseline_precision"]
    for k in grid:
        if k == report.rd_k and k not in report.per_k:
            p = report.rd_precision
        elif k in report.per_k:
            p = report.per_k[k]
        else:
            raise KeyError(f"report has no precision for k={k}")
        rows.append(f"{k},{_fmt(p)},{_fmt(report.baseline[k])}")
    return "\n".join(rows) + "\n"
