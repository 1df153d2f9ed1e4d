"""Skip-gram with negative sampling.

The per-pair objective for a center word ``c`` and an observed context word
``o`` is::

    log sigmoid(u_o . v_c) + sum_k log sigmoid(-u_k . v_c)

where ``v`` are input (exported) vectors, ``u`` output vectors, and the
``u_k`` are drawn from the unigram distribution raised to 0.75. Training is
plain SGD ascent with a linearly decaying learning rate, word2vec style.

The inner loop runs under numba. Randomness comes from a SplitMix64 stream
implemented in the kernel, so a given seed yields the same vectors on every
platform in single-worker mode.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass

import numba
import numpy as np

from ..corpus import Corpus
from ..errors import ConfigError
from .space import EmbeddingSpace

log = logging.getLogger(__name__)

NOISE_EXPONENT = 0.75
FINAL_LEARNING_RATE = 1e-4


@dataclass(frozen=True)
class SgnsConfig:
    dim: int = 300
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_learning_rate: float = 0.025
    min_count: int = 1
    subsample_threshold: float = 1e-3
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        for name in ("dim", "window", "negatives", "epochs", "min_count", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.initial_learning_rate > 0:
            raise ConfigError("initial_learning_rate must be > 0")
        if self.subsample_threshold < 0:
            raise ConfigError("subsample_threshold must be >= 0 (0 disables)")


def noise_distribution(counts) -> np.ndarray:
    """Negative-sampling probabilities proportional to count ** 0.75."""
    weights = np.asarray(counts, dtype=np.float64) ** NOISE_EXPONENT
    return weights / weights.sum()


def keep_probabilities(counts, threshold: float) -> np.ndarray:
    """word2vec subsampling: keep a token of relative frequency f with
    probability (sqrt(f / t) + 1) * t / f, capped at 1."""
    counts = np.asarray(counts, dtype=np.float64)
    if threshold <= 0:
        return np.ones_like(counts)
    scaled = threshold * counts.sum()
    return np.minimum(1.0, (np.sqrt(counts / scaled) + 1.0) * scaled / counts)


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def pair_objective(v_center, u_context, u_negatives):
    """Objective and gradients for one (center, context) pair.

    Returns ``(objective, grad_center, grad_context, grad_negatives)``; the
    gradients point uphill. Rows of ``u_negatives`` are treated as
    independent parameters.
    """
    v = np.asarray(v_center, dtype=np.float64)
    uo = np.asarray(u_context, dtype=np.float64)
    un = np.atleast_2d(np.asarray(u_negatives, dtype=np.float64))
    pos = uo @ v
    neg = un @ v
    objective = _log_sigmoid(pos) + _log_sigmoid(-neg).sum()
    g_pos = 1.0 - _sigmoid(pos)
    g_neg = -_sigmoid(neg)
    grad_v = g_pos * uo + g_neg @ un
    grad_uo = g_pos * v
    grad_un = g_neg[:, None] * v[None, :]
    return float(objective), grad_v, grad_uo, grad_un


# -- numba kernel ----------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@numba.njit(cache=True)
def _next_u64(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _uniform(state):
    return float(_next_u64(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _below(state, n):
    # n is small relative to 2**64, so modulo bias is negligible.
    return int(_next_u64(state) % np.uint64(n))


@numba.njit(cache=True)
def _sample_noise(state, cdf):
    u = _uniform(state)
    lo, hi = 0, cdf.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cdf[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo


@numba.njit(cache=True)
def _log_sig(x):
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


@numba.njit(cache=True)
def _sgd_pair(w_in, w_out, center, context, negatives, cdf, lr, state, work):
    """One SGD step on a pair; returns the pair loss (negated objective)."""
    dim = w_in.shape[1]
    for d in range(dim):
        work[d] = 0.0
    loss = 0.0
    for n in range(negatives + 1):
        if n == 0:
            target = context
            label = 1.0
        else:
            target = _sample_noise(state, cdf)
            if target == context:
                continue
            label = 0.0
        f = 0.0
        for d in range(dim):
            f += float(w_in[center, d]) * float(w_out[target, d])
        if label > 0.5:
            loss -= _log_sig(f)
        else:
            loss -= _log_sig(-f)
        sig = 0.5 * (1.0 + math.tanh(0.5 * f))
        g = (label - sig) * lr
        for d in range(dim):
            work[d] += g * w_out[target, d]
            w_out[target, d] += g * w_in[center, d]
    for d in range(dim):
        w_in[center, d] += work[d]
    return loss


@numba.njit(cache=True)
def _train_span(ids, starts, line_lo, line_hi, keep, w_in, w_out, cdf, window,
                negatives, lr0, lr1, done0, total, state):
    """Train over lines [line_lo, line_hi). Returns (loss_sum, pairs, tokens)."""
    dim = w_in.shape[1]
    work = np.zeros(dim, dtype=np.float64)
    buf = np.empty(ids.shape[0], dtype=np.int64)
    loss_sum = 0.0
    pairs = 0
    done = done0
    for li in range(line_lo, line_hi):
        a = starts[li]
        b = starts[li + 1]
        n = 0
        for p in range(a, b):
            w = ids[p]
            if keep[w] < 1.0 and _uniform(state) >= keep[w]:
                continue
            buf[n] = w
            n += 1
        for i in range(n):
            frac = done / total if total > 0 else 0.0
            if frac > 1.0:
                frac = 1.0
            lr = lr0 + (lr1 - lr0) * frac
            reach = window - _below(state, window)
            lo = i - reach if i - reach > 0 else 0
            hi = i + reach + 1 if i + reach + 1 < n else n
            for j in range(lo, hi):
                if j == i:
                    continue
                loss_sum += _sgd_pair(w_in, w_out, buf[i], buf[j], negatives, cdf,
                                      lr, state, work)
                pairs += 1
            done += 1
        done += (b - a) - n
    return loss_sum, pairs, done - done0


@numba.njit(cache=True, parallel=True)
def _train_parallel(ids, starts, bounds, keep, w_in, w_out, cdf, window, negatives,
                    lr0, lr1, done0, total, states):
    # Unsynchronized shared updates; lost writes are accepted.
    k = bounds.shape[0] - 1
    losses = np.zeros(k)
    pairs = np.zeros(k, dtype=np.int64)
    tokens = np.zeros(k, dtype=np.int64)
    for c in numba.prange(k):
        share = done0 + (starts[bounds[c]] - starts[0])
        l, p, t = _train_span(ids, starts, bounds[c], bounds[c + 1], keep, w_in, w_out,
                              cdf, window, negatives, lr0, lr1, share, total, states[c])
        losses[c] = l
        pairs[c] = p
        tokens[c] = t
    return losses.sum(), pairs.sum(), tokens.sum()


def _encode(corpus: Corpus, min_count: int):
    counts = Counter(corpus.tokens())
    vocab = sorted((w for w, c in counts.items() if c >= min_count),
                   key=lambda w: (-counts[w], w))
    index = {w: i for i, w in enumerate(vocab)}
    ids, starts = [], [0]
    for line in corpus.lines:
        ids.extend(index[t] for t in line if t in index)
        starts.append(len(ids))
    return (vocab, np.array([counts[w] for w in vocab], dtype=np.int64),
            np.array(ids, dtype=np.int64), np.array(starts, dtype=np.int64))


def _kernel_state(seed: int, streams: int) -> np.ndarray:
    seq = np.random.SeedSequence([seed, 0x5647])
    return seq.generate_state(streams, dtype=np.uint64).reshape(streams, 1)


def train_sgns(corpus: Corpus, cfg: SgnsConfig | None = None) -> EmbeddingSpace:
    """Train input vectors for every word meeting ``cfg.min_count``.

    The returned space's ``meta`` holds the per-epoch mean pair loss under
    ``loss_history`` and whether the run was deterministic.
    """
    cfg = cfg or SgnsConfig()
    if corpus.token_count == 0:
        raise ConfigError("cannot train on an empty corpus")
    vocab, counts, ids, starts = _encode(corpus, cfg.min_count)
    if not vocab:
        raise ConfigError(f"no word occurs at least min_count={cfg.min_count} times")

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    dim = cfg.dim
    w_in = ((rng.random((len(vocab), dim)) - 0.5) / dim).astype(np.float32)
    w_out = np.zeros((len(vocab), dim), dtype=np.float32)
    cdf = np.cumsum(noise_distribution(counts))
    cdf[-1] = 1.0
    keep = keep_probabilities(counts, cfg.subsample_threshold)

    n_lines = len(starts) - 1
    per_epoch = int(ids.shape[0])
    total = float(per_epoch * cfg.epochs)
    parallel = cfg.workers > 1 and n_lines >= cfg.workers
    if parallel:
        states = _kernel_state(cfg.seed, cfg.workers)
        bounds = np.linspace(0, n_lines, cfg.workers + 1).astype(np.int64)
    else:
        state = _kernel_state(cfg.seed, 1)[0]

    history = []
    done = 0
    for epoch in range(cfg.epochs):
        if parallel:
            loss, pairs, _ = _train_parallel(
                ids, starts, bounds, keep, w_in, w_out, cdf, cfg.window, cfg.negatives,
                cfg.initial_learning_rate, FINAL_LEARNING_RATE, float(done), total, states)
        else:
            loss, pairs, _ = _train_span(
                ids, starts, 0, n_lines, keep, w_in, w_out, cdf, cfg.window, cfg.negatives,
                cfg.initial_learning_rate, FINAL_LEARNING_RATE, float(done), total, state)
        done += per_epoch
        mean = float(loss) / pairs if pairs else float("nan")
        history.append(mean)
        log.debug("epoch %d: %d pairs, mean loss %.6f", epoch + 1, pairs, mean)

    meta = {
        "loss_history": history,
        "deterministic": not parallel,
        "config": asdict(cfg),
        "output_vectors": w_out,
    }
    return EmbeddingSpace(vocab, w_in, meta=meta)
