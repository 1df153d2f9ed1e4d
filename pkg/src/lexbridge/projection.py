"""Ridge-regularized linear map between two embedding spaces.

Row-vector convention throughout: a source vector ``x`` of length ``s`` maps
to ``x @ W`` of length ``t``, so ``W`` has shape ``(s, t)`` and fitting
stacks the dictionary's source vectors as the rows of ``X``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .corpus import _decode, split_lines
from .embeddings import EmbeddingSpace
from .errors import FormatError, SingularSystemError

LAMBDA_GRID = tuple(10.0 ** e for e in range(-3, 4))


@dataclass
class TrainingDictionary:
    pairs: list[tuple[str, str]]
    skipped: list[tuple[int, str, str]] = field(default_factory=list)
    duplicates: int = 0

    @property
    def m(self) -> int:
        return len(self.pairs)


@dataclass
class ProjectionModel:
    W: np.ndarray
    lam: float
    fit_report: dict = field(default_factory=dict)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        if self.W.ndim != 2:
            raise ValueError("W must be a matrix")
        if not np.all(np.isfinite(self.W)):
            raise ValueError("W has non-finite entries")

    @property
    def s(self) -> int:
        return self.W.shape[0]

    @property
    def t(self) -> int:
        return self.W.shape[1]


def read_pairs(path: str | Path) -> list[tuple[int, str, str]]:
    """``(line number, source, target)`` for each non-blank TSV line."""
    out = []
    for lineno, line in enumerate(split_lines(_decode(Path(path).read_bytes())), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise FormatError(f"{path}:{lineno}: expected source<TAB>target", record=lineno)
        out.append((lineno, parts[0], parts[1]))
    return out


def load_dictionary(path, source_space: EmbeddingSpace,
                    target_space: EmbeddingSpace) -> TrainingDictionary:
    """Read a seed dictionary, dropping pairs with an out-of-vocabulary side.

    Duplicate pairs keep their first occurrence. A source word with several
    targets contributes one pair per target.
    """
    pairs, skipped, seen = [], [], set()
    duplicates = 0
    for lineno, src, tgt in read_pairs(path):
        if src not in source_space or tgt not in target_space:
            skipped.append((lineno, src, tgt))
            continue
        if (src, tgt) in seen:
            duplicates += 1
            continue
        seen.add((src, tgt))
        pairs.append((src, tgt))
    return TrainingDictionary(pairs, skipped, duplicates)


def _design(pairs, source_space, target_space):
    X = source_space.rows([p[0] for p in pairs]).astype(np.float64)
    Y = target_space.rows([p[1] for p in pairs]).astype(np.float64)
    return X, Y


def solve_ridge(X: np.ndarray, Y: np.ndarray, lam: float) -> np.ndarray:
    """``(X^T X + lam I)^{-1} X^T Y`` via a Cholesky factorization."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    gram = X.T @ X
    if lam:
        gram[np.diag_indices_from(gram)] += lam
    rhs = X.T @ Y
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise SingularSystemError(
            "X^T X + lambda I is not positive definite; use lambda > 0") from None
    diag = np.abs(np.diag(factor[0]))
    # Squared pivot ratio bounds the condition number from below.
    if lam == 0 and (diag.min() / diag.max()) ** 2 <= gram.shape[0] * np.finfo(float).eps:
        raise SingularSystemError(
            "X^T X is numerically rank deficient; use lambda > 0")
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def objective(X, Y, W, lam) -> float:
    """Squared Frobenius residual plus ``lam`` times squared Frobenius norm of W."""
    r = X @ W - Y
    return float(np.sum(r * r) + lam * np.sum(W * W))


def fit(dictionary: TrainingDictionary, source_space: EmbeddingSpace,
        target_space: EmbeddingSpace, lam: float = 1.0) -> ProjectionModel:
    if dictionary.m < 1:
        raise SingularSystemError("training dictionary has no usable pairs")
    X, Y = _design(dictionary.pairs, source_space, target_space)
    W = solve_ridge(X, Y, lam)
    report = {
        "residual": float(np.linalg.norm(X @ W - Y)),
        "m": dictionary.m,
        "s": X.shape[1],
        "t": Y.shape[1],
    }
    return ProjectionModel(W, float(lam), report)


def select_lambda(dictionary: TrainingDictionary, source_space, target_space,
                  seed: int, grid=LAMBDA_GRID, holdout: float = 0.1) -> tuple[float, dict]:
    """Pick lambda from ``grid`` by held-out squared error on a seeded split.

    Returns the chosen value and the per-lambda held-out error.
    """
    m = dictionary.m
    n_hold = max(1, int(round(holdout * m)))
    if m - n_hold < 1:
        raise SingularSystemError("dictionary too small for a held-out split")
    order = np.random.Generator(np.random.PCG64(seed)).permutation(m)
    hold = [dictionary.pairs[i] for i in order[:n_hold]]
    train = [dictionary.pairs[i] for i in order[n_hold:]]
    Xt, Yt = _design(train, source_space, target_space)
    Xh, Yh = _design(hold, source_space, target_space)
    scores = {}
    for lam in grid:
        try:
            W = solve_ridge(Xt, Yt, lam)
        except SingularSystemError:
            continue
        scores[lam] = float(np.mean(np.sum((Xh @ W - Yh) ** 2, axis=1)))
    best = min(scores, key=lambda k: (scores[k], k))
    return best, scores


def apply(model: ProjectionModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.s:
        raise ValueError(f"vector has length {x.shape[-1]}, model expects {model.s}")
    return x @ model.W


def save_model(model: ProjectionModel, path: str | Path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{model.s} {model.t} {model.lam!r}\n")
        for row in model.W:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_model(path: str | Path) -> ProjectionModel:
    lines = [ln for ln in split_lines(_decode(Path(path).read_bytes())) if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty model file", record=0)
    head = lines[0].split()
    try:
        s, t, lam = int(head[0]), int(head[1]), float(head[2])
        if len(head) != 3 or s < 1 or t < 1:
            raise ValueError
    except (ValueError, IndexError):
        raise FormatError(f"{path}: header must be 's t lambda'", record=0) from None
    if len(lines) - 1 != s:
        raise FormatError(f"{path}: header declares {s} rows, found {len(lines) - 1}",
                          record=len(lines))
    W = np.empty((s, t))
    for i, ln in enumerate(lines[1:], 1):
        vals = ln.split()
        if len(vals) != t:
            raise FormatError(f"{path}: row {i} has {len(vals)} entries, expected {t}", record=i)
        try:
            W[i - 1] = [float(v) for v in vals]
        except ValueError:
            raise FormatError(f"{path}: row {i} has a malformed number", record=i) from None
    if not np.all(np.isfinite(W)):
        raise FormatError(f"{path}: non-finite entries", record=0)
    return ProjectionModel(W, lam)
