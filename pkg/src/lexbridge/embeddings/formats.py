"""word2vec-style text and binary vector files.

Both formats start with an ASCII header ``V D``. Text records are
``word v1 ... vD``; binary records are the word's UTF-8 bytes, one space,
then D little-endian float32 values with no separator before the next
record.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .space import EmbeddingSpace

log = logging.getLogger(__name__)

FORMATS = ("text", "binary")


def _parse_header(line: bytes | str, path) -> tuple[int, int]:
    if isinstance(line, bytes):
        try:
            line = line.decode("ascii")
        except UnicodeDecodeError:
            raise FormatError(f"{path}: header is not ASCII", record=0) from None
    parts = line.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise FormatError(f"{path}: header must be 'V D', got {line.strip()!r}", record=0)
    vocab, dim = int(parts[0]), int(parts[1])
    if dim < 1:
        raise FormatError(f"{path}: dimension must be >= 1", record=0)
    return vocab, dim


def _assemble(words, rows, path, dim) -> EmbeddingSpace:
    order: dict[str, int] = {}
    kept: list[np.ndarray] = []
    duplicates = 0
    for word, row in zip(words, rows):
        if word in order:
            duplicates += 1
            kept[order[word]] = row
        else:
            order[word] = len(kept)
            kept.append(row)
    if duplicates:
        log.warning("%s: %d duplicate word(s), last occurrence kept", path, duplicates)
    matrix = np.vstack(kept) if kept else np.zeros((0, dim), dtype=np.float32)
    return EmbeddingSpace(list(order), matrix, meta={"duplicates": duplicates})


def _load_text(path: Path) -> EmbeddingSpace:
    with open(path, "rb") as fh:
        raw = fh.read()
    lines = raw.split(b"\n")
    vocab, dim = _parse_header(lines[0], path)
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) < vocab:
        raise FormatError(
            f"{path}: truncated file, header promises {vocab} records, found {len(body)}",
            record=len(body) + 1)
    if len(body) > vocab:
        raise FormatError(f"{path}: more records than the header's {vocab}", record=vocab + 1)
    words, rows = [], []
    for idx, ln in enumerate(body, 1):
        try:
            parts = ln.decode("utf-8").split()
        except UnicodeDecodeError:
            raise FormatError(f"{path}: record {idx} is not valid UTF-8", record=idx) from None
        if len(parts) != dim + 1:
            raise FormatError(
                f"{path}: record {idx} has {len(parts) - 1} components, expected {dim}",
                record=idx)
        try:
            vec = np.array([float(x) for x in parts[1:]], dtype=np.float32)
        except ValueError:
            raise FormatError(f"{path}: record {idx} has a malformed number", record=idx) from None
        if not np.all(np.isfinite(vec)):
            raise FormatError(f"{path}: record {idx} has a non-finite value", record=idx)
        words.append(parts[0])
        rows.append(vec)
    return _assemble(words, rows, path, dim)


def _load_binary(path: Path) -> EmbeddingSpace:
    data = Path(path).read_bytes()
    nl = data.find(b"\n")
    if nl < 0:
        raise FormatError(f"{path}: missing header line", record=0)
    vocab, dim = _parse_header(data[:nl], path)
    pos = nl + 1
    width = 4 * dim
    words, rows = [], []
    for idx in range(1, vocab + 1):
        # Tolerate the LF separators that some writers emit between records.
        while pos < len(data) and data[pos] == 0x0A:
            pos += 1
        sp = data.find(b" ", pos)
        if sp < 0 or sp + 1 + width > len(data):
            raise FormatError(f"{path}: truncated file at record {idx}", record=idx)
        try:
            word = data[pos:sp].decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError(f"{path}: record {idx} word is not valid UTF-8", record=idx) from None
        if not word:
            raise FormatError(f"{path}: record {idx} has an empty word", record=idx)
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=sp + 1).astype(np.float32)
        if not np.all(np.isfinite(vec)):
            raise FormatError(f"{path}: record {idx} has a non-finite value", record=idx)
        words.append(word)
        rows.append(vec)
        pos = sp + 1 + width
    return _assemble(words, rows, path, dim)


def load_embeddings(path: str | Path, format: str = "text") -> EmbeddingSpace:
    if format == "text":
        return _load_text(Path(path))
    if format == "binary":
        return _load_binary(Path(path))
    raise ValueError(f"unknown embedding format {format!r}; expected one of {FORMATS}")


def save_embeddings(space: EmbeddingSpace, path: str | Path, format: str = "text") -> None:
    """Write ``space`` in ``format``. Text values carry 6 decimal places."""
    if format not in FORMATS:
        raise ValueError(f"unknown embedding format {format!r}; expected one of {FORMATS}")
    matrix = np.asarray(space.matrix, dtype=np.float32)
    header = f"{len(space.words)} {space.dim}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        for word, row in zip(space.words, matrix):
            if format == "binary":
                fh.write(word.encode("utf-8") + b" ")
                fh.write(row.astype("<f4").tobytes())
            else:
                vals = " ".join(f"{float(x):.6f}" for x in row)
                fh.write(f"{word} {vals}\n".encode("utf-8"))
