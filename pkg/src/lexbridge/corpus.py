"""Corpus ingestion, lexicons and vocabulary-overlap statistics."""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable

from .errors import CorpusDecodeError, FormatError


@dataclass(frozen=True)
class Corpus:
    """Ordered token sequences, one per input line."""

    lines: tuple[tuple[str, ...], ...]
    label: str = ""
    token_count: int = field(init=False)

    def __post_init__(self):
        lines = tuple(tuple(line) for line in self.lines)
        object.__setattr__(self, "lines", lines)
        object.__setattr__(self, "token_count", sum(len(line) for line in lines))

    def tokens(self) -> Iterable[str]:
        for line in self.lines:
            yield from line

    def to_text(self) -> str:
        """Canonical serialization: space-joined tokens, LF after every line."""
        return "".join(" ".join(line) + "\n" for line in self.lines)


@dataclass(frozen=True)
class Lexicon:
    entries: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def words(self) -> set[str]:
        return set(self.entries)

    def sorted_items(self) -> list[tuple[str, int]]:
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass(frozen=True)
class OverlapReport:
    label_a: str
    label_b: str
    size_a: int
    size_b: int
    intersection: int

    @property
    def ratio(self) -> float:
        if self.size_a == 0:
            return 0.0
        return round(self.intersection / self.size_a, 4)

    def to_tsv(self) -> str:
        return "\t".join([
            self.label_a, self.label_b, str(self.size_a), str(self.size_b),
            str(self.intersection), f"{self.ratio:.4f}",
        ])


@lru_cache(maxsize=None)
def _fold_char(ch: str) -> str:
    # Approximates Unicode simple case folding: single code point in, single out.
    folded = ch.casefold()
    if len(folded) == 1:
        return folded
    lowered = ch.lower()
    return lowered if len(lowered) == 1 else ch


def _fold(text: str) -> str:
    return "".join(_fold_char(ch) for ch in text)


@lru_cache(maxsize=None)
def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punct(chunk: str) -> str:
    start, end = 0, len(chunk)
    while start < end and _is_punct(chunk[start]):
        start += 1
    while end > start and _is_punct(chunk[end - 1]):
        end -= 1
    return chunk[start:end]


def _is_numeric(token: str) -> bool:
    return any(ch.isdigit() for ch in token) and all(
        ch.isdigit() or _is_punct(ch) for ch in token)


def _decode(raw: bytes) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusDecodeError(
            f"invalid UTF-8 at byte offset {exc.start}", offset=exc.start) from exc


def split_lines(text: str) -> list[str]:
    """Split on LF, accepting CRLF; a trailing newline does not open a new line."""
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def tokenize_line(line: str, drop_numeric: bool = False) -> tuple[str, ...]:
    out = []
    for chunk in line.split():
        token = _strip_punct(_fold(chunk))
        if not token:
            continue
        if drop_numeric and _is_numeric(token):
            continue
        out.append(token)
    return tuple(out)


def tokenize(raw_text: str | bytes, label: str = "", drop_numeric: bool = False) -> Corpus:
    """Tokenize raw text into a :class:`Corpus`.

    Each line is lowercased, split on whitespace, and each chunk loses its
    leading and trailing punctuation; chunks left empty are dropped. Lines
    that end up with no tokens are kept as empty sequences so that line
    positions survive.

    Raises:
        CorpusDecodeError: if ``raw_text`` is bytes and not valid UTF-8.
    """
    text = _decode(raw_text) if isinstance(raw_text, (bytes, bytearray)) else raw_text
    return Corpus(
        tuple(tokenize_line(line, drop_numeric) for line in split_lines(text)),
        label=label)


def read_corpus(path: str | Path, label: str | None = None,
                drop_numeric: bool = False) -> Corpus:
    path = Path(path)
    return tokenize(path.read_bytes(), label=label if label is not None else path.stem,
                    drop_numeric=drop_numeric)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_bytes(corpus.to_text().encode("utf-8"))


def build_lexicon(corpus: Corpus, min_count: int = 1) -> Lexicon:
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts = Counter(corpus.tokens())
    return Lexicon({w: c for w, c in counts.items() if c >= min_count})


def vocab_overlap(lex_a: Lexicon, lex_b: Lexicon,
                  label_a: str = "A", label_b: str = "B") -> OverlapReport:
    small, large = (lex_a, lex_b) if len(lex_a) <= len(lex_b) else (lex_b, lex_a)
    inter = sum(1 for w in small.entries if w in large.entries)
    return OverlapReport(label_a, label_b, lex_a.size, lex_b.size, inter)


def lexicon_to_tsv(lexicon: Lexicon) -> str:
    return "".join(f"{w}\t{c}\n" for w, c in lexicon.sorted_items())


def write_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    Path(path).write_bytes(lexicon_to_tsv(lexicon).encode("utf-8"))


def read_lexicon(path: str | Path) -> Lexicon:
    entries: dict[str, int] = {}
    text = _decode(Path(path).read_bytes())
    for lineno, line in enumerate(split_lines(text), 1):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected word<TAB>count")
        word, count = parts
        try:
            n = int(count)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: count {count!r} is not an integer") from None
        if n < 1:
            raise FormatError(f"{path}:{lineno}: count must be positive")
        entries[word] = n
    return Lexicon(entries)

