"""Loading, trimming and saving of monolingual embedding spaces (word2vec text format)."""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError

# Vocabularies are trimmed to the most frequent words; 200K is the
# standard cutoff for the pretrained fastText spaces this toolkit targets.
DEFAULT_MAX_VOCAB = 200_000

_ENCODING = "utf-8"
_ERRORS = "surrogateescape"  # preserve arbitrary bytes in tokens round-trip


@dataclass
class EmbeddingSpace:
    """An ordered vocabulary with one dense row vector per word.

    Row order is treated as descending corpus-frequency order; frequency
    cuts slice the top rows. Instances are immutable by convention and
    safe to share across threads.
    """

    words: list[str]
    vectors: np.ndarray
    _word2idx: dict[str, int] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d matrix")
        if len(self.words) != self.vectors.shape[0]:
            raise ValueError("word count does not match matrix rows")
        if len(set(self.words)) != len(self.words):
            raise ValueError("duplicate words in vocabulary")
        if not np.isfinite(self.vectors).all():
            raise ValueError("vectors contain non-finite entries")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    @property
    def word_index(self) -> dict[str, int]:
        if self._word2idx is None:
            self._word2idx = {w: i for i, w in enumerate(self.words)}
        return self._word2idx


def _as_text_lines(source):
    """Wrap a path / binary stream / text stream into an iterator of lines."""
    if isinstance(source, (str, Path)):
        return open(source, encoding=_ENCODING, errors=_ERRORS)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding=_ENCODING, errors=_ERRORS)


def load_embeddings(source, max_vocab: int = DEFAULT_MAX_VOCAB) -> EmbeddingSpace:
    """Read a word2vec text stream, keeping the first `max_vocab` valid rows.

    The header line "n d" is mandatory. Rows with the wrong number of
    fields, non-numeric or non-finite values are skipped and reported in a
    single warning; duplicate words keep their first occurrence. Raises
    FormatError on a malformed header or when no valid row is found.
    """
    if max_vocab < 1:
        raise ValueError("max_vocab must be positive")
    f = _as_text_lines(source)
    header = f.readline()
    parts = header.split()
    if len(parts) != 2:
        raise FormatError(f"malformed word2vec header: {header!r}")
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise FormatError(f"malformed word2vec header: {header!r}") from None
    if count < 0 or dim < 1:
        raise FormatError(f"malformed word2vec header: {header!r}")

    keep = min(count, max_vocab)
    words: list[str] = []
    seen: set[str] = set()
    rows: list[np.ndarray] = []
    skipped = 0
    duplicates = 0
    for line in f:
        if len(words) >= keep:
            break
        fields = line.split()
        if not fields:
            continue
        word = fields[0]
        if len(fields) != dim + 1:
            skipped += 1
            continue
        try:
            vec = np.array(fields[1:], dtype=np.float32)
        except ValueError:
            skipped += 1
            continue
        if not np.isfinite(vec).all():
            skipped += 1
            continue
        if word in seen:
            duplicates += 1
            continue
        seen.add(word)
        words.append(word)
        rows.append(vec)

    if skipped:
        warnings.warn(f"skipped {skipped} malformed embedding row(s)", stacklevel=2)
    if duplicates:
        warnings.warn(f"skipped {duplicates} duplicate word(s)", stacklevel=2)
    if not rows:
        raise FormatError("no valid embedding rows found")
    return EmbeddingSpace(words, np.vstack(rows))


def frequency_cut(space: EmbeddingSpace, n: int) -> EmbeddingSpace:
    """Return the sub-space of the `n` most frequent (= first) words."""
    if n < 1:
        raise ValueError("n must be positive")
    n = min(n, len(space))
    return EmbeddingSpace(space.words[:n], space.vectors[:n].copy())


def save_aligned(space: EmbeddingSpace, sink) -> None:
    """Write a space in word2vec text format (6 significant digits).

    Words must be non-empty and free of whitespace, otherwise the output
    could not be re-parsed; such words raise FormatError before anything
    is written.
    """
    for w in space.words:
        if not w or any(c.isspace() for c in w):
            raise FormatError(f"word not representable in word2vec text format: {w!r}")
    close = False
    if isinstance(sink, (str, Path)):
        f = open(sink, "w", encoding=_ENCODING, errors=_ERRORS)
        close = True
    elif isinstance(sink, io.TextIOBase):
        f = sink
    else:
        f = io.TextIOWrapper(sink, encoding=_ENCODING, errors=_ERRORS)
    try:
        f.write(f"{len(space)} {space.dim}\n")
        for word, row in zip(space.words, np.asarray(space.vectors, dtype=np.float32)):
            f.write(word + " " + " ".join(f"{v:.6g}" for v in row) + "\n")
        f.flush()
    finally:
        if close:
            f.close()
        elif isinstance(f, io.TextIOWrapper):
            f.detach()
