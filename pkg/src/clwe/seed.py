"""Seed dictionary construction: unsupervised, from a lexicon file, or identical strings."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingSpace
from .errors import DegenerateSeedError
from .transforms import normalize_rows

DEFAULT_SEED_VOCAB = 4_000  # words per side used for unsupervised seed induction


@dataclass
class Dictionary:
    """Index-level translation pairs between two vocabularies."""

    pairs: list[tuple[int, int]]
    src_size: int
    tgt_size: int

    def __post_init__(self):
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("duplicate translation pairs")
        for s, t in self.pairs:
            if not (0 <= s < self.src_size and 0 <= t < self.tgt_size):
                raise ValueError(f"pair ({s}, {t}) out of range")

    def __len__(self) -> int:
        return len(self.pairs)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.pairs:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        arr = np.asarray(self.pairs, dtype=np.int64)
        return arr[:, 0], arr[:, 1]


@dataclass
class SimilarityProfile:
    """Row-sorted sqrt-similarity rows; one distribution per word.

    Each row holds the word's similarities to the m most frequent words of
    its own language, clamped at zero, square-rooted and sorted in
    non-increasing order, which makes rows comparable across languages.
    """

    matrix: np.ndarray


def similarity_profiles(space: EmbeddingSpace, m: int) -> SimilarityProfile:
    """Monolingual similarity distributions over the top-m words.

    Expects a length-normalized space so the gram matrix holds cosines.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if m > len(space):
        warnings.warn(f"m={m} exceeds vocabulary size {len(space)}; clamping", stacklevel=2)
        m = len(space)
    top = np.asarray(space.vectors[:m], dtype=np.float64)
    gram = top @ top.T
    np.clip(gram, 0.0, None, out=gram)
    np.sqrt(gram, out=gram)
    gram.sort(axis=1)
    return SimilarityProfile(gram[:, ::-1].copy())


def _mutual_nn(sim: np.ndarray) -> list[tuple[int, int]]:
    """Pairs that are each other's best match; ties break to the lower index."""
    fwd = sim.argmax(axis=1)
    bwd = sim.argmax(axis=0)
    return [(i, j) for i, j in enumerate(fwd) if bwd[j] == i]


def induce_unsupervised_seed(X: EmbeddingSpace, Z: EmbeddingSpace, m: int = DEFAULT_SEED_VOCAB) -> Dictionary:
    """Build the initial dictionary from monolingual similarity profiles alone.

    Profile rows of the two languages are matched by cosine; only mutual
    nearest neighbours survive. Both profiles use the same width
    min(m, |X|, |Z|) so rows are comparable.
    """
    if X.dim != Z.dim:
        raise ValueError(f"dimension mismatch: {X.dim} vs {Z.dim}")
    m = min(m, len(X), len(Z))
    px, _ = normalize_rows(similarity_profiles(X, m).matrix)
    pz, _ = normalize_rows(similarity_profiles(Z, m).matrix)
    pairs = _mutual_nn(px @ pz.T)
    if len(pairs) < 2:
        raise DegenerateSeedError("seed induction degenerate: fewer than 2 mutual pairs")
    return Dictionary(pairs, len(X), len(Z))


def read_word_pairs(source) -> list[tuple[str, str]]:
    """Parse a dictionary file: one 'source target' pair per line.

    Tabs or spaces separate the two words; blank lines and lines starting
    with '#' are ignored.
    """
    from .embeddings import _as_text_lines

    pairs = []
    f = _as_text_lines(source)
    for line in f:
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"expected two fields per dictionary line, got: {line!r}")
        pairs.append((fields[0], fields[1]))
    return pairs


def load_dictionary(
    source, X: EmbeddingSpace, Z: EmbeddingSpace, limit: int | None = None
) -> Dictionary:
    """Resolve a word-pair file against two vocabularies.

    Out-of-vocabulary lines are skipped (reported in a warning) and
    duplicates removed; an entirely out-of-vocabulary file is an error.
    `limit` keeps only the first entries of the file, before resolution.
    """
    word_pairs = read_word_pairs(source)
    if limit is not None:
        word_pairs = word_pairs[:limit]
    xi, zi = X.word_index, Z.word_index
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    oov = 0
    for s, t in word_pairs:
        if s not in xi or t not in zi:
            oov += 1
            continue
        p = (xi[s], zi[t])
        if p in seen:
            continue
        seen.add(p)
        pairs.append(p)
    if oov:
        warnings.warn(f"skipped {oov} out-of-vocabulary dictionary line(s)", stacklevel=2)
    if not pairs:
        raise DegenerateSeedError("no in-vocabulary dictionary pairs")
    return Dictionary(pairs, len(X), len(Z))


def identical_strings_seed(X: EmbeddingSpace, Z: EmbeddingSpace) -> Dictionary:
    """Pair every word that appears verbatim in both vocabularies."""
    zi = Z.word_index
    pairs = [(i, zi[w]) for i, w in enumerate(X.words) if w in zi]
    if not pairs:
        raise DegenerateSeedError("no identical strings shared between the vocabularies")
    return Dictionary(pairs, len(X), len(Z))
