"""Dense lemma vectors (word2vec text format) and the arithmetic composed on
top of them: cosine, componentwise sum, centroid.

Lookups of absent lemmas are explicit misses; nothing ever substitutes a
default vector.
"""

from __future__ import annotations

import gzip
import logging
import math
import os
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmbeddingFormatError, UncoveredItemError, ZeroVectorError

logger = logging.getLogger(__name__)


class EmbeddingStore:
    """lemma -> fixed-dimension float vector."""

    def __init__(self, dimension: int, vectors: dict[str, np.ndarray]):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self._vectors = {}
        for lemma, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dimension,):
                raise ValueError(f"{lemma!r}: vector shape {arr.shape} != ({dimension},)")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{lemma!r}: vector has NaN/inf components")
            arr.flags.writeable = False
            self._vectors[lemma] = arr

    def __contains__(self, lemma: str) -> bool:
        return lemma in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def get(self, lemma: str) -> Optional[np.ndarray]:
        return self._vectors.get(lemma)

    def vector(self, lemma: str) -> np.ndarray:
        vec = self._vectors.get(lemma)
        if vec is None:
            raise UncoveredItemError(lemma)
        return vec

    def lemmas(self) -> Iterable[str]:
        return self._vectors.keys()


def load_vectors(path, vocabulary_filter: Optional[set[str]] = None) -> EmbeddingStore:
    """Read word2vec text format: a "count dim" header line, then one
    "word v1 ... v<dim>" line per vector. `.gz` paths decompress on the fly.

    When a vocabulary filter is given, only those lemmas are kept. A
    duplicated word keeps its first vector (with a warning); a line whose
    float count disagrees with the header dimension is an error.
    """
    opener = gzip.open if os.fspath(path).endswith(".gz") else open
    vectors: dict[str, np.ndarray] = {}
    with opener(path, "rt", encoding="utf-8") as handle:
        header = handle.readline().split()
        if len(header) != 2:
            raise EmbeddingFormatError(f"{path}: header must be 'count dim'")
        try:
            declared_count, dimension = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingFormatError(f"{path}: non-integer header {header!r}")
        if dimension < 1:
            raise EmbeddingFormatError(f"{path}: dimension must be >= 1")
        n_read = 0
        for line_no, line in enumerate(handle, start=2):
            parts = line.rstrip("\n").split(" ")
            if parts and parts[-1] == "":
                parts.pop()  # tolerate a trailing space (common in exports)
            if len(parts) < 2:
                continue
            word = parts[0]
            if len(parts) - 1 != dimension:
                raise EmbeddingFormatError(
                    f"{path}:{line_no}: expected {dimension} components, got {len(parts) - 1}"
                )
            n_read += 1
            if vocabulary_filter is not None and word not in vocabulary_filter:
                continue
            if word in vectors:
                logger.warning("%s:%d: duplicate word %r, keeping first", path, line_no, word)
                continue
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{line_no}: unparseable component")
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(f"{path}:{line_no}: NaN/inf component")
            vectors[word] = vec
    if n_read != declared_count:
        logger.warning("%s: header declares %d vectors, file has %d", path, declared_count, n_read)
    return EmbeddingStore(dimension, vectors)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; undefined (error) for zero vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = math.sqrt(float(np.dot(a, a)))
    norm_b = math.sqrt(float(np.dot(b, b)))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVectorError("cosine undefined for a zero vector")
    value = float(np.dot(a, b)) / (norm_a * norm_b)
    return max(-1.0, min(1.0, value))


def sum_vectors(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Componentwise sum of a nonempty, dimension-consistent list."""
    if len(vectors) == 0:
        raise ValueError("cannot sum an empty list of vectors")
    total = np.array(vectors[0], dtype=np.float64, copy=True)
    for vec in vectors[1:]:
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != total.shape:
            raise ValueError(f"dimension mismatch: {vec.shape} vs {total.shape}")
        total += vec
    return total


def centroid(vectors: Sequence[np.ndarray]) -> np.ndarray:
    return sum_vectors(vectors) / len(vectors)
