"""Feature vectors: points in R^n with 1-based sparse/dense coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from margin_forge.errors import DimensionError, InvalidDataError

#: The two admissible class labels.
VALID_LABELS = (1, -1)


def check_label(value: int) -> int:
    """Return ``value`` as int if it is +1 or -1, raise otherwise."""
    if value != 1 and value != -1:
        raise InvalidDataError(f"label must be +1 or -1, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class FeatureVector:
    """A point in R^dim stored as (1-based index, value) pairs.

    Indices are strictly increasing and within [1, dim]; values are finite.
    Dense vectors carry every index; sparse vectors omit zero coordinates.
    """

    dim: int
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        prev = 0
        for index, value in self.entries:
            if index <= prev:
                raise ValueError(
                    f"indices must be strictly increasing, got {index} after {prev}"
                )
            if index > self.dim:
                raise ValueError(f"index {index} exceeds dim {self.dim}")
            if not math.isfinite(value):
                raise InvalidDataError(f"non-finite value at index {index}")
            prev = index

    @classmethod
    def dense(cls, values: Iterable[float]) -> "FeatureVector":
        """Build a dense vector from a plain sequence of coordinates."""
        vals = [float(v) for v in values]
        return cls(dim=len(vals), entries=tuple((i + 1, v) for i, v in enumerate(vals)))

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[tuple[int, float]]) -> "FeatureVector":
        """Build a (sparse) vector from (index, value) pairs."""
        return cls(dim=dim, entries=tuple((int(i), float(v)) for i, v in pairs))

    def to_dense(self) -> np.ndarray:
        """Expand into a freshly allocated dense float array of length dim."""
        out = np.zeros(self.dim)
        for index, value in self.entries:
            out[index - 1] = value
        return out

    def nonzero_entries(self) -> tuple[tuple[int, float], ...]:
        """Entries with explicit zeros dropped (the sparse file convention)."""
        return tuple((i, v) for i, v in self.entries if v != 0.0)


def check_same_dim(a: FeatureVector, b: FeatureVector) -> None:
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} != {b.dim}")


def dataset_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    """Stack feature vectors into a dense (n, dim) array.

    All vectors must share the same dim.
    """
    if not vectors:
        raise ValueError("cannot stack an empty sequence of vectors")
    dim = vectors[0].dim
    out = np.zeros((len(vectors), dim))
    for row, vec in enumerate(vectors):
        if vec.dim != dim:
            raise DimensionError(f"dimension mismatch: {vec.dim} != {dim}")
        for index, value in vec.entries:
            out[row, index - 1] = value
    return out
