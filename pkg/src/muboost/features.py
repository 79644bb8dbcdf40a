"""Row-major feature containers: a dense numeric block plus a sparse boolean
bag-of-words block in compressed row form."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class BowBlock:
    """Boolean presence matrix, CSR-style: row r holds features
    ``indices[indptr[r]:indptr[r+1]]`` (sorted, unique)."""

    n_features: int
    indptr: np.ndarray  # int64, length n_rows + 1
    indices: np.ndarray  # int32
    _csc: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_vectors(cls, vectors, n_features: int) -> "BowBlock":
        indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
        for i, vec in enumerate(vectors):
            indptr[i + 1] = indptr[i] + len(vec)
        indices = np.empty(indptr[-1], dtype=np.int32)
        for i, vec in enumerate(vectors):
            indices[indptr[i]:indptr[i + 1]] = vec
        if indices.size and (indices.min() < 0 or indices.max() >= max(n_features, 1)):
            raise ValueError("feature id out of range")
        return cls(n_features=n_features, indptr=indptr, indices=indices)

    @property
    def n_rows(self) -> int:
        return len(self.indptr) - 1

    def row_counts(self) -> np.ndarray:
        return np.diff(self.indptr)

    def row_ids(self, r: int) -> np.ndarray:
        return self.indices[self.indptr[r]:self.indptr[r + 1]]

    def _ensure_csc(self) -> tuple[np.ndarray, np.ndarray]:
        # column view: rows containing feature f, rows ascending within f
        if self._csc is None:
            rows = np.repeat(np.arange(self.n_rows, dtype=np.int64), self.row_counts())
            order = np.argsort(self.indices, kind="stable")
            col_rows = rows[order]
            col_ptr = np.zeros(self.n_features + 1, dtype=np.int64)
            np.cumsum(np.bincount(self.indices, minlength=self.n_features), out=col_ptr[1:])
            self._csc = (col_ptr, col_rows)
        return self._csc

    def column_rows(self, f: int) -> np.ndarray:
        col_ptr, col_rows = self._ensure_csc()
        return col_rows[col_ptr[f]:col_ptr[f + 1]]

    def presence(self, f: int) -> np.ndarray:
        out = np.zeros(self.n_rows, dtype=bool)
        out[self.column_rows(f)] = True
        return out

    def __eq__(self, other):
        if not isinstance(other, BowBlock):
            return NotImplemented
        return (self.n_features == other.n_features
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))


@dataclass
class FeatureMatrix:
    """Numeric columns first, then the bag-of-words block.

    Global feature ids: ``0 .. n_numeric-1`` index numeric columns,
    ``n_numeric ..`` index bag-of-words presence features.
    """

    numeric: np.ndarray  # (n_rows, n_numeric) float64
    bow: BowBlock

    def __post_init__(self):
        self.numeric = np.asarray(self.numeric, dtype=np.float64)
        if self.numeric.ndim != 2:
            raise ValueError("numeric block must be 2-D")
        if self.numeric.shape[0] != self.bow.n_rows:
            raise ValueError("numeric and bag-of-words blocks disagree on row count")

    @property
    def n_rows(self) -> int:
        return self.numeric.shape[0]

    @property
    def n_numeric(self) -> int:
        return self.numeric.shape[1]

    @property
    def width(self) -> int:
        return self.n_numeric + self.bow.n_features

    def dense_row(self, r: int) -> np.ndarray:
        row = np.zeros(self.width, dtype=np.float64)
        row[:self.n_numeric] = self.numeric[r]
        row[self.n_numeric + self.bow.row_ids(r)] = 1.0
        return row

    def __eq__(self, other):
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return np.array_equal(self.numeric, other.numeric) and self.bow == other.bow


def matrix_from_dense(dense, n_numeric: int) -> FeatureMatrix:
    """Split a dense array into numeric columns and a 0/1 bag-of-words block."""
    dense = np.asarray(dense, dtype=np.float64)
    numeric = dense[:, :n_numeric]
    bow_cols = dense[:, n_numeric:]
    vectors = [np.nonzero(bow_cols[r])[0] for r in range(dense.shape[0])]
    return FeatureMatrix(numeric=numeric,
                         bow=BowBlock.from_vectors(vectors, bow_cols.shape[1]))
