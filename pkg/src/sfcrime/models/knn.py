"""Brute-force k-nearest-neighbour class frequencies."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from ..errors import DataError, ParameterError
from .base import as_arrays, check_query, check_training

# Target number of float64 cells in one query-chunk distance block.
_BLOCK_CELLS = 1 << 22


class KNearestNeighbors:
    """P(c) = share of class ``c`` among the ``k`` nearest training rows.

    Distances are Euclidean on the columns as given. Equal distances are
    broken in favour of the lower training-row index.
    """

    def __init__(self, k: int = 5, threads: Optional[int] = None):
        if int(k) != k or k < 1:
            raise ParameterError(f"k must be a positive integer, got {k}")
        self.k = int(k)
        self.threads = threads

    def fit(self, X, y=None, n_classes=None):
        X, labels = as_arrays(X)
        y = labels if y is None else y
        if y is None:
            raise DataError("kNN needs labels to fit")
        X, y, self.n_classes = check_training(X, y, n_classes)
        if self.k > X.shape[0]:
            raise ParameterError(f"k={self.k} exceeds the {X.shape[0]} training rows")
        self.X = X
        self.y = y
        self.n_features = X.shape[1]
        return self

    def _sq_distances(self, Q):
        # Column-by-column accumulation; no ||a||^2 + ||b||^2 - 2ab shortcut, so
        # distances are exact sums of squared differences.
        D = np.zeros((Q.shape[0], self.X.shape[0]))
        for j in range(self.n_features):
            diff = Q[:, j, None] - self.X[None, :, j]
            D += diff * diff
        return D

    def neighbors(self, Q) -> np.ndarray:
        """Boolean mask (queries x training rows) of the selected neighbours."""
        D = self._sq_distances(Q)
        k = self.k
        kth = np.partition(D, k - 1, axis=1)[:, k - 1:k]
        closer = D < kth
        need = k - closer.sum(axis=1, keepdims=True)
        tied = D == kth
        return closer | (tied & (np.cumsum(tied, axis=1) <= need))

    def _chunk_proba(self, Q):
        mask = self.neighbors(Q)
        out = np.empty((Q.shape[0], self.n_classes))
        for i in range(Q.shape[0]):
            out[i] = np.bincount(self.y[mask[i]], minlength=self.n_classes) / self.k
        return out

    def predict_proba(self, X) -> np.ndarray:
        Q = check_query(as_arrays(X)[0], self.n_features)
        step = max(1, _BLOCK_CELLS // max(1, self.X.shape[0]))
        chunks = [Q[i:i + step] for i in range(0, Q.shape[0], step)]
        if not chunks:
            return np.empty((0, self.n_classes))
        threads = self.threads or 1
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(self._chunk_proba, chunks))
        else:
            parts = [self._chunk_proba(c) for c in chunks]
        return np.vstack(parts)

    def to_dict(self, features_path: str) -> dict:
        """kNN stores no parameters beyond ``k``; the training matrix is referenced."""
        return {"type": "knn", "k": self.k, "n_classes": self.n_classes,
                "n_features": self.n_features, "features_path": str(features_path)}

    @classmethod
    def from_dict(cls, doc: dict, features) -> "KNearestNeighbors":
        X, y = as_arrays(features)
        return cls(doc["k"]).fit(X, y, doc["n_classes"])


def knn_fit(features, k, n_classes=None) -> KNearestNeighbors:
    X, y = as_arrays(features)
    return KNearestNeighbors(k).fit(X, y, n_classes)


def knn_predict_proba(model: KNearestNeighbors, features) -> np.ndarray:
    return model.predict_proba(as_arrays(features)[0])
