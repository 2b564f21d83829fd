"""Shared helpers for the probabilistic classifiers."""

from __future__ import annotations

from typing import Optional, Protocol

import numpy as np

from ..errors import DataError, ParameterError


class ProbabilisticClassifier(Protocol):
    n_classes: int

    def fit(self, X, y, n_classes: Optional[int] = None) -> "ProbabilisticClassifier": ...

    def predict_proba(self, X) -> np.ndarray: ...


def check_training(X, y, n_classes=None):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ParameterError(f"features must be 2-D, got shape {X.shape}")
    if X.shape[0] == 0:
        raise DataError("cannot fit on zero training rows")
    if y.shape != (X.shape[0],):
        raise ParameterError("labels must have one entry per training row")
    if not np.all(np.isfinite(X)):
        raise DataError("training features contain non-finite values")
    y = y.astype(np.int64)
    if y.min() < 0:
        raise ParameterError("labels must be non-negative class indices")
    top = int(y.max()) + 1
    if n_classes is None:
        n_classes = top
    elif n_classes < top:
        raise ParameterError(f"label {top - 1} out of range for {n_classes} classes")
    return X, y, int(n_classes)


def check_query(X, n_features):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ParameterError(f"expected {n_features} feature columns, got shape {X.shape}")
    return X


def as_arrays(features):
    """Accept a FeatureMatrix or a bare array; return (values, labels-or-None)."""
    if hasattr(features, "values") and hasattr(features, "column_names"):
        return features.values, features.labels
    return features, None
