"""CART decision tree with Gini splits and Laplace-smoothed leaf probabilities."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..errors import DataError, ParameterError
from . import _cart
from .base import as_arrays, check_query, check_training


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    return 0.0 if n == 0 else 1.0 - float(np.sum((counts / n) ** 2))


def gini_decrease(parent, left, right) -> float:
    """Impurity decrease of splitting ``parent`` class counts into ``left``/``right``."""
    n = float(np.sum(parent))
    n_l, n_r = float(np.sum(left)), float(np.sum(right))
    return gini(parent) - (n_l / n) * gini(left) - (n_r / n) * gini(right)


def _seed_state(seed: int) -> int:
    return int(np.random.default_rng(seed).integers(0, 2**63, dtype=np.int64))


class DecisionTree:
    """Greedy CART classifier.

    ``max_depth=None`` grows until leaves are pure or too small to split.
    ``features_per_split=None`` considers every column at every node.
    Leaf probabilities are ``(n_c + alpha) / (n + alpha * M)``.
    """

    def __init__(self, max_depth: Optional[int] = None, min_samples_leaf: int = 1,
                 features_per_split: Optional[int] = None, seed: int = 0, alpha: float = 1.0):
        if max_depth is not None and max_depth < 1:
            raise ParameterError(f"max_depth must be >= 1, got {max_depth}")
        if min_samples_leaf < 1:
            raise ParameterError(f"min_samples_leaf must be >= 1, got {min_samples_leaf}")
        if features_per_split is not None and features_per_split < 1:
            raise ParameterError(f"features_per_split must be >= 1, got {features_per_split}")
        if alpha < 0:
            raise ParameterError("alpha must be non-negative")
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.features_per_split = features_per_split
        self.seed = seed
        self.alpha = alpha

    def fit(self, X, y=None, n_classes=None, sample_indices=None, rng_state=None):
        X, labels = as_arrays(X)
        y = labels if y is None else y
        if y is None:
            raise DataError("decision tree needs labels to fit")
        X, y, self.n_classes = check_training(X, y, n_classes)
        self.n_features = X.shape[1]
        if rng_state is None:
            rng_state = _seed_state(self.seed)
        k = self.n_features if self.features_per_split is None else min(self.features_per_split, self.n_features)
        if sample_indices is None:
            Xs, ys = X, y
        else:
            idx = np.asarray(sample_indices, dtype=np.int64)
            Xs, ys = np.ascontiguousarray(X[idx]), y[idx]
        index_type = np.int32 if Xs.shape[0] < 2**31 else np.int64
        # Order among equal values does not affect the grown tree.
        order = np.argsort(np.ascontiguousarray(Xs.T), axis=1).astype(index_type)
        (self.feature, self.threshold, self.left, self.right,
         self.counts, self.node_depth) = _cart.build_tree(
            Xs, ys, order, self.n_classes,
            -1 if self.max_depth is None else self.max_depth,
            self.min_samples_leaf, k, np.uint64(rng_state))
        return self

    @property
    def depth(self) -> int:
        return int(self.node_depth.max())

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self):
        return self.feature == _cart.LEAF

    def apply(self, X) -> np.ndarray:
        X = check_query(as_arrays(X)[0], self.n_features)
        return _cart.apply_tree(X, self.feature, self.threshold, self.left, self.right)

    def leaf_proba(self) -> np.ndarray:
        c = self.counts.astype(np.float64)
        return (c + self.alpha) / (c.sum(axis=1, keepdims=True) + self.alpha * self.n_classes)

    def predict_proba(self, X) -> np.ndarray:
        return self.leaf_proba()[self.apply(X)]

    def to_dict(self) -> dict:
        """Node list; leaves store sparse ``[class, count]`` pairs."""
        nodes = []
        for i in range(self.n_nodes):
            if self.feature[i] == _cart.LEAF:
                nz = np.flatnonzero(self.counts[i])
                nodes.append({"counts": [[int(c), int(self.counts[i, c])] for c in nz]})
            else:
                nodes.append({"column": int(self.feature[i]), "threshold": float(self.threshold[i]),
                              "left": int(self.left[i]), "right": int(self.right[i])})
        return {"type": "decision_tree", "n_classes": self.n_classes, "n_features": self.n_features,
                "max_depth": self.max_depth, "min_samples_leaf": self.min_samples_leaf,
                "features_per_split": self.features_per_split, "seed": self.seed,
                "alpha": self.alpha, "nodes": nodes}

    @classmethod
    def from_dict(cls, doc: dict) -> "DecisionTree":
        tree = cls(doc["max_depth"], doc["min_samples_leaf"], doc["features_per_split"],
                   doc["seed"], doc["alpha"])
        tree.n_classes = doc["n_classes"]
        tree.n_features = doc["n_features"]
        n = len(doc["nodes"])
        tree.feature = np.full(n, _cart.LEAF, dtype=np.int64)
        tree.threshold = np.zeros(n)
        tree.left = np.full(n, _cart.LEAF, dtype=np.int64)
        tree.right = np.full(n, _cart.LEAF, dtype=np.int64)
        tree.counts = np.zeros((n, tree.n_classes), dtype=np.int64)
        tree.node_depth = np.zeros(n, dtype=np.int64)
        for i, node in enumerate(doc["nodes"]):
            if "counts" in node:
                for c, cnt in node["counts"]:
                    tree.counts[i, c] = cnt
            else:
                tree.feature[i] = node["column"]
                tree.threshold[i] = node["threshold"]
                tree.left[i] = node["left"]
                tree.right[i] = node["right"]
        for i in range(n):
            if tree.feature[i] != _cart.LEAF:
                tree.node_depth[tree.left[i]] = tree.node_depth[i] + 1
                tree.node_depth[tree.right[i]] = tree.node_depth[i] + 1
        return tree


def default_features_per_split(n_features: int) -> int:
    return max(1, math.ceil(math.sqrt(n_features)))


def tree_fit(features, max_depth=None, min_samples_leaf=1, feature_subset_rule=None, rng=0, n_classes=None):
    """Fit a :class:`DecisionTree` on a labelled FeatureMatrix.

    ``feature_subset_rule`` is ``None`` (all columns), an int, or ``"sqrt"``.
    """
    X, y = as_arrays(features)
    if feature_subset_rule == "sqrt":
        feature_subset_rule = default_features_per_split(np.shape(X)[1])
    return DecisionTree(max_depth, min_samples_leaf, feature_subset_rule, seed=rng).fit(X, y, n_classes)


def tree_predict_proba(model: DecisionTree, features) -> np.ndarray:
    return model.predict_proba(as_arrays(features)[0])
