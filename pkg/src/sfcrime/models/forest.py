"""Random forest: bagged CART trees with per-split column sampling."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from ..errors import DataError, ParameterError
from .base import as_arrays, check_query, check_training
from .tree import DecisionTree, default_features_per_split


def default_threads() -> int:
    return os.cpu_count() or 1


class RandomForest:
    """Mean of ``n_estimators`` tree probability rows.

    Tree ``i`` draws its bootstrap sample and its column-sampling stream from
    ``numpy.random.default_rng(seed ^ i)``, so a forest of ``n`` trees is the
    prefix of any larger forest with the same seed, and results do not depend
    on ``threads``.
    """

    def __init__(self, n_estimators: int = 100, max_depth: Optional[int] = None,
                 min_samples_leaf: int = 1, features_per_split: Optional[int] = None,
                 bootstrap: bool = True, seed: int = 0, alpha: float = 1.0,
                 threads: Optional[int] = None):
        if n_estimators < 1:
            raise ParameterError(f"n_estimators must be >= 1, got {n_estimators}")
        if seed < 0:
            raise ParameterError("seed must be non-negative")
        # Validates the shared tree parameters early.
        DecisionTree(max_depth, min_samples_leaf, features_per_split, alpha=alpha)
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.features_per_split = features_per_split
        self.bootstrap = bootstrap
        self.seed = seed
        self.alpha = alpha
        self.threads = threads

    def _fit_one(self, i, X, y):
        rng = np.random.default_rng(self.seed ^ i)
        n = X.shape[0]
        idx = rng.integers(0, n, size=n, dtype=np.int64) if self.bootstrap else None
        state = int(rng.integers(0, 2**63, dtype=np.int64))
        tree = DecisionTree(self.max_depth, self.min_samples_leaf, self._k, seed=self.seed ^ i,
                            alpha=self.alpha)
        return tree.fit(X, y, self.n_classes, sample_indices=idx, rng_state=state)

    def fit(self, X, y=None, n_classes=None):
        X, labels = as_arrays(X)
        y = labels if y is None else y
        if y is None:
            raise DataError("random forest needs labels to fit")
        X, y, self.n_classes = check_training(X, y, n_classes)
        self.n_features = X.shape[1]
        self._k = (default_features_per_split(self.n_features) if self.features_per_split is None
                   else min(self.features_per_split, self.n_features))
        threads = self.threads or default_threads()
        if threads == 1 or self.n_estimators == 1:
            self.trees = [self._fit_one(i, X, y) for i in range(self.n_estimators)]
        else:
            with ThreadPoolExecutor(threads) as pool:
                self.trees = list(pool.map(lambda i: self._fit_one(i, X, y), range(self.n_estimators)))
        return self

    def predict_proba(self, X, n_trees: Optional[int] = None) -> np.ndarray:
        """Average over the first ``n_trees`` trees (all by default)."""
        X = check_query(as_arrays(X)[0], self.n_features)
        trees = self.trees if n_trees is None else self.trees[:n_trees]
        total = np.zeros((X.shape[0], self.n_classes))
        for tree in trees:
            total += tree.predict_proba(X)
        return total / len(trees)

    def staged_predict_proba(self, X, stages):
        """Probabilities after each tree count in ``stages`` (ascending), in one pass."""
        X = check_query(as_arrays(X)[0], self.n_features)
        total = np.zeros((X.shape[0], self.n_classes))
        out, done = [], 0
        for stop in stages:
            if not done <= stop <= len(self.trees):
                raise ParameterError(f"stage {stop} out of range")
            for tree in self.trees[done:stop]:
                total += tree.predict_proba(X)
            done = stop
            out.append(total / stop)
        return out

    def to_dict(self) -> dict:
        return {"type": "random_forest", "n_estimators": self.n_estimators,
                "max_depth": self.max_depth, "min_samples_leaf": self.min_samples_leaf,
                "features_per_split": self.features_per_split, "bootstrap": self.bootstrap,
                "seed": self.seed, "alpha": self.alpha, "n_classes": self.n_classes,
                "n_features": self.n_features, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, doc: dict) -> "RandomForest":
        forest = cls(doc["n_estimators"], doc["max_depth"], doc["min_samples_leaf"],
                     doc["features_per_split"], doc["bootstrap"], doc["seed"], doc["alpha"])
        forest.n_classes = doc["n_classes"]
        forest.n_features = doc["n_features"]
        forest.trees = [DecisionTree.from_dict(t) for t in doc["trees"]]
        return forest


def forest_fit(features, n_estimators=100, max_depth=None, features_per_split=None,
               bootstrap=True, seed=0, min_samples_leaf=1, n_classes=None, threads=None):
    X, y = as_arrays(features)
    return RandomForest(n_estimators, max_depth, min_samples_leaf, features_per_split,
                        bootstrap, seed, threads=threads).fit(X, y, n_classes)


def forest_predict_proba(model: RandomForest, features) -> np.ndarray:
    return model.predict_proba(as_arrays(features)[0])
