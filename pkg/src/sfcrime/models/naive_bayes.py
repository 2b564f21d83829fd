"""Gaussian naive Bayes."""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .base import as_arrays, check_query, check_training

VAR_FLOOR = 1e-9


class GaussianNaiveBayes:
    """Per-class independent Gaussians with ML (ddof=0) variances.

    Variances are floored at ``1e-9 * global column variance`` (``1e-9`` for a
    globally constant column). Classes absent from training get prior 0.
    """

    def fit(self, X, y=None, n_classes=None):
        X, labels = as_arrays(X)
        y = labels if y is None else y
        if y is None:
            raise DataError("naive Bayes needs labels to fit")
        X, y, self.n_classes = check_training(X, y, n_classes)
        n, d = X.shape
        self.n_features = d
        counts = np.bincount(y, minlength=self.n_classes)
        self.priors = counts / n
        self.means = np.zeros((self.n_classes, d))
        self.variances = np.ones((self.n_classes, d))
        global_var = X.var(axis=0)
        floor = VAR_FLOOR * np.where(global_var > 0, global_var, 1.0)
        for c in np.flatnonzero(counts):
            rows = X[y == c]
            self.means[c] = rows.mean(axis=0)
            self.variances[c] = np.maximum(rows.var(axis=0), floor)
        return self

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = check_query(as_arrays(X)[0], self.n_features)
        with np.errstate(divide="ignore"):
            log_prior = np.log(self.priors)
        out = np.empty((X.shape[0], self.n_classes))
        for c in range(self.n_classes):
            var = self.variances[c]
            out[:, c] = (log_prior[c]
                         - 0.5 * np.sum(np.log(2.0 * np.pi * var))
                         - 0.5 * np.sum((X - self.means[c]) ** 2 / var, axis=1))
        return out

    def predict_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        jll -= jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {"type": "gaussian_nb", "n_classes": self.n_classes, "n_features": self.n_features,
                "priors": self.priors.tolist(), "means": self.means.tolist(),
                "variances": self.variances.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "GaussianNaiveBayes":
        model = cls()
        model.n_classes = doc["n_classes"]
        model.n_features = doc["n_features"]
        model.priors = np.array(doc["priors"], dtype=np.float64)
        model.means = np.array(doc["means"], dtype=np.float64).reshape(model.n_classes, -1)
        model.variances = np.array(doc["variances"], dtype=np.float64).reshape(model.n_classes, -1)
        return model


def nb_fit(features, n_classes=None) -> GaussianNaiveBayes:
    X, y = as_arrays(features)
    return GaussianNaiveBayes().fit(X, y, n_classes)


def nb_predict_proba(model: GaussianNaiveBayes, features) -> np.ndarray:
    return model.predict_proba(as_arrays(features)[0])
