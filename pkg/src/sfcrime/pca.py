"""Principal component analysis on standardized columns.

The eigendecomposition of the (small, d x d) covariance matrix uses cyclic
Jacobi rotations, so the only numerics dependency is numpy array arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, NumericError, ParameterError


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi.

    Returns ``(w, v)`` with ``a @ v[:, i] == w[i] * v[:, i]``, unsorted.
    Iteration stops once the Frobenius norm of the off-diagonal part falls
    below ``tol * max(1, ||a||_F)``.
    """
    a = np.array(a, dtype=np.float64)
    d = a.shape[0]
    if a.shape != (d, d):
        raise ParameterError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("non-finite value in matrix")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ParameterError("matrix is not symmetric")
    a = (a + a.T) / 2
    v = np.eye(d)
    limit = tol * max(1.0, np.sqrt(np.sum(a * a)))
    for _ in range(max_sweeps):
        off = a - np.diag(np.diag(a))
        if np.sqrt(np.sum(off * off)) < limit:
            return np.diag(a).copy(), v
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise NumericError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    scale: np.ndarray
    components: np.ndarray  # k x d, rows are unit principal axes
    explained_variance: np.ndarray
    constant_columns: tuple = ()

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def dimension(self) -> int:
        return self.components.shape[1]

    def transform(self, x) -> np.ndarray:
        return pca_transform(self, x)

    def inverse_transform(self, scores) -> np.ndarray:
        return self.mean + (np.asarray(scores, dtype=np.float64) @ self.components) * self.scale

    def dumps(self) -> str:
        """Plain-text ``key value...`` document; floats are written with repr
        so a load reproduces the model bit for bit."""
        def floats(arr):
            return " ".join(repr(float(x)) for x in np.ravel(arr))
        lines = [
            f"dimension {self.dimension}",
            f"components_count {self.n_components}",
            f"mean {floats(self.mean)}",
            f"scale {floats(self.scale)}",
            f"components {floats(self.components)}",
            f"explained_variance {floats(self.explained_variance)}",
            "constant_columns " + " ".join(str(c) for c in self.constant_columns),
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PcaModel":
        doc = {}
        for line in text.splitlines():
            if line.strip():
                key, _, rest = line.strip().partition(" ")
                doc[key] = rest.split()
        try:
            d = int(doc["dimension"][0])
            k = int(doc["components_count"][0])
            arr = lambda key: np.array([float(x) for x in doc[key]], dtype=np.float64)  # noqa: E731
            model = cls(arr("mean"), arr("scale"), arr("components").reshape(k, d),
                        arr("explained_variance"),
                        tuple(int(c) for c in doc.get("constant_columns", [])))
        except (KeyError, IndexError, ValueError) as exc:
            raise DataError(f"malformed PCA model document: {exc}") from None
        if model.mean.shape != (d,) or model.scale.shape != (d,) or model.explained_variance.shape != (k,):
            raise DataError("PCA model document has inconsistent vector lengths")
        return model

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "PcaModel":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def _as_array(matrix) -> np.ndarray:
    if hasattr(matrix, "base") and hasattr(matrix, "column_names"):
        matrix = matrix.base()
    return np.asarray(matrix, dtype=np.float64)


def pca_fit(matrix, k: int) -> PcaModel:
    """Fit the top-``k`` principal axes of the standardized columns of ``matrix``.

    Columns are centred and divided by their sample standard deviation; a
    constant column keeps scale 1 and is listed in ``constant_columns``.
    Each axis is signed so that its largest-magnitude entry is positive.
    """
    x = _as_array(matrix)
    if x.ndim != 2:
        raise ParameterError("pca_fit expects a 2-D matrix")
    n, d = x.shape
    if not 1 <= k <= d:
        raise ParameterError(f"component count must be in [1, {d}], got {k}")
    if n < 2:
        raise ParameterError("pca_fit needs at least 2 rows")
    if not np.all(np.isfinite(x)):
        raise NumericError("pca_fit input contains non-finite values")

    mean = x.mean(axis=0)
    std = x.std(axis=0, ddof=1)
    constant = tuple(int(j) for j in np.flatnonzero(std == 0))
    scale = np.where(std == 0, 1.0, std)
    z = (x - mean) / scale
    cov = (z.T @ z) / (n - 1)

    w, v = jacobi_eigh(cov)
    order = sorted(range(d), key=lambda i: -w[i])  # stable for equal eigenvalues
    axes = v[:, order[:k]].T.copy()
    for row in axes:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    explained = np.maximum(w[order[:k]], 0.0)
    return PcaModel(mean, scale, axes, explained, constant)


def pca_transform(model: PcaModel, matrix) -> np.ndarray:
    x = _as_array(matrix)
    if x.ndim != 2 or x.shape[1] != model.dimension:
        raise ParameterError(f"expected {model.dimension} columns, got shape {x.shape}")
    return ((x - model.mean) / model.scale) @ model.components.T
