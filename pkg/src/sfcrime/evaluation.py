"""Log-loss metric, train/validation split, hyperparameter sweeps, submissions."""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DataError, NumericError, ParameterError, SfCrimeError
from .features import FeatureMatrix

EPS = 1e-15


def multiclass_log_loss(probabilities, true_labels, eps: float = EPS) -> float:
    """Mean negative log probability of the true class.

    Probabilities are clipped to ``[eps, 1 - eps]`` and each row renormalised
    before taking logs, as in the Kaggle leaderboard metric.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(true_labels)
    if p.ndim != 2:
        raise ParameterError(f"probabilities must be 2-D, got shape {p.shape}")
    n, m = p.shape
    if y.shape != (n,):
        raise ParameterError(f"{y.shape[0] if y.ndim else 0} labels for {n} probability rows")
    if n == 0:
        raise ParameterError("log-loss of an empty prediction set is undefined")
    if not np.issubdtype(y.dtype, np.integer):
        raise ParameterError("labels must be integer class indices")
    if y.min() < 0 or y.max() >= m:
        raise ParameterError(f"label out of range [0, {m})")
    if not np.all(np.isfinite(p)):
        raise NumericError("probabilities contain non-finite values")
    clipped = np.clip(p, eps, 1.0 - eps)
    clipped /= clipped.sum(axis=1, keepdims=True)
    return float(-np.mean(np.log(clipped[np.arange(n), y])))


@dataclass(frozen=True)
class SplitSpec:
    validation_fraction: float = 0.3
    seed: int = 42
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ParameterError(f"validation_fraction must be in (0, 1), got {self.validation_fraction}")
        if self.seed < 0:
            raise ParameterError("seed must be non-negative")


def _apportion(sizes: np.ndarray, fraction: float) -> np.ndarray:
    """Per-class validation counts: floor(n_c * f) plus one for the classes
    with the largest remainders (lowest class first on ties) so the total is
    round(N * f)."""
    exact = sizes * fraction
    base = np.floor(exact).astype(np.int64)
    target = int(math.floor(sizes.sum() * fraction + 0.5))
    extra = target - int(base.sum())
    if extra > 0:
        remainder = exact - base
        order = sorted(range(len(sizes)), key=lambda c: (-remainder[c], c))
        for c in order[:extra]:
            base[c] += 1
    return base


def split_indices(labels, spec: SplitSpec = SplitSpec()):
    """Disjoint, sorted ``(train_idx, validation_idx)`` covering ``range(n)``."""
    y = np.asarray(labels, dtype=np.int64)
    n = y.shape[0]
    rng = np.random.default_rng(spec.seed)
    n_val = int(math.floor(n * spec.validation_fraction + 0.5))
    if n_val == 0 or n_val == n:
        raise ParameterError(f"fraction {spec.validation_fraction} leaves an empty subset for {n} rows")
    if not spec.stratified:
        perm = rng.permutation(n)
        val = np.sort(perm[:n_val])
    else:
        classes, sizes = np.unique(y, return_counts=True)
        if np.any(sizes < 2):
            bad = classes[sizes < 2].tolist()
            raise DataError(f"stratified split needs >= 2 rows per class; too few for class(es) {bad}")
        take = _apportion(sizes, spec.validation_fraction)
        val_parts = []
        for c, k in zip(classes, take):
            members = np.flatnonzero(y == c)
            val_parts.append(members[rng.permutation(members.shape[0])[:k]])
        val = np.sort(np.concatenate(val_parts))
    mask = np.zeros(n, dtype=bool)
    mask[val] = True
    return np.flatnonzero(~mask), val


def split(features: FeatureMatrix, spec: SplitSpec = SplitSpec()):
    if features.labels is None:
        raise DataError("split needs a labelled feature matrix")
    train_idx, val_idx = split_indices(features.labels, spec)
    return features.take(train_idx), features.take(val_idx)


@dataclass
class SweepRow:
    model: str
    params: dict
    log_loss: float
    seconds: float


@dataclass
class SweepReport:
    rows: list = field(default_factory=list)
    # Reference rows that cannot be recomputed here (e.g. external systems).
    references: list = field(default_factory=list)

    def param_names(self) -> list:
        names = []
        for row in self.rows:
            for key in row.params:
                if key not in names:
                    names.append(key)
        return names

    def to_csv(self, timing: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = self.param_names()
        w.writerow(["model", *names, "log_loss"] + (["seconds"] if timing else []))
        for row in self.rows:
            rec = [row.model, *(_fmt(row.params.get(k, "")) for k in names), repr(row.log_loss)]
            if timing:
                rec.append(f"{row.seconds:.3f}")
            w.writerow(rec)
        return buf.getvalue()

    def render(self, timing: bool = False) -> str:
        names = self.param_names()
        header = ["model", *names, "log-loss (validation)"] + (["seconds"] if timing else [])
        body = []
        for row in self.rows:
            rec = [row.model, *(_fmt(row.params.get(k, "")) for k in names), f"{row.log_loss:.9f}"]
            if timing:
                rec.append(f"{row.seconds:.2f}")
            body.append(rec)
        widths = [max(len(str(r[i])) for r in [header, *body]) for i in range(len(header))]
        lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths)).rstrip(),
                 "  ".join("-" * w for w in widths)]
        lines += ["  ".join(str(c).rjust(w) if i else str(c).ljust(w)
                            for i, (c, w) in enumerate(zip(r, widths))).rstrip() for r in body]
        for ref in self.references:
            lines.append(f"reference: {ref}")
        return "\n".join(lines) + "\n"


def _fmt(v):
    return "" if v is None else str(v)


def expand_grid(grid: Mapping[str, Sequence]) -> list:
    """Cartesian product of a ``{name: values}`` grid, first key varying slowest."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ParameterError("hyperparameter grid is empty")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def run_sweep(features: FeatureMatrix, family: str, grid, spec: SplitSpec = SplitSpec(),
              base_params: Optional[Mapping] = None, n_classes: Optional[int] = None,
              split_data=None) -> SweepReport:
    """Fit and score one model per grid point on a single shared split.

    ``grid`` is either a ``{name: values}`` mapping or a list of parameter
    dicts. ``split_data`` may supply a precomputed ``(train, validation)``
    pair (e.g. with PCA fitted on the training part only).
    """
    from .models import make_model

    points = expand_grid(grid) if isinstance(grid, Mapping) else [dict(p) for p in grid]
    if not points:
        raise ParameterError("hyperparameter grid is empty")
    train, val = split_data if split_data is not None else split(features, spec)
    if n_classes is None:
        n_classes = int(max(train.labels.max(), val.labels.max())) + 1
    report = SweepReport()
    for point in points:
        params = {**(base_params or {}), **point}
        try:
            t0 = time.perf_counter()
            model = make_model(family, **params).fit(train.values, train.labels, n_classes)
            proba = model.predict_proba(val.values)
            seconds = time.perf_counter() - t0
            loss = multiclass_log_loss(proba, val.labels)
        except SfCrimeError as exc:
            raise type(exc)(f"grid point {point}: {exc}") from exc
        shown = {k: v for k, v in params.items() if k != "threads"}
        report.rows.append(SweepRow(family, shown, loss, seconds))
    return report


def format_probability(p: float) -> str:
    # Shortest repr that round-trips to the same double.
    return repr(float(p))


def write_submission(ids, probabilities, category_names, path, n_categories: int = 39) -> None:
    """Kaggle submission CSV: ``Id`` then one probability column per category."""
    p = np.asarray(probabilities, dtype=np.float64)
    names = list(category_names)
    if names != sorted(names):
        raise ParameterError("category names must be in alphabetical order")
    if len(set(names)) != len(names):
        raise ParameterError("duplicate category names")
    if len(names) != n_categories:
        raise ParameterError(f"expected {n_categories} categories, got {len(names)}")
    if p.ndim != 2 or p.shape[1] != n_categories:
        raise ParameterError(f"probabilities must have {n_categories} columns, got shape {p.shape}")
    ids = [int(i) for i in ids]
    if len(ids) != p.shape[0]:
        raise ParameterError(f"{len(ids)} ids for {p.shape[0]} probability rows")
    if len(set(ids)) != len(ids):
        raise DataError("submission ids must be unique")
    if not np.all(np.isfinite(p)):
        raise NumericError("non-finite probability in submission")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Id", *names])
        for ident, row in zip(ids, p):
            w.writerow([ident, *(format_probability(v) for v in row)])
