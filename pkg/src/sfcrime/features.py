"""Feature engineering: categorical encodings and the numeric feature matrix.

Base columns, one per feature, in this order::

    hour, month, district, day_of_week, longitude, latitude, street_no, block

PCA scores (``pca_1`` .. ``pca_k``) are appended after ``block`` when a fitted
PCA model is supplied.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .address import extract_block_flag, extract_street_number
from .errors import EncodingError, SchemaError
from .ingest import WEEKDAYS, RawIncident

__all__ = [
    "BASE_COLUMNS", "EncodingMaps", "FeatureMatrix", "append_pca", "build_feature_matrix",
    "extract_block_flag", "extract_street_number", "fit_encodings",
    "read_feature_csv", "write_feature_csv",
]

BASE_COLUMNS = ("hour", "month", "district", "day_of_week",
                "longitude", "latitude", "street_no", "block")


def _index(names) -> dict[str, int]:
    return {name: i for i, name in enumerate(sorted(set(names)))}


@dataclass(frozen=True)
class EncodingMaps:
    district_index: Mapping[str, int]
    weekday_index: Mapping[str, int]
    category_index: Mapping[str, int]

    @property
    def categories(self) -> list[str]:
        """Category names in column order (alphabetical)."""
        return sorted(self.category_index, key=self.category_index.__getitem__)

    def encode(self, mapping_name: str, value: str) -> int:
        mapping = getattr(self, mapping_name)
        try:
            return mapping[value]
        except KeyError:
            field = mapping_name.replace("_index", "")
            raise EncodingError(f"unseen {field} value {value!r}") from None

    def to_dict(self) -> dict:
        return {"districts": sorted(self.district_index),
                "categories": self.categories}

    @classmethod
    def from_dict(cls, doc: dict) -> "EncodingMaps":
        return cls(_index(doc["districts"]), _index(WEEKDAYS), _index(doc["categories"]))


def fit_encodings(rows: Sequence[RawIncident]) -> EncodingMaps:
    """Alphabetical integer codes for districts, weekdays and categories.

    Weekdays always get all seven canonical names so test data on a day absent
    from training still encodes.
    """
    districts = {r.district for r in rows}
    categories = {r.category for r in rows if r.category is not None}
    return EncodingMaps(_index(districts), _index(WEEKDAYS), _index(categories))


@dataclass
class FeatureMatrix:
    values: np.ndarray
    column_names: tuple
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.column_names):
            raise ValueError(f"values shape {self.values.shape} does not match "
                             f"{len(self.column_names)} column names")
        self.column_names = tuple(self.column_names)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.values.shape[0],):
                raise ValueError("labels must have one entry per row")

    def __len__(self):
        return self.values.shape[0]

    def take(self, idx) -> "FeatureMatrix":
        labels = None if self.labels is None else self.labels[idx]
        return FeatureMatrix(self.values[idx], self.column_names, labels)

    def base(self) -> np.ndarray:
        """The eight base columns (drops any appended PCA scores)."""
        return self.values[:, :len(BASE_COLUMNS)]


def build_feature_matrix(rows: Sequence[RawIncident], maps: EncodingMaps,
                         pca=None) -> FeatureMatrix:
    n = len(rows)
    values = np.empty((n, len(BASE_COLUMNS)), dtype=np.float64)
    labelled = n > 0 and all(r.category is not None for r in rows)
    labels = np.empty(n, dtype=np.int64) if labelled else None
    for i, r in enumerate(rows):
        ts = r.timestamp
        values[i] = (ts.hour, ts.month,
                     maps.encode("district_index", r.district),
                     maps.encode("weekday_index", r.day_of_week),
                     r.longitude, r.latitude,
                     extract_street_number(r.address), extract_block_flag(r.address))
        if labels is not None:
            labels[i] = maps.encode("category_index", r.category)
    fm = FeatureMatrix(values, BASE_COLUMNS, labels)
    return append_pca(fm, pca) if pca is not None else fm


def append_pca(fm: FeatureMatrix, pca) -> FeatureMatrix:
    """Return ``fm`` with ``pca_1..pca_k`` scores of its base columns appended."""
    base = fm.base()
    scores = pca.transform(base)
    names = BASE_COLUMNS + tuple(f"pca_{j + 1}" for j in range(scores.shape[1]))
    return FeatureMatrix(np.hstack([base, scores]), names, fm.labels)


def write_feature_csv(fm: FeatureMatrix, path, label_names: Optional[Sequence[str]] = None) -> None:
    """CSV export: header is the column names, plus a trailing ``label`` column
    when the matrix carries labels."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = list(fm.column_names)
        if fm.labels is not None:
            header.append("label")
        w.writerow(header)
        for i, row in enumerate(fm.values):
            out = [repr(float(v)) for v in row]
            if fm.labels is not None:
                lab = int(fm.labels[i])
                out.append(label_names[lab] if label_names is not None else lab)
            w.writerow(out)


def read_feature_csv(path, label_index: Optional[Mapping[str, int]] = None) -> FeatureMatrix:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty feature file") from None
        has_label = bool(header) and header[-1] == "label"
        names = header[:-1] if has_label else header
        values, labels = [], []
        for rec in reader:
            if has_label:
                lab = rec[-1]
                labels.append(label_index[lab] if label_index is not None else int(lab))
                rec = rec[:-1]
            values.append([float(v) for v in rec])
    arr = np.array(values, dtype=np.float64).reshape(len(values), len(names))
    return FeatureMatrix(arr, names, np.array(labels, dtype=np.int64) if has_label else None)
