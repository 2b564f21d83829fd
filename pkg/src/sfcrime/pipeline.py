"""Glue between ingestion, features, PCA and the split, shared by the CLI."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .evaluation import SplitSpec, split_indices
from .features import EncodingMaps, FeatureMatrix, append_pca, build_feature_matrix, fit_encodings
from .pca import PcaModel, pca_fit


@dataclass
class Prepared:
    maps: EncodingMaps
    pca: Optional[PcaModel]
    train: FeatureMatrix
    validation: Optional[FeatureMatrix] = None


def prepare_full(rows, pca_components: int) -> Prepared:
    """Encodings and PCA fitted on all rows; for training a final model."""
    maps = fit_encodings(rows)
    base = build_feature_matrix(rows, maps)
    pca = pca_fit(base.values, pca_components) if pca_components else None
    return Prepared(maps, pca, append_pca(base, pca) if pca else base)


def prepare_split(rows, pca_components: int, spec: SplitSpec) -> Prepared:
    """Split first; PCA sees only the training part."""
    maps = fit_encodings(rows)
    base = build_feature_matrix(rows, maps)
    train_idx, val_idx = split_indices(base.labels, spec)
    train, val = base.take(train_idx), base.take(val_idx)
    pca = None
    if pca_components:
        pca = pca_fit(train.values, pca_components)
        train, val = append_pca(train, pca), append_pca(val, pca)
    return Prepared(maps, pca, train, val)
