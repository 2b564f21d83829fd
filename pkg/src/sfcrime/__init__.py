"""San Francisco crime classification: ingestion, features, PCA, classifiers, evaluation."""

from .evaluation import SplitSpec, multiclass_log_loss, run_sweep, split, write_submission
from .features import EncodingMaps, FeatureMatrix, build_feature_matrix, fit_encodings
from .ingest import DatasetSummary, RawIncident, load_test, load_train, parse_timestamp, summarize
from .pca import PcaModel, pca_fit, pca_transform

__version__ = "0.1.0"

__all__ = [
    "DatasetSummary", "EncodingMaps", "FeatureMatrix", "PcaModel", "RawIncident", "SplitSpec",
    "build_feature_matrix", "fit_encodings", "load_test", "load_train", "multiclass_log_loss",
    "parse_timestamp", "pca_fit", "pca_transform", "run_sweep", "split", "summarize",
    "write_submission",
]
