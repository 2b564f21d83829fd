"""Probabilistic classifiers sharing ``fit(X, y, n_classes)`` / ``predict_proba(X)``."""

from ..errors import ParameterError
from .base import ProbabilisticClassifier
from .forest import RandomForest, forest_fit, forest_predict_proba
from .knn import KNearestNeighbors, knn_fit, knn_predict_proba
from .naive_bayes import GaussianNaiveBayes, nb_fit, nb_predict_proba
from .tree import DecisionTree, gini, gini_decrease, tree_fit, tree_predict_proba

FAMILIES = {
    "nb": GaussianNaiveBayes,
    "knn": KNearestNeighbors,
    "tree": DecisionTree,
    "forest": RandomForest,
}

# Hyperparameters each family accepts, with their parsers.
PARAMS = {
    "nb": {},
    "knn": {"k": int, "threads": int},
    "tree": {"max_depth": int, "min_samples_leaf": int, "features_per_split": int,
             "seed": int, "alpha": float},
    "forest": {"n_estimators": int, "max_depth": int, "min_samples_leaf": int,
               "features_per_split": int, "bootstrap": bool, "seed": int, "alpha": float,
               "threads": int},
}


def make_model(family: str, **params):
    if family not in FAMILIES:
        raise ParameterError(f"unknown model family {family!r}; choose from {', '.join(FAMILIES)}")
    unknown = set(params) - set(PARAMS[family])
    if unknown:
        raise ParameterError(f"{family} does not take parameter(s) {', '.join(sorted(unknown))}")
    return FAMILIES[family](**params)


def model_from_dict(doc: dict, knn_features=None):
    kind = doc["type"]
    if kind == "gaussian_nb":
        return GaussianNaiveBayes.from_dict(doc)
    if kind == "decision_tree":
        return DecisionTree.from_dict(doc)
    if kind == "random_forest":
        return RandomForest.from_dict(doc)
    if kind == "knn":
        return KNearestNeighbors.from_dict(doc, knn_features)
    raise ParameterError(f"unknown model type {kind!r}")


__all__ = [
    "FAMILIES", "PARAMS", "DecisionTree", "GaussianNaiveBayes", "KNearestNeighbors",
    "ProbabilisticClassifier", "RandomForest", "forest_fit", "forest_predict_proba", "gini",
    "gini_decrease", "knn_fit", "knn_predict_proba", "make_model", "model_from_dict",
    "nb_fit", "nb_predict_proba", "tree_fit", "tree_predict_proba",
]
