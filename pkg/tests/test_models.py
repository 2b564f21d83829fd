import math

import numpy as np
import pytest

from sfcrime.errors import DataError, ParameterError
from sfcrime.evaluation import multiclass_log_loss
from sfcrime.features import FeatureMatrix
from sfcrime.models import (DecisionTree, GaussianNaiveBayes, KNearestNeighbors, RandomForest,
                            forest_fit, forest_predict_proba, gini_decrease, knn_fit,
                            knn_predict_proba, make_model, model_from_dict, nb_fit,
                            nb_predict_proba, tree_fit, tree_predict_proba)

from .oracles import knn_scan

XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_Y = np.array([0, 1, 1, 0])


def blobs(rng, n=300, d=4, classes=3, spread=1.5):
    centers = rng.normal(0, 3, size=(classes, d))
    y = rng.integers(0, classes, n)
    return centers[y] + rng.normal(0, spread, size=(n, d)), y


# ------------------------------------------------------------ naive Bayes

def test_nb_symmetric():
    X = np.array([[-1.0], [-1.0], [1.0], [1.0]])
    model = GaussianNaiveBayes().fit(X, np.array([0, 0, 1, 1]))
    np.testing.assert_allclose(model.predict_proba([[0.0]]), [[0.5, 0.5]], atol=1e-12)


def test_nb_equal_likelihoods_give_priors():
    X = np.array([[-1.0], [1.0], [-1.0], [1.0], [-1.0], [1.0]])
    y = np.array([0, 0, 1, 1, 1, 1])
    model = nb_fit(FeatureMatrix(X, ("x",), y))
    np.testing.assert_allclose(nb_predict_proba(model, np.array([[0.3], [-7.0]])),
                               [[1 / 3, 2 / 3]] * 2, atol=1e-12)


def test_nb_hand_computed():
    # Class A: mean 0, var 1; class B: mean 2, var 1 (ML variance of {-1,1} and {1,3}).
    X = np.array([[-1.0], [1.0], [1.0], [3.0]])
    model = GaussianNaiveBayes().fit(X, np.array([0, 0, 1, 1]))
    p = model.predict_proba([[1.0], [0.0]])
    assert abs(p[0, 0] - 0.5) <= 1e-12
    expected = math.exp(2) / (math.exp(2) + 1)
    assert abs(p[1, 0] - expected) <= 1e-12
    assert abs(p[1, 0] - 0.8807970779778823) <= 1e-12


def test_nb_variance_floor():
    X = np.array([[1.0, 0.0], [1.0, 1.0], [2.0, 5.0], [3.0, 6.0]])
    model = GaussianNaiveBayes().fit(X, np.array([0, 0, 1, 1]))
    assert model.variances[0, 0] == pytest.approx(1e-9 * X[:, 0].var())
    p = model.predict_proba(X)
    assert np.all(np.isfinite(p))


def test_nb_absent_class_gets_zero():
    model = GaussianNaiveBayes().fit(np.array([[0.0], [1.0]]), np.array([0, 2]), n_classes=4)
    p = model.predict_proba([[0.5]])
    assert p.shape == (1, 4) and p[0, 1] == 0 and p[0, 3] == 0


def test_nb_no_rows():
    with pytest.raises(DataError):
        GaussianNaiveBayes().fit(np.empty((0, 2)), np.empty(0, dtype=int))


# ------------------------------------------------------------ kNN

def test_knn_k1_exact_row():
    X, y = blobs(np.random.default_rng(0), n=40)
    model = KNearestNeighbors(1).fit(X, y)
    p = model.predict_proba(X[7:8])
    assert p[0, y[7]] == 1.0 and p.sum() == 1.0


def test_knn_three_neighbours():
    X = np.array([[0.0], [1.0], [2.0], [10.0]])
    model = knn_fit(FeatureMatrix(X, ("x",), np.array([0, 0, 1, 1])), 3)
    np.testing.assert_array_equal(knn_predict_proba(model, np.array([[0.5]])), [[2 / 3, 1 / 3]])


def test_knn_tie_prefers_lower_index():
    X = np.array([[1.0], [-1.0], [1.0], [-1.0]])
    model = KNearestNeighbors(1).fit(X, np.array([0, 1, 2, 3]))
    np.testing.assert_array_equal(model.predict_proba([[0.0]]), [[1.0, 0.0, 0.0, 0.0]])
    model = KNearestNeighbors(3).fit(X, np.array([0, 1, 2, 3]))
    np.testing.assert_array_equal(model.predict_proba([[0.0]]), [[1 / 3, 1 / 3, 1 / 3, 0.0]])


@pytest.mark.parametrize("seed", range(3))
def test_knn_matches_scan_oracle(seed):
    rng = np.random.default_rng(seed)
    X, y = blobs(rng, n=200, classes=5)
    Q = rng.normal(0, 3, size=(30, X.shape[1]))
    model = KNearestNeighbors(25).fit(X, y, 5)
    got = model.predict_proba(Q)
    for q, row in zip(Q, got):
        assert row.tolist() == knn_scan(X, y, q, 25, 5)


def test_knn_threads_and_chunks_identical(monkeypatch):
    from sfcrime.models import knn as knn_module
    rng = np.random.default_rng(1)
    X, y = blobs(rng, n=300)
    Q = rng.normal(size=(50, X.shape[1]))
    ref = KNearestNeighbors(7).fit(X, y).predict_proba(Q)
    monkeypatch.setattr(knn_module, "_BLOCK_CELLS", 900)  # 3 queries per chunk
    np.testing.assert_array_equal(KNearestNeighbors(7, threads=4).fit(X, y).predict_proba(Q), ref)


def test_knn_invalid_k():
    with pytest.raises(ParameterError):
        KNearestNeighbors(0)
    with pytest.raises(ParameterError):
        KNearestNeighbors(5).fit(np.zeros((3, 1)), np.array([0, 1, 0]))


def test_knn_uniform_scaling_invariant():
    rng = np.random.default_rng(2)
    X, y = blobs(rng, n=150)
    Q = rng.normal(size=(40, X.shape[1]))
    a = KNearestNeighbors(9).fit(X, y).predict_proba(Q)
    b = KNearestNeighbors(9).fit(X * 4.0, y).predict_proba(Q * 4.0)
    np.testing.assert_array_equal(a, b)


# ------------------------------------------------------------ decision tree

def test_gini_decrease_hand():
    assert gini_decrease([4, 4], [4, 0], [0, 4]) == pytest.approx(0.5, abs=1e-15)
    assert gini_decrease([2, 2], [1, 1], [1, 1]) == pytest.approx(0.0, abs=1e-15)


def test_pure_root():
    X = np.random.default_rng(0).normal(size=(10, 3))
    tree = DecisionTree(max_depth=5, alpha=0).fit(X, np.full(10, 2))
    assert tree.n_nodes == 1
    np.testing.assert_array_equal(tree.predict_proba(X[:2]), [[0.0, 0.0, 1.0]] * 2)
    smoothed = DecisionTree(max_depth=5).fit(X, np.full(10, 2)).predict_proba(X[:1])
    np.testing.assert_allclose(smoothed, [[1 / 13, 1 / 13, 11 / 13]])


def _enumerate_depth2_losses(X, y):
    """Training log-loss (raw leaf frequencies) of every axis-aligned tree of depth <= 2."""
    def cuts(idx):
        out = []
        for f in range(X.shape[1]):
            vals = np.unique(X[idx, f])
            out += [(f, (a + b) / 2) for a, b in zip(vals[:-1], vals[1:])]
        return out

    def leaf_loss(idx):
        counts = np.bincount(y[idx], minlength=2)
        p = counts / counts.sum()
        return [p[y[i]] for i in idx]

    everything = np.arange(len(y))
    losses = []
    for f, t in cuts(everything):
        left, right = everything[X[:, f] <= t], everything[X[:, f] > t]
        for lsplit in [None] + cuts(left):
            for rsplit in [None] + cuts(right):
                probs = []
                for part, sp in ((left, lsplit), (right, rsplit)):
                    if sp is None:
                        probs += leaf_loss(part)
                    else:
                        g, u = sp
                        probs += leaf_loss(part[X[part, g] <= u]) + leaf_loss(part[X[part, g] > u])
                probs = np.clip(probs, 1e-15, 1)
                losses.append(-np.mean(np.log(probs)))
    return losses


def test_xor_depth2_exact():
    losses = _enumerate_depth2_losses(XOR_X, XOR_Y)
    assert min(losses) < 1e-9  # a perfect depth-2 tree exists
    tree = DecisionTree(max_depth=2, alpha=0.0).fit(FeatureMatrix(XOR_X, ("a", "b"), XOR_Y))
    assert multiclass_log_loss(tree_predict_proba(tree, XOR_X), XOR_Y) < 1e-9
    assert tree.depth == 2


def test_laplace_leaf():
    # One feature separates a (3 A, 1 B) leaf from a pure B leaf.
    X = np.array([[0.0], [0.0], [0.0], [0.0], [5.0], [5.0]])
    y = np.array([0, 0, 0, 1, 1, 1])
    tree = DecisionTree(max_depth=1).fit(X, y)
    np.testing.assert_allclose(tree.predict_proba([[0.0]]), [[4 / 6, 2 / 6]], rtol=0, atol=1e-15)


def test_memorization():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(120, 3))
    y = rng.integers(0, 4, 120)
    tree = DecisionTree().fit(X, y)
    p = tree.predict_proba(X)
    assert np.all(p.argmax(axis=1) == y)
    assert np.all(tree.counts[tree.is_leaf()].sum(axis=1) >= 1)


def test_depth_and_leaf_limits():
    rng = np.random.default_rng(4)
    X, y = blobs(rng, n=500, classes=4, spread=3)
    for depth, leaf in [(1, 1), (3, 10), (6, 25)]:
        tree = DecisionTree(max_depth=depth, min_samples_leaf=leaf).fit(X, y)
        assert tree.depth <= depth
        assert tree.counts[tree.is_leaf()].sum(axis=1).min() >= leaf


def test_split_tie_break_lowest_column():
    # Columns 0 and 1 are identical, so every split ties.
    X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    tree = DecisionTree(max_depth=1).fit(X, np.array([0, 0, 1, 1]))
    assert tree.feature[0] == 0 and tree.threshold[0] == 1.5


def test_tie_break_lowest_threshold():
    # Both cuts isolate one B row; equal Gini gain, lower threshold wins.
    X = np.array([[0.0], [1.0], [2.0]])
    tree = DecisionTree(max_depth=1).fit(X, np.array([1, 0, 1]))
    assert tree.threshold[0] == 0.5


def test_tree_permutation_invariant():
    rng = np.random.default_rng(5)
    X = rng.integers(0, 4, size=(200, 3)).astype(float)  # many value ties
    y = rng.integers(0, 3, 200)
    perm = rng.permutation(200)
    a = DecisionTree(max_depth=6).fit(X, y)
    b = DecisionTree(max_depth=6).fit(X[perm], y[perm])
    Q = rng.integers(0, 4, size=(50, 3)).astype(float)
    np.testing.assert_array_equal(a.predict_proba(Q), b.predict_proba(Q))
    np.testing.assert_array_equal(a.feature, b.feature)
    np.testing.assert_array_equal(a.threshold, b.threshold)


def test_monotone_rescaling_tree_and_forest():
    rng = np.random.default_rng(6)
    X, y = blobs(rng, n=300)
    Q = rng.normal(0, 3, size=(60, X.shape[1]))
    scale = np.array([1.0, 8.0, 0.25, 1.0])
    for make in (lambda: DecisionTree(max_depth=8),
                 lambda: RandomForest(5, max_depth=8, seed=3, threads=1)):
        a = make().fit(X, y).predict_proba(Q)
        b = make().fit(X * scale, y).predict_proba(Q * scale)
        np.testing.assert_array_equal(a, b)


def test_tree_errors():
    with pytest.raises(DataError):
        DecisionTree().fit(np.empty((0, 2)), np.empty(0, dtype=int))
    with pytest.raises(ParameterError):
        DecisionTree(max_depth=0)
    tree = DecisionTree(max_depth=2).fit(XOR_X, XOR_Y)
    with pytest.raises(ParameterError):
        tree.predict_proba(np.zeros((1, 3)))


# ------------------------------------------------------------ random forest

def test_forest_single_tree_reduction():
    rng = np.random.default_rng(7)
    X, y = blobs(rng, n=300, d=5, classes=4, spread=3)
    Q = rng.normal(0, 3, size=(100, 5))
    fm = FeatureMatrix(X, tuple("abcde"), y)
    forest = forest_fit(fm, n_estimators=1, max_depth=7, features_per_split=5, bootstrap=False, seed=9)
    tree = tree_fit(fm, max_depth=7)
    np.testing.assert_array_equal(forest_predict_proba(forest, Q), tree_predict_proba(tree, Q))


def test_forest_averages_trees():
    X = np.array([[0.0], [1.0]])
    t0 = DecisionTree(alpha=0).fit(X, np.array([0, 0]), n_classes=2)
    t1 = DecisionTree(alpha=0).fit(X, np.array([1, 1]), n_classes=2)
    forest = RandomForest(2)
    forest.trees, forest.n_classes, forest.n_features = [t0, t1], 2, 1
    np.testing.assert_array_equal(forest.predict_proba([[0.5]]), [[0.5, 0.5]])


def test_forest_determinism_and_threads():
    rng = np.random.default_rng(8)
    X, y = blobs(rng, n=400, classes=5, spread=3)
    Q = rng.normal(0, 3, size=(80, X.shape[1]))
    runs = [RandomForest(12, max_depth=9, seed=77, threads=t).fit(X, y).predict_proba(Q)
            for t in (1, 1, 4)]
    assert runs[0].tobytes() == runs[1].tobytes() == runs[2].tobytes()
    other = RandomForest(12, max_depth=9, seed=78, threads=1).fit(X, y).predict_proba(Q)
    assert not np.array_equal(runs[0], other)


def test_forest_prefix_equals_smaller_forest():
    rng = np.random.default_rng(9)
    X, y = blobs(rng, n=300, classes=4, spread=3)
    Q = rng.normal(0, 3, size=(50, X.shape[1]))
    big = RandomForest(20, max_depth=6, seed=5, threads=1).fit(X, y)
    staged = big.staged_predict_proba(Q, [5, 12, 20])
    for n, p in zip([5, 12, 20], staged):
        small = RandomForest(n, max_depth=6, seed=5, threads=1).fit(X, y)
        assert p.tobytes() == small.predict_proba(Q).tobytes()


def test_forest_bad_params():
    with pytest.raises(ParameterError):
        RandomForest(0)
    with pytest.raises(ParameterError):
        RandomForest(3, max_depth=0)


# ------------------------------------------------------------ shared contract

@pytest.mark.parametrize("family, params", [
    ("nb", {}), ("knn", {"k": 5}), ("tree", {"max_depth": 5}),
    ("forest", {"n_estimators": 4, "max_depth": 5, "seed": 1, "threads": 1}),
])
def test_contract_and_serialization(family, params, tmp_path):
    rng = np.random.default_rng(10)
    X, y = blobs(rng, n=200, classes=4)
    Q = rng.normal(0, 3, size=(30, X.shape[1]))
    model = make_model(family, **params).fit(X, y, 6)
    p = model.predict_proba(Q)
    assert p.shape == (30, 6)
    assert np.all(p >= 0) and np.all(np.abs(p.sum(axis=1) - 1) <= 1e-9)
    doc = model.to_dict("features.csv") if family == "knn" else model.to_dict()
    back = model_from_dict(doc, FeatureMatrix(X, tuple("abcd"), y) if family == "knn" else None)
    np.testing.assert_array_equal(back.predict_proba(Q), p)


def test_make_model_rejects_unknown():
    with pytest.raises(ParameterError):
        make_model("xgboost")
    with pytest.raises(ParameterError):
        make_model("nb", k=3)


def test_label_out_of_range():
    with pytest.raises(ParameterError):
        GaussianNaiveBayes().fit(np.zeros((2, 1)), np.array([0, 5]), n_classes=3)
