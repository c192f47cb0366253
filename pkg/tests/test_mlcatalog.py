"""Native algorithm catalog: descriptors, fitting, failure modes."""

from __future__ import annotations

import numpy as np
import pytest

from evoflow.interaction import parse_workflow_key
from evoflow.mlcatalog import (
    AlgorithmFailure,
    catalog,
    fit_pipeline,
    predict_pipeline,
)

from conftest import make_dataset


def fit(key: str, ds, seed=0):
    return fit_pipeline(parse_workflow_key(key), ds, np.random.default_rng(seed))


# -- catalog -------------------------------------------------------------------

def test_catalog_size_and_split():
    entries = catalog()
    assert len(entries) == 20
    kinds = [e.kind for e in entries]
    assert kinds.count("preprocessor") == 10
    assert kinds.count("classifier") == 10


def test_catalog_kinds():
    by_id = {e.id: e for e in catalog()}
    assert by_id["fastICA"].kind == "preprocessor"
    assert by_id["kNN"].kind == "classifier"


def test_catalog_matches_grammar(grammar):
    """Descriptor signatures mirror the shipped grammar exactly."""
    blocks = grammar.algorithms()
    entries = {e.id: e for e in catalog()}
    assert set(entries) == set(blocks)
    for alg, block in blocks.items():
        sig = dict(entries[alg].hyperparams)
        assert set(sig) == {hp.name for hp in block.hyperparams}
        for hp in block.hyperparams:
            spec = sig[hp.name]
            if hp.kind == "range":
                want = "int" if hp.integer else "float"
                assert spec == (want, hp.lo, hp.hi) or spec == (
                    want,
                    int(hp.lo) if hp.integer else hp.lo,
                    int(hp.hi) if hp.integer else hp.hi,
                )
            else:
                assert spec[0] == "cat" and tuple(spec[1]) == hp.values


# -- classifiers ----------------------------------------------------------------

def test_every_classifier_learns_blobs(grammar, blobs2):
    """Each classifier must beat chance by a wide margin on separable blobs."""
    keys = {
        "kNN": "kNN(n_neighbors=3,weights=uniform)",
        "decisionTree": "decisionTree(criterion=gini,maxDepth=5)",
        "logisticRegression": "logisticRegression(C=1.0,penalty=l2)",
        "gaussianNB": "gaussianNB()",
        "multinomialNB": "multinomialNB(alpha=1.0,fit_prior=true)",
        "lda": "lda()",
        "lsvc": "lsvc(C=1.0,penalty=l2)",
        "passiveAggressiveClassifier": "passiveAggressiveClassifier(C=1.0,loss=hinge)",
        "extraTreeClassifier": "extraTreeClassifier(criterion=gini,maxDepth=5)",
        "mlpClassifier": "mlpClassifier(activation=relu,hidden_layer_size=20)",
    }
    assert set(keys) == set(grammar.classifier_ids())
    for alg, key in keys.items():
        fitted = fit(key, blobs2, seed=1)
        preds = predict_pipeline(fitted, blobs2.features)
        acc = float(np.mean(preds == blobs2.labels))
        assert acc >= 0.9, f"{alg}: {acc}"


def test_every_preprocessor_runs(grammar, blobs3):
    keys = {
        "standardScaler": "standardScaler()",
        "minMaxScaler": "minMaxScaler()",
        "varianceThreshold": "varianceThreshold(threshold=0.05)",
        "selectKBest": "selectKBest(k=2)",
        "pca": "pca(n_components=2)",
        "truncatedSVD": "truncatedSVD(n_components=2)",
        "fastICA": "fastICA(n_components=2)",
        "fagg": "fagg(linkage=ward,n_clusters=2)",
        "rus": "rus(sampling_strategy=majority)",
        "ros": "ros(sampling_strategy=minority)",
    }
    assert set(keys) == set(grammar.preprocessor_ids())
    for alg, key in keys.items():
        fitted = fit(key + "|gaussianNB()", blobs3, seed=2)
        preds = predict_pipeline(fitted, blobs3.features)
        assert preds.shape == blobs3.labels.shape
        acc = float(np.mean(preds == blobs3.labels))
        assert acc >= 0.5, f"{alg}: {acc}"


def test_bare_classifier_pipeline(blobs2):
    """Zero preprocessors: prediction comes straight from the classifier."""
    fitted = fit("gaussianNB()", blobs2)
    assert len(fitted) == 1 and fitted[0].is_classifier
    preds = predict_pipeline(fitted, blobs2.features)
    assert set(np.unique(preds)) <= {0, 1}


# -- samplers ----------------------------------------------------------------------

def test_rus_majority_counts():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(150, 3))
    y = np.array([0] * 100 + [1] * 50)
    ds = make_dataset(X, y)
    fitted = fit("rus(sampling_strategy=majority)|gaussianNB()", ds, seed=3)
    rx, ry = fitted[0].resampled
    # majority class downsampled to the minority count
    assert rx.shape[0] == 100
    counts = np.bincount(ry)
    assert counts.tolist() == [50, 50]


def test_ros_minority_counts():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(150, 3))
    y = np.array([0] * 100 + [1] * 50)
    ds = make_dataset(X, y)
    fitted = fit("ros(sampling_strategy=minority)|gaussianNB()", ds, seed=4)
    _, ry = fitted[0].resampled
    counts = np.bincount(ry)
    assert counts.tolist() == [100, 100]


def test_samplers_identity_at_predict(blobs2):
    fitted = fit("rus(sampling_strategy=all)|gaussianNB()", blobs2, seed=5)
    X = blobs2.features[:7]
    assert np.array_equal(fitted[0].transform(X), X)


# -- memorization oracle ---------------------------------------------------------

def test_pca_knn1_reproduces_training_labels():
    # all points distinct: 1-NN on its own training data returns own label
    rng = np.random.default_rng(7)
    X = rng.normal(size=(60, 5))
    y = rng.integers(0, 3, size=60)
    ds = make_dataset(X, y)
    fitted = fit("pca(n_components=4)|kNN(n_neighbors=1,weights=uniform)", ds, seed=6)
    preds = predict_pipeline(fitted, X)
    assert np.array_equal(preds, y)


# -- failures ----------------------------------------------------------------------

def test_multinomial_nb_rejects_negatives():
    X = np.array([[1.0, -0.5], [2.0, 3.0], [0.5, 1.0], [1.5, 2.0]])
    y = np.array([0, 1, 0, 1])
    ds = make_dataset(X, y)
    with pytest.raises(AlgorithmFailure) as info:
        fit("multinomialNB(alpha=1.0,fit_prior=true)", ds)
    assert info.value.step == "multinomialNB"


def test_lda_singular_scatter_fails():
    # one informative column repeated: within-class scatter is singular
    col = np.array([1.0, 1.0, 2.0, 2.0, 3.0, 3.0])
    X = np.column_stack([col, col, col])
    y = np.array([0, 0, 0, 1, 1, 1])
    ds = make_dataset(X, y)
    with pytest.raises(AlgorithmFailure) as info:
        fit("lda()", ds)
    assert info.value.step == "lda"


def test_unknown_algorithm_fails(blobs2):
    with pytest.raises(AlgorithmFailure):
        fit("quantumSVM()", blobs2)


def test_selectkbest_caps_k(blobs3):
    # k above the feature count keeps all features rather than failing
    fitted = fit("selectKBest(k=20)|gaussianNB()", blobs3)
    assert fitted[0].transform(blobs3.features).shape[1] == blobs3.n_features


# -- determinism -----------------------------------------------------------------

def test_fit_determinism(blobs3):
    key = "fastICA(n_components=3)|mlpClassifier(activation=tanh,hidden_layer_size=12)"
    a = predict_pipeline(fit(key, blobs3, seed=11), blobs3.features)
    b = predict_pipeline(fit(key, blobs3, seed=11), blobs3.features)
    assert np.array_equal(a, b)


def test_upstream_insertion_does_not_reshuffle(blobs3):
    """Per-step child generators: a new upstream step leaves downstream rngs alone."""
    rng1 = np.random.default_rng(8)
    rng2 = np.random.default_rng(8)
    plain = fit_pipeline(
        parse_workflow_key("extraTreeClassifier(criterion=gini,maxDepth=4)"),
        blobs3,
        rng1,
    )
    chained = fit_pipeline(
        parse_workflow_key(
            "standardScaler()|extraTreeClassifier(criterion=gini,maxDepth=4)"
        ),
        blobs3,
        rng2,
    )
    assert plain[-1].algorithm == chained[-1].algorithm == "extraTreeClassifier"
