"""Native implementations of the 20 workflow algorithms.

Ten preprocessors and ten classifiers, all numpy, none wrapped from an
external ML library.  ``catalog()`` lists descriptors whose hyperparameter
signatures mirror the shipped grammar exactly; ``fit_pipeline`` /
``predict_pipeline`` execute a decoded workflow.
"""

from __future__ import annotations

import numpy as np

from .base import AlgorithmDescriptor, AlgorithmFailure, Dataset, FittedStep
from .classifiers import (
    DecisionTreeStep,
    ExtraTreeStep,
    GaussianNBStep,
    KNNStep,
    LDAStep,
    MultinomialNBStep,
)
from .decomposition import FastICAStep, PCAStep, TruncatedSVDStep
from .linear import (
    LinearSVCStep,
    LogisticRegressionStep,
    MLPStep,
    PassiveAggressiveStep,
)
from .preprocessing import (
    FeatureAgglomerationStep,
    MinMaxScalerStep,
    RandomOverSamplerStep,
    RandomUnderSamplerStep,
    SelectKBestStep,
    StandardScalerStep,
    VarianceThresholdStep,
)

__all__ = [
    "Dataset",
    "AlgorithmFailure",
    "AlgorithmDescriptor",
    "FittedStep",
    "catalog",
    "fit_pipeline",
    "predict_pipeline",
]

_PREPROCESSORS = (
    StandardScalerStep,
    MinMaxScalerStep,
    VarianceThresholdStep,
    SelectKBestStep,
    PCAStep,
    TruncatedSVDStep,
    FastICAStep,
    FeatureAgglomerationStep,
    RandomUnderSamplerStep,
    RandomOverSamplerStep,
)

_CLASSIFIERS = (
    KNNStep,
    DecisionTreeStep,
    LogisticRegressionStep,
    GaussianNBStep,
    MultinomialNBStep,
    LDAStep,
    LinearSVCStep,
    PassiveAggressiveStep,
    ExtraTreeStep,
    MLPStep,
)

_STEPS = {cls.algorithm: cls for cls in _PREPROCESSORS + _CLASSIFIERS}

_SIGNATURES: dict[str, tuple[tuple[str, tuple], ...]] = {
    "standardScaler": (),
    "minMaxScaler": (),
    "varianceThreshold": (("threshold", ("float", 0.0, 0.2)),),
    "selectKBest": (("k", ("int", 1, 20)),),
    "pca": (("n_components", ("int", 1, 10)),),
    "truncatedSVD": (("n_components", ("int", 1, 10)),),
    "fastICA": (("n_components", ("int", 1, 10)),),
    "fagg": (
        ("n_clusters", ("int", 2, 10)),
        ("linkage", ("cat", ("ward", "complete", "average"))),
    ),
    "rus": (("sampling_strategy", ("cat", ("majority", "not_minority", "all"))),),
    "ros": (("sampling_strategy", ("cat", ("minority", "not_majority", "all"))),),
    "kNN": (
        ("n_neighbors", ("int", 1, 30)),
        ("weights", ("cat", ("uniform", "distance"))),
    ),
    "decisionTree": (
        ("criterion", ("cat", ("gini", "entropy"))),
        ("maxDepth", ("int", 1, 20)),
    ),
    "logisticRegression": (
        ("penalty", ("cat", ("l1", "l2"))),
        ("C", ("float", 0.01, 10.0)),
    ),
    "gaussianNB": (),
    "multinomialNB": (
        ("alpha", ("float", 0.01, 10.0)),
        ("fit_prior", ("cat", ("true", "false"))),
    ),
    "lda": (),
    "lsvc": (
        ("penalty", ("cat", ("l1", "l2"))),
        ("C", ("float", 0.01, 10.0)),
    ),
    "passiveAggressiveClassifier": (
        ("C", ("float", 0.01, 10.0)),
        ("loss", ("cat", ("hinge", "squared_hinge"))),
    ),
    "extraTreeClassifier": (
        ("criterion", ("cat", ("gini", "entropy"))),
        ("maxDepth", ("int", 1, 20)),
    ),
    "mlpClassifier": (
        ("hidden_layer_size", ("int", 5, 100)),
        ("activation", ("cat", ("relu", "tanh", "logistic"))),
    ),
}


def catalog() -> tuple[AlgorithmDescriptor, ...]:
    """All algorithm descriptors: 10 preprocessors, then 10 classifiers."""
    out = []
    for cls in _PREPROCESSORS:
        out.append(AlgorithmDescriptor(cls.algorithm, "preprocessor", _SIGNATURES[cls.algorithm]))
    for cls in _CLASSIFIERS:
        out.append(AlgorithmDescriptor(cls.algorithm, "classifier", _SIGNATURES[cls.algorithm]))
    return tuple(out)


def fit_pipeline(workflow, train: Dataset, rng: np.random.Generator) -> list[FittedStep]:
    """Fit every step in order on the training data.

    Samplers rewrite the running (X, y) at fit time only.  Each step draws
    from its own child generator so inserting a step upstream cannot silently
    reshuffle a downstream one.  Raises :class:`AlgorithmFailure` (step id
    attached) on any recoverable failure.
    """
    X = train.features
    y = train.labels
    fitted: list[FittedStep] = []
    for step in workflow.steps:
        cls = _STEPS.get(step.algorithm)
        if cls is None:
            raise AlgorithmFailure(step.algorithm, "unknown algorithm")
        child = np.random.default_rng(int(rng.integers(0, 2 ** 63 - 1)))
        hp = dict(step.hyperparams)
        try:
            obj = cls(X, y, hp, child)
        except AlgorithmFailure:
            raise
        except (np.linalg.LinAlgError, FloatingPointError, ZeroDivisionError) as exc:
            raise AlgorithmFailure(step.algorithm, str(exc)) from exc
        fitted.append(obj)
        if obj.is_sampler:
            X, y = obj.resampled
        elif not obj.is_classifier:
            X = obj.transform(X)
            if X.ndim != 2 or X.shape[1] == 0:
                raise AlgorithmFailure(step.algorithm, "transform produced no features")
    return fitted


def predict_pipeline(fitted: list[FittedStep], X: np.ndarray) -> np.ndarray:
    """Run features through the fitted chain and return label predictions."""
    if not fitted or not fitted[-1].is_classifier:
        raise ValueError("pipeline must end in a classifier")
    X = np.asarray(X, dtype=np.float64)
    for step in fitted[:-1]:
        X = step.transform(X)
    return fitted[-1].predict(X)
