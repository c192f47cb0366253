from __future__ import annotations

import numpy as np
import pytest

from evoflow.datasets import Dataset, make_blobs
from evoflow.grammar import default_grammar


@pytest.fixture(scope="session")
def grammar():
    return default_grammar()


@pytest.fixture(scope="session")
def blobs2():
    """Two well-separated Gaussian blobs, 100 points, all-positive features."""
    raw = make_blobs(
        counts=(50, 50), n_features=4, seed=7, spread=0.4, radius=4.0, name="blobs2"
    )
    shifted = raw.features - raw.features.min() + 0.5
    return Dataset(
        features=shifted, labels=raw.labels, class_names=raw.class_names, name=raw.name
    )


@pytest.fixture(scope="session")
def blobs3():
    """Three classes with uneven counts; small enough for fast evaluation."""
    return make_blobs(
        counts=(40, 25, 15), n_features=4, seed=11, spread=0.7, radius=3.0, name="blobs3"
    )


@pytest.fixture(scope="session")
def tiny_imbalanced():
    return make_blobs(
        counts=(30, 12), n_features=3, seed=3, spread=0.6, radius=2.5, name="tiny"
    )


def make_dataset(X, y, name="adhoc", class_names=None) -> Dataset:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if class_names is None:
        class_names = tuple(f"c{i}" for i in range(int(y.max()) + 1))
    return Dataset(features=X, labels=y, class_names=tuple(class_names), name=name)
