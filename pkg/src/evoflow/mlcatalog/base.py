"""Shared types for the native algorithm catalog."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Dataset",
    "AlgorithmFailure",
    "AlgorithmDescriptor",
    "FittedStep",
    "class_counts",
]


class AlgorithmFailure(Exception):
    """A step could not be fitted or applied; the evaluator maps this to fitness 0."""

    def __init__(self, step: str, message: str):
        self.step = step
        super().__init__(f"{step}: {message}")


@dataclass
class Dataset:
    """A dense numeric dataset; labels are integer class ids into class_names."""

    features: np.ndarray          # (n_samples, n_features) float64
    labels: np.ndarray            # (n_samples,) int64
    class_names: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be 2-dimensional")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels length must match the number of rows")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain non-finite values")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, mask_or_index) -> "Dataset":
        return Dataset(
            features=self.features[mask_or_index],
            labels=self.labels[mask_or_index],
            class_names=self.class_names,
            name=self.name,
        )


@dataclass(frozen=True)
class AlgorithmDescriptor:
    """Catalog entry: id, role, and the hyperparameter signature.

    ``hyperparams`` maps name -> ("cat", values tuple) or ("int"/"float", lo, hi);
    it must match the shipped grammar exactly.
    """

    id: str
    kind: str                       # "preprocessor" | "classifier"
    hyperparams: tuple[tuple[str, tuple], ...] = ()


class FittedStep:
    """A fitted pipeline step.

    Preprocessors implement ``transform``; classifiers implement ``predict``;
    samplers additionally expose the resampled training data via
    ``resampled`` and are identity transforms at prediction time.
    """

    algorithm = ""
    is_classifier = False
    is_sampler = False

    def transform(self, X: np.ndarray) -> np.ndarray:
        return X

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def class_counts(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unique classes (sorted) and their counts."""
    return np.unique(y, return_counts=True)
