"""Seeded synthetic benchmark datasets and CSV round-trip helpers.

The classic UCI tables these mimic cannot be vendored, so each generator
reproduces a benchmark's row/feature/class shape and rough class balance and
difficulty.  Generation is deterministic: the same call always returns the
same rows.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .mlcatalog import Dataset

__all__ = [
    "make_breastcancer",
    "make_glass",
    "make_iris",
    "make_blobs",
    "write_csv",
    "read_csv",
]


def make_blobs(
    counts: list[int],
    n_features: int,
    seed: int,
    spread: float = 1.0,
    radius: float = 3.0,
    name: str = "blobs",
    class_names: tuple[str, ...] | None = None,
) -> Dataset:
    """Gaussian class clusters at random centers; a generic test workhorse."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-radius, radius, size=(len(counts), n_features))
    rows = []
    labels = []
    for c, m in enumerate(counts):
        rows.append(centers[c] + spread * rng.standard_normal((m, n_features)))
        labels.extend([c] * m)
    X = np.vstack(rows)
    y = np.array(labels, dtype=np.int64)
    perm = rng.permutation(len(y))
    names = class_names or tuple(f"c{i}" for i in range(len(counts)))
    return Dataset(features=X[perm], labels=y[perm], class_names=names, name=name)


def make_breastcancer(seed: int = 7919) -> Dataset:
    """699 rows, 9 ordinal 1..10 features, benign/malignant at 458/241."""
    rng = np.random.default_rng(seed)
    n_benign, n_malignant = 458, 241
    d = 9
    benign = rng.normal(2.8, 1.6, size=(n_benign, d))
    malignant = rng.normal(6.6, 2.4, size=(n_malignant, d))
    # Two noisy dimensions carry almost no signal, as in the original table.
    benign[:, 7:] = rng.normal(3.2, 2.2, size=(n_benign, 2))
    malignant[:, 7:] = rng.normal(4.4, 2.8, size=(n_malignant, 2))
    X = np.vstack([benign, malignant])
    X = np.clip(np.rint(X), 1, 10)
    y = np.array([0] * n_benign + [1] * n_malignant, dtype=np.int64)
    perm = rng.permutation(len(y))
    return Dataset(
        features=X[perm],
        labels=y[perm],
        class_names=("benign", "malignant"),
        name="breastcancer",
    )


def make_glass(seed: int = 104729) -> Dataset:
    """214 rows, 9 continuous features, 6 unbalanced classes (70/76/17/13/9/29)."""
    rng = np.random.default_rng(seed)
    counts = [70, 76, 17, 13, 9, 29]
    d = 9
    centers = rng.uniform(-2.5, 2.5, size=(6, d))
    centers[1] = centers[0] + rng.normal(0.0, 0.9, size=d)   # the two big classes overlap
    centers[3] = centers[2] + rng.normal(0.0, 1.1, size=d)
    rows = []
    labels = []
    for c, m in enumerate(counts):
        scale = rng.uniform(0.8, 1.6, size=d)
        rows.append(centers[c] + scale * rng.standard_normal((m, d)))
        labels.extend([c] * m)
    X = np.vstack(rows)
    y = np.array(labels, dtype=np.int64)
    perm = rng.permutation(len(y))
    return Dataset(
        features=X[perm],
        labels=y[perm],
        class_names=("g1", "g2", "g3", "g5", "g6", "g7"),
        name="glass",
    )


def make_iris(seed: int = 53) -> Dataset:
    """150 rows, 4 features, 3 balanced classes, one far from the other two."""
    rng = np.random.default_rng(seed)
    centers = np.array(
        [[5.0, 3.4, 1.5, 0.2], [5.9, 2.8, 4.3, 1.3], [6.6, 3.0, 5.6, 2.0]]
    )
    scales = np.array([[0.35, 0.38, 0.17, 0.11],
                       [0.52, 0.31, 0.47, 0.20],
                       [0.64, 0.32, 0.55, 0.27]])
    rows = []
    labels = []
    for c in range(3):
        rows.append(centers[c] + scales[c] * rng.standard_normal((50, 4)))
        labels.extend([c] * 50)
    X = np.round(np.vstack(rows), 1)
    y = np.array(labels, dtype=np.int64)
    perm = rng.permutation(len(y))
    return Dataset(
        features=X[perm],
        labels=y[perm],
        class_names=("setosa", "versicolor", "virginica"),
        name="iris",
    )


def write_csv(dataset: Dataset, path) -> None:
    """UTF-8 CSV: header row, numeric feature columns, class label last."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i + 1}" for i in range(dataset.n_features)] + ["class"])
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([_format_number(v) for v in row] + [dataset.class_names[label]])


def _format_number(v: float) -> str:
    f = float(v)
    return str(int(f)) if f.is_integer() else repr(f)


def read_csv(path_or_text, name: str = "") -> Dataset:
    """Parse the CSV format back into a Dataset.

    Accepts a filesystem path or raw text.  Requires a header, at least one
    feature column, numeric features, and no missing values; raises
    ValueError naming the offending row otherwise.
    """
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        fh = io.StringIO(path_or_text)
        rows = list(csv.reader(fh))
    else:
        with open(path_or_text, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError("CSV needs a header row and at least one data row")
    header = rows[0]
    if len(header) < 2:
        raise ValueError("CSV needs at least one feature column plus the class column")
    width = len(header)
    features = []
    raw_labels = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ValueError(f"row {lineno}: expected {width} columns, found {len(row)}")
        try:
            features.append([float(v) for v in row[:-1]])
        except ValueError:
            raise ValueError(f"row {lineno}: non-numeric feature value") from None
        label = row[-1].strip()
        if not label:
            raise ValueError(f"row {lineno}: empty class label")
        raw_labels.append(label)
    class_names = tuple(sorted(set(raw_labels)))
    index = {cname: i for i, cname in enumerate(class_names)}
    labels = np.array([index[v] for v in raw_labels], dtype=np.int64)
    return Dataset(
        features=np.array(features, dtype=np.float64),
        labels=labels,
        class_names=class_names,
        name=name,
    )
