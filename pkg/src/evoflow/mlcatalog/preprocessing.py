"""Scaling, feature selection, feature agglomeration, and resamplers."""

from __future__ import annotations

import numpy as np

from .base import AlgorithmFailure, FittedStep, class_counts


class StandardScalerStep(FittedStep):
    """Center to zero mean, scale to unit sample standard deviation (ddof=1)."""

    algorithm = "standardScaler"

    def __init__(self, X: np.ndarray, y, hp, rng):
        self.mean_ = X.mean(axis=0)
        if X.shape[0] > 1:
            scale = X.std(axis=0, ddof=1)
        else:
            scale = np.ones(X.shape[1])
        scale = np.where(scale > 0, scale, 1.0)
        self.scale_ = scale

    def transform(self, X):
        return (X - self.mean_) / self.scale_


class MinMaxScalerStep(FittedStep):
    algorithm = "minMaxScaler"

    def __init__(self, X, y, hp, rng):
        self.min_ = X.min(axis=0)
        span = X.max(axis=0) - self.min_
        self.span_ = np.where(span > 0, span, 1.0)

    def transform(self, X):
        return (X - self.min_) / self.span_


class VarianceThresholdStep(FittedStep):
    """Keep features whose population variance is strictly above the threshold."""

    algorithm = "varianceThreshold"

    def __init__(self, X, y, hp, rng):
        threshold = float(hp["threshold"])
        variances = X.var(axis=0)
        self.keep_ = variances > threshold
        if not self.keep_.any():
            raise AlgorithmFailure(self.algorithm, "no feature exceeds the variance threshold")

    def transform(self, X):
        return X[:, self.keep_]


def _anova_f(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    classes, counts = class_counts(y)
    n, d = X.shape
    if len(classes) < 2 or n - len(classes) <= 0:
        return np.zeros(d)
    overall = X.mean(axis=0)
    ssb = np.zeros(d)
    ssw = np.zeros(d)
    for c, m in zip(classes, counts):
        Xc = X[y == c]
        mu = Xc.mean(axis=0)
        ssb += m * (mu - overall) ** 2
        ssw += ((Xc - mu) ** 2).sum(axis=0)
    msb = ssb / (len(classes) - 1)
    msw = ssw / (n - len(classes))
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(msw > 0, msb / np.where(msw > 0, msw, 1.0), np.inf)
    f = np.where((msw == 0) & (msb == 0), 0.0, f)
    return f


class SelectKBestStep(FittedStep):
    """Keep the k features with the largest ANOVA F score (k clamped to width)."""

    algorithm = "selectKBest"

    def __init__(self, X, y, hp, rng):
        k = min(int(hp["k"]), X.shape[1])
        scores = _anova_f(X, y)
        # Stable top-k: score descending, then feature index ascending.
        order = np.lexsort((np.arange(len(scores)), -scores))
        self.keep_ = np.sort(order[:k])

    def transform(self, X):
        return X[:, self.keep_]


class FeatureAgglomerationStep(FittedStep):
    """Bottom-up clustering of features; each output column is a cluster mean."""

    algorithm = "fagg"

    def __init__(self, X, y, hp, rng):
        d = X.shape[1]
        n_clusters = max(1, min(int(hp["n_clusters"]), d))
        linkage = str(hp["linkage"])
        clusters: list[list[int]] = [[j] for j in range(d)]
        # Pairwise distances between feature vectors (columns).
        diff = X.T[:, None, :] - X.T[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=2))
        if linkage == "ward":
            dist = dist ** 2  # Lance-Williams ward update works on squared distances
        np.fill_diagonal(dist, np.inf)
        sizes = np.ones(d)
        active = list(range(d))
        while len(active) > n_clusters:
            act = np.array(active)
            sub = dist[np.ix_(act, act)]
            flat = int(np.argmin(sub))  # ties resolve to the smallest index pair
            ai, bi = divmod(flat, len(act))
            i, j = int(act[min(ai, bi)]), int(act[max(ai, bi)])
            ni, nj = sizes[i], sizes[j]
            for k in active:
                if k in (i, j):
                    continue
                if linkage == "ward":
                    nk = sizes[k]
                    new = ((ni + nk) * dist[i, k] + (nj + nk) * dist[j, k]
                           - nk * dist[i, j]) / (ni + nj + nk)
                elif linkage == "complete":
                    new = max(dist[i, k], dist[j, k])
                else:  # average
                    new = (ni * dist[i, k] + nj * dist[j, k]) / (ni + nj)
                dist[i, k] = dist[k, i] = new
            sizes[i] = ni + nj
            clusters[i] = clusters[i] + clusters[j]
            active.remove(j)
        groups = sorted((sorted(clusters[i]) for i in active), key=lambda grp: grp[0])
        self.groups_ = [np.array(grp) for grp in groups]

    def transform(self, X):
        return np.column_stack([X[:, grp].mean(axis=1) for grp in self.groups_])


class RandomUnderSamplerStep(FittedStep):
    """Drop rows of over-represented classes down to the minority count at fit time."""

    algorithm = "rus"
    is_sampler = True

    def __init__(self, X, y, hp, rng):
        strategy = str(hp["sampling_strategy"])
        classes, counts = class_counts(y)
        target = counts.min()
        if strategy == "majority":
            scope = set(classes[counts == counts.max()].tolist())
        elif strategy == "not_minority":
            scope = set(classes.tolist()) - set(classes[counts == counts.min()].tolist())
        elif strategy == "all":
            scope = set(classes.tolist())
        else:
            raise AlgorithmFailure(self.algorithm, f"unknown sampling_strategy {strategy!r}")
        keep: list[np.ndarray] = []
        for c in classes:
            idx = np.flatnonzero(y == c)
            if int(c) in scope and len(idx) > target:
                idx = np.sort(rng.choice(idx, size=target, replace=False))
            keep.append(idx)
        order = np.sort(np.concatenate(keep))
        self.resampled = (X[order], y[order])


class RandomOverSamplerStep(FittedStep):
    """Duplicate rows of under-represented classes up to the majority count at fit time."""

    algorithm = "ros"
    is_sampler = True

    def __init__(self, X, y, hp, rng):
        strategy = str(hp["sampling_strategy"])
        classes, counts = class_counts(y)
        target = counts.max()
        if strategy == "minority":
            scope = set(classes[counts == counts.min()].tolist())
        elif strategy == "not_majority":
            scope = set(classes.tolist()) - set(classes[counts == counts.max()].tolist())
        elif strategy == "all":
            scope = set(classes.tolist())
        else:
            raise AlgorithmFailure(self.algorithm, f"unknown sampling_strategy {strategy!r}")
        extras = [np.arange(len(y))]
        for c in classes:
            idx = np.flatnonzero(y == c)
            if int(c) in scope and len(idx) < target:
                extras.append(rng.choice(idx, size=target - len(idx), replace=True))
        order = np.concatenate(extras)
        self.resampled = (X[order], y[order])
