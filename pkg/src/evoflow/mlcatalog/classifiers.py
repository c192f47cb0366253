"""Instance-based, Bayesian, discriminant, and tree classifiers."""

from __future__ import annotations

import numpy as np

from .base import AlgorithmFailure, FittedStep, class_counts

_LDA_REG = 1e-6


class KNNStep(FittedStep):
    algorithm = "kNN"
    is_classifier = True

    def __init__(self, X, y, hp, rng):
        self.X_ = X
        self.classes_, _ = class_counts(y)
        self.y_idx_ = np.searchsorted(self.classes_, y)
        self.k_ = max(1, min(int(hp["n_neighbors"]), X.shape[0]))
        self.weights_ = str(hp["weights"])

    def predict(self, X):
        sq = (
            (X ** 2).sum(axis=1)[:, None]
            + (self.X_ ** 2).sum(axis=1)[None, :]
            - 2.0 * (X @ self.X_.T)
        )
        np.maximum(sq, 0.0, out=sq)
        order = np.argsort(sq, axis=1, kind="stable")[:, : self.k_]
        labels = self.y_idx_[order]                      # (n, k)
        if self.weights_ == "distance":
            w = 1.0 / (np.sqrt(np.take_along_axis(sq, order, axis=1)) + 1e-12)
        else:
            w = np.ones_like(labels, dtype=float)
        votes = np.zeros((X.shape[0], len(self.classes_)))
        rows = np.repeat(np.arange(X.shape[0]), self.k_)
        np.add.at(votes, (rows, labels.ravel()), w.ravel())
        return self.classes_[np.argmax(votes, axis=1)]


class GaussianNBStep(FittedStep):
    algorithm = "gaussianNB"
    is_classifier = True

    def __init__(self, X, y, hp, rng):
        self.classes_, counts = class_counts(y)
        eps = 1e-9 * float(X.var(axis=0).max()) if X.shape[0] > 1 else 1e-9
        eps = max(eps, 1e-12)
        self.theta_ = np.stack([X[y == c].mean(axis=0) for c in self.classes_])
        self.var_ = np.stack([X[y == c].var(axis=0) for c in self.classes_]) + eps
        self.log_prior_ = np.log(counts / counts.sum())

    def predict(self, X):
        ll = self.log_prior_[None, :] - 0.5 * (
            np.log(2.0 * np.pi * self.var_).sum(axis=1)[None, :]
            + (((X[:, None, :] - self.theta_[None, :, :]) ** 2) / self.var_[None, :, :]).sum(axis=2)
        )
        return self.classes_[np.argmax(ll, axis=1)]


class MultinomialNBStep(FittedStep):
    """Count-model Bayes; rejects negative features."""

    algorithm = "multinomialNB"
    is_classifier = True

    def __init__(self, X, y, hp, rng):
        if (X < 0).any():
            raise AlgorithmFailure(self.algorithm, "features must be non-negative")
        alpha = float(hp["alpha"])
        fit_prior = str(hp["fit_prior"]) == "true"
        self.classes_, counts = class_counts(y)
        fc = np.stack([X[y == c].sum(axis=0) for c in self.classes_])
        smoothed = fc + alpha
        self.log_theta_ = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
        if fit_prior:
            self.log_prior_ = np.log(counts / counts.sum())
        else:
            self.log_prior_ = np.full(len(self.classes_), -np.log(len(self.classes_)))

    def predict(self, X):
        if (X < 0).any():
            raise AlgorithmFailure(self.algorithm, "features must be non-negative")
        scores = X @ self.log_theta_.T + self.log_prior_[None, :]
        return self.classes_[np.argmax(scores, axis=1)]


class LDAStep(FittedStep):
    """Fisher projection onto the leading discriminant directions, then
    nearest projected class mean.  The within-class scatter must be full
    rank; a tiny ridge (1e-6) only stabilizes the solve."""

    algorithm = "lda"
    is_classifier = True

    def __init__(self, X, y, hp, rng):
        self.classes_, counts = class_counts(y)
        d = X.shape[1]
        overall = X.mean(axis=0)
        means = np.stack([X[y == c].mean(axis=0) for c in self.classes_])
        Sw = np.zeros((d, d))
        Sb = np.zeros((d, d))
        for mu, c, m in zip(means, self.classes_, counts):
            Xc = X[y == c] - mu
            Sw += Xc.T @ Xc
            dm = (mu - overall)[:, None]
            Sb += m * (dm @ dm.T)
        if len(self.classes_) > 1 and np.linalg.matrix_rank(Sw) < d:
            raise AlgorithmFailure(self.algorithm, "singular within-class scatter")
        r = max(1, min(len(self.classes_) - 1, d))
        try:
            L = np.linalg.cholesky(Sw + _LDA_REG * np.eye(d))
            Li = np.linalg.inv(L)
        except np.linalg.LinAlgError as exc:
            raise AlgorithmFailure(self.algorithm, str(exc)) from exc
        A = Li @ Sb @ Li.T
        eigval, eigvec = np.linalg.eigh((A + A.T) / 2.0)
        top = eigvec[:, np.argsort(eigval)[::-1][:r]]
        self.proj_ = (Li.T @ top).T                     # (r, d)
        self.proj_means_ = means @ self.proj_.T

    def predict(self, X):
        Z = X @ self.proj_.T
        sq = ((Z[:, None, :] - self.proj_means_[None, :, :]) ** 2).sum(axis=2)
        return self.classes_[np.argmin(sq, axis=1)]


# ---------------------------------------------------------------------------
# Decision trees.

def _impurity(counts: np.ndarray, criterion: str) -> np.ndarray:
    """Row-wise impurity of class-count vectors."""
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.where(totals > 0, totals, 1), 0.0)
    if criterion == "entropy":
        logp = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
        return -(p * logp).sum(axis=1)
    return 1.0 - (p ** 2).sum(axis=1)


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "label")

    def __init__(self, label=None, feature=None, threshold=None, left=None, right=None):
        self.label = label
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right


class _TreeBase(FittedStep):
    is_classifier = True

    def __init__(self, X, y, hp, rng):
        self.classes_, _ = class_counts(y)
        y_idx = np.searchsorted(self.classes_, y)
        self.max_depth_ = int(hp["maxDepth"])
        self.criterion_ = str(hp["criterion"])
        self.root_ = self._build(X, y_idx, depth=0, rng=rng)

    def _leaf(self, y_idx):
        counts = np.bincount(y_idx, minlength=len(self.classes_))
        return _Node(label=int(np.argmax(counts)))

    def _build(self, X, y_idx, depth, rng):
        if depth >= self.max_depth_ or len(np.unique(y_idx)) <= 1 or X.shape[0] < 2:
            return self._leaf(y_idx)
        split = self._best_split(X, y_idx, rng)
        if split is None:
            return self._leaf(y_idx)
        feature, threshold = split
        mask = X[:, feature] <= threshold
        if not mask.any() or mask.all():
            return self._leaf(y_idx)
        return _Node(
            feature=feature,
            threshold=threshold,
            left=self._build(X[mask], y_idx[mask], depth + 1, rng),
            right=self._build(X[~mask], y_idx[~mask], depth + 1, rng),
        )

    def predict(self, X):
        out = np.zeros(X.shape[0], dtype=np.int64)
        stack = [(self.root_, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if len(idx) == 0:
                continue
            if node.label is not None:
                out[idx] = node.label
                continue
            mask = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
        return self.classes_[out]


class DecisionTreeStep(_TreeBase):
    """Exhaustive binary splits on feature midpoints; first best split wins ties."""

    algorithm = "decisionTree"

    def _best_split(self, X, y_idx, rng):
        m, d = X.shape
        C = len(self.classes_)
        parent = np.bincount(y_idx, minlength=C)[None, :]
        parent_imp = float(_impurity(parent, self.criterion_)[0])
        best_gain = 1e-12
        best = None
        for f in range(d):
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            onehot = np.zeros((m, C))
            onehot[np.arange(m), y_idx[order]] = 1.0
            left = np.cumsum(onehot, axis=0)
            pos = np.flatnonzero(xs[:-1] < xs[1:])
            if len(pos) == 0:
                continue
            lc = left[pos]
            rc = parent - lc
            nl = (pos + 1).astype(float)
            nr = m - nl
            weighted = (nl * _impurity(lc, self.criterion_)
                        + nr * _impurity(rc, self.criterion_)) / m
            gains = parent_imp - weighted
            k = int(np.argmax(gains))
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                best = (f, float((xs[pos[k]] + xs[pos[k] + 1]) / 2.0))
        return best


class ExtraTreeStep(_TreeBase):
    """One uniformly random threshold per feature; the best-scoring feature splits."""

    algorithm = "extraTreeClassifier"

    def _best_split(self, X, y_idx, rng):
        m, d = X.shape
        C = len(self.classes_)
        lo = X.min(axis=0)
        hi = X.max(axis=0)
        thresholds = rng.uniform(lo, hi)
        parent = np.bincount(y_idx, minlength=C)[None, :]
        parent_imp = float(_impurity(parent, self.criterion_)[0])
        best_gain = 1e-12
        best = None
        for f in range(d):
            if hi[f] <= lo[f]:
                continue
            mask = X[:, f] <= thresholds[f]
            nl = int(mask.sum())
            if nl == 0 or nl == m:
                continue
            lc = np.bincount(y_idx[mask], minlength=C)[None, :]
            rc = parent - lc
            weighted = (nl * float(_impurity(lc, self.criterion_)[0])
                        + (m - nl) * float(_impurity(rc, self.criterion_)[0])) / m
            gain = parent_imp - weighted
            if gain > best_gain:
                best_gain = gain
                best = (f, float(thresholds[f]))
        return best
