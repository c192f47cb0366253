"""Projection methods: PCA, truncated SVD, FastICA.

PCA and truncated SVD extract leading eigenvectors by power iteration with
deflation (tolerance 1e-7, at most 500 iterations per component); FastICA
whitens first and runs the fixed-point logcosh iteration (tolerance 1e-4, at
most 200 sweeps) with symmetric decorrelation.
"""

from __future__ import annotations

import numpy as np

from .base import AlgorithmFailure, FittedStep

_POWER_TOL = 1e-7
_POWER_MAX_ITER = 500
_ICA_TOL = 1e-4
_ICA_MAX_ITER = 200


def _power_components(M: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Top-k eigenvectors of a symmetric PSD matrix by power iteration."""
    d = M.shape[0]
    M = M.copy()
    components = np.zeros((k, d))
    for c in range(k):
        v = rng.standard_normal(d)
        # Keep iterates orthogonal to found components; deflation alone can
        # drift numerically over many components.
        for _ in range(_POWER_MAX_ITER):
            w = M @ v
            if c:
                w -= components[:c].T @ (components[:c] @ w)
            norm = np.linalg.norm(w)
            if norm <= 1e-300:
                w = rng.standard_normal(d)
                norm = np.linalg.norm(w)
            w /= norm
            if np.linalg.norm(w - v) < _POWER_TOL:
                v = w
                break
            v = w
        lam = float(v @ M @ v)
        M -= lam * np.outer(v, v)
        # Deterministic sign: the largest-magnitude coordinate is positive.
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        components[c] = v
    return components


class PCAStep(FittedStep):
    algorithm = "pca"

    def __init__(self, X, y, hp, rng):
        k = max(1, min(int(hp["n_components"]), X.shape[1]))
        self.mean_ = X.mean(axis=0)
        Xc = X - self.mean_
        denom = max(X.shape[0] - 1, 1)
        cov = (Xc.T @ Xc) / denom
        self.components_ = _power_components(cov, k, rng)

    def transform(self, X):
        return (X - self.mean_) @ self.components_.T


class TruncatedSVDStep(FittedStep):
    """Like PCA but without centering."""

    algorithm = "truncatedSVD"

    def __init__(self, X, y, hp, rng):
        k = max(1, min(int(hp["n_components"]), X.shape[1]))
        gram = (X.T @ X) / max(X.shape[0], 1)
        self.components_ = _power_components(gram, k, rng)

    def transform(self, X):
        return X @ self.components_.T


class FastICAStep(FittedStep):
    algorithm = "fastICA"

    def __init__(self, X, y, hp, rng):
        n, d = X.shape
        k = max(1, min(int(hp["n_components"]), d, n))
        self.mean_ = X.mean(axis=0)
        Xc = X - self.mean_
        cov = (Xc.T @ Xc) / max(n - 1, 1)
        eigval, eigvec = np.linalg.eigh(cov)
        order = np.argsort(eigval)[::-1][:k]
        eigval = eigval[order]
        eigvec = eigvec[:, order]
        if np.any(eigval <= 1e-12):
            raise AlgorithmFailure(self.algorithm, "data rank is below n_components")
        self.whiten_ = (eigvec / np.sqrt(eigval)).T        # (k, d)
        Z = Xc @ self.whiten_.T                            # unit-covariance sources

        W = self._decorrelate(rng.standard_normal((k, k)))
        converged = False
        for _ in range(_ICA_MAX_ITER):
            G = np.tanh(Z @ W.T)                           # (n, k)
            g_prime = (1.0 - G ** 2).mean(axis=0)          # (k,)
            W_new = (G.T @ Z) / n - g_prime[:, None] * W
            W_new = self._decorrelate(W_new)
            lim = float(np.max(np.abs(np.abs(np.einsum("ij,ij->i", W_new, W)) - 1.0)))
            W = W_new
            if lim < _ICA_TOL:
                converged = True
                break
        if not converged:
            raise AlgorithmFailure(self.algorithm, "did not converge")
        self.unmixing_ = W @ self.whiten_                  # (k, d)

    @staticmethod
    def _decorrelate(W: np.ndarray) -> np.ndarray:
        s, u = np.linalg.eigh(W @ W.T)
        s = np.maximum(s, 1e-12)
        return (u @ np.diag(1.0 / np.sqrt(s)) @ u.T) @ W

    def transform(self, X):
        return (X - self.mean_) @ self.unmixing_.T
