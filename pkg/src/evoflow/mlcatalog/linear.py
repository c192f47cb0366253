"""Gradient-trained linear models and the one-hidden-layer MLP.

All four train with seeded mini-batch gradient descent under a fixed epoch
cap (200).  Training stops early once the epoch loss plateaus; the cap is a
ceiling, not a duration.  Binary-native models go one-vs-rest on multiclass
problems.
"""

from __future__ import annotations

import numpy as np

from .base import AlgorithmFailure, FittedStep, class_counts

_EPOCH_CAP = 200
_BATCH = 64
_PLATEAU_TOL = 1e-3
_PLATEAU_PATIENCE = 3


def _add_bias(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _signed_targets(y_idx: np.ndarray, n_classes: int) -> np.ndarray:
    Y = -np.ones((len(y_idx), n_classes))
    Y[np.arange(len(y_idx)), y_idx] = 1.0
    return Y


class _LinearBase(FittedStep):
    is_classifier = True

    def __init__(self, X, y, hp, rng):
        self.classes_, _ = class_counts(y)
        y_idx = np.searchsorted(self.classes_, y)
        Xb = _add_bias(X)
        self.W_ = 0.01 * rng.standard_normal((Xb.shape[1], len(self.classes_)))
        if len(self.classes_) > 1:
            self._fit(Xb, y_idx, hp, rng)
        if not np.isfinite(self.W_).all():
            raise AlgorithmFailure(self.algorithm, "training diverged")

    def _epochs(self, n, rng):
        """Yield per-epoch lists of mini-batch index arrays."""
        for _ in range(_EPOCH_CAP):
            perm = rng.permutation(n)
            yield [perm[i:i + _BATCH] for i in range(0, n, _BATCH)]

    def _plateaued(self, history: list[float]) -> bool:
        if len(history) <= _PLATEAU_PATIENCE:
            return False
        recent = history[-(_PLATEAU_PATIENCE + 1):]
        span = max(recent) - min(recent)
        return span < _PLATEAU_TOL * max(1.0, abs(recent[-1]))

    def predict(self, X):
        scores = _add_bias(X) @ self.W_
        return self.classes_[np.argmax(scores, axis=1)]


def _prox_l1(W: np.ndarray, amount: float) -> None:
    """In-place soft threshold on everything but the bias row."""
    body = W[:-1]
    W[:-1] = np.sign(body) * np.maximum(np.abs(body) - amount, 0.0)


class LogisticRegressionStep(_LinearBase):
    algorithm = "logisticRegression"

    def _fit(self, Xb, y_idx, hp, rng):
        penalty = str(hp["penalty"])
        C = float(hp["C"])
        n, _ = Xb.shape
        k = len(self.classes_)
        Y = np.zeros((n, k))
        Y[np.arange(n), y_idx] = 1.0
        lam = 1.0 / (C * n)
        lr = 0.1
        history: list[float] = []
        for batches in self._epochs(n, rng):
            for idx in batches:
                Z = np.clip(Xb[idx] @ self.W_, -30.0, 30.0)
                P = 1.0 / (1.0 + np.exp(-Z))
                grad = Xb[idx].T @ (P - Y[idx]) / len(idx)
                if penalty == "l2":
                    grad[:-1] += lam * self.W_[:-1]
                self.W_ -= lr * grad
                if penalty == "l1":
                    _prox_l1(self.W_, lr * lam)
            Z = np.clip(Xb @ self.W_, -30.0, 30.0)
            loss = float(np.mean(np.log1p(np.exp(-np.where(Y > 0, Z, -Z)))))
            history.append(loss)
            if self._plateaued(history):
                break


class LinearSVCStep(_LinearBase):
    algorithm = "lsvc"

    def _fit(self, Xb, y_idx, hp, rng):
        penalty = str(hp["penalty"])
        C = float(hp["C"])
        n, _ = Xb.shape
        Y = _signed_targets(y_idx, len(self.classes_))
        lam = 1.0 / (C * n)
        lr = 0.05
        history: list[float] = []
        for batches in self._epochs(n, rng):
            for idx in batches:
                M = (Xb[idx] @ self.W_) * Y[idx]
                viol = (M < 1.0).astype(float)
                grad = -(Xb[idx].T @ (Y[idx] * viol)) / len(idx)
                if penalty == "l2":
                    grad[:-1] += lam * self.W_[:-1]
                self.W_ -= lr * grad
                if penalty == "l1":
                    _prox_l1(self.W_, lr * lam)
            M = (Xb @ self.W_) * Y
            loss = float(np.maximum(0.0, 1.0 - M).mean())
            history.append(loss)
            if self._plateaued(history) or loss == 0.0:
                break


class PassiveAggressiveStep(_LinearBase):
    """Margin-driven updates whose step size the aggressiveness C bounds
    (hinge) or damps (squared_hinge)."""

    algorithm = "passiveAggressiveClassifier"

    def _fit(self, Xb, y_idx, hp, rng):
        C = float(hp["C"])
        squared = str(hp["loss"]) == "squared_hinge"
        n, _ = Xb.shape
        Y = _signed_targets(y_idx, len(self.classes_))
        sq_norm = (Xb ** 2).sum(axis=1)
        history: list[float] = []
        for batches in self._epochs(n, rng):
            for idx in batches:
                M = (Xb[idx] @ self.W_) * Y[idx]
                loss = np.maximum(0.0, 1.0 - M)                  # (b, k)
                if squared:
                    tau = loss / (sq_norm[idx, None] + 0.5 / C)
                else:
                    tau = np.minimum(C, loss / np.maximum(sq_norm[idx, None], 1e-12))
                self.W_ += Xb[idx].T @ (tau * Y[idx]) / len(idx)
            M = (Xb @ self.W_) * Y
            total = float(np.maximum(0.0, 1.0 - M).mean())
            history.append(total)
            if self._plateaued(history) or total == 0.0:
                break


class MLPStep(FittedStep):
    """One hidden layer, softmax output, cross-entropy loss."""

    algorithm = "mlpClassifier"
    is_classifier = True

    def __init__(self, X, y, hp, rng):
        self.classes_, _ = class_counts(y)
        y_idx = np.searchsorted(self.classes_, y)
        h = int(hp["hidden_layer_size"])
        self.activation_ = str(hp["activation"])
        n, d = X.shape
        k = len(self.classes_)
        self.W1_ = rng.standard_normal((d, h)) * np.sqrt(2.0 / max(d, 1))
        self.b1_ = np.zeros(h)
        self.W2_ = rng.standard_normal((h, k)) * np.sqrt(2.0 / max(h, 1))
        self.b2_ = np.zeros(k)
        if k > 1:
            self._fit(X, y_idx, rng)
        for w in (self.W1_, self.W2_):
            if not np.isfinite(w).all():
                raise AlgorithmFailure(self.algorithm, "training diverged")

    def _act(self, Z):
        if self.activation_ == "relu":
            return np.maximum(Z, 0.0)
        if self.activation_ == "tanh":
            return np.tanh(Z)
        return 1.0 / (1.0 + np.exp(-np.clip(Z, -30.0, 30.0)))   # logistic

    def _act_grad(self, H, Z):
        if self.activation_ == "relu":
            return (Z > 0.0).astype(float)
        if self.activation_ == "tanh":
            return 1.0 - H ** 2
        return H * (1.0 - H)

    def _forward(self, X):
        Z1 = X @ self.W1_ + self.b1_
        H = self._act(Z1)
        logits = H @ self.W2_ + self.b2_
        logits -= logits.max(axis=1, keepdims=True)
        expl = np.exp(logits)
        P = expl / expl.sum(axis=1, keepdims=True)
        return Z1, H, P

    def _fit(self, X, y_idx, rng):
        n = X.shape[0]
        lr = 0.05
        history: list[float] = []
        for _ in range(_EPOCH_CAP):
            perm = rng.permutation(n)
            for i in range(0, n, _BATCH):
                idx = perm[i:i + _BATCH]
                Z1, H, P = self._forward(X[idx])
                G = P.copy()
                G[np.arange(len(idx)), y_idx[idx]] -= 1.0
                G /= len(idx)
                gW2 = H.T @ G
                gb2 = G.sum(axis=0)
                GH = (G @ self.W2_.T) * self._act_grad(H, Z1)
                gW1 = X[idx].T @ GH
                gb1 = GH.sum(axis=0)
                self.W2_ -= lr * gW2
                self.b2_ -= lr * gb2
                self.W1_ -= lr * gW1
                self.b1_ -= lr * gb1
            _, _, P = self._forward(X)
            loss = float(-np.log(np.maximum(P[np.arange(n), y_idx], 1e-12)).mean())
            history.append(loss)
            if len(history) > _PLATEAU_PATIENCE:
                recent = history[-(_PLATEAU_PATIENCE + 1):]
                if max(recent) - min(recent) < _PLATEAU_TOL * max(1.0, abs(recent[-1])):
                    break

    def predict(self, X):
        _, _, P = self._forward(X)
        return self.classes_[np.argmax(P, axis=1)]
