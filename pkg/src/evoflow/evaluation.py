"""Workflow evaluation: balanced accuracy over stratified k-fold CV.

Fitness pools the out-of-fold predictions of every fold and scores them in
one pass; evaluation time is wall time of the whole k-fold procedure,
measured through an injectable clock (exactly two reads per fresh
evaluation, none around cache lookups).  Results are memoized by canonical
key: a workflow is fitted at most once per session, even under concurrent
misses.
"""

from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass

import numpy as np

from .mlcatalog import AlgorithmFailure, Dataset, fit_pipeline, predict_pipeline

__all__ = [
    "Clock",
    "SystemClock",
    "FakeClock",
    "balanced_accuracy",
    "FoldPlan",
    "make_fold_plan",
    "EvaluationRecord",
    "EvaluationCache",
    "evaluation_rng",
    "evaluate",
]


class Clock:
    """Time source protocol: ``now()`` returns seconds as float."""

    def now(self) -> float:
        raise NotImplementedError


class SystemClock(Clock):
    def now(self) -> float:
        return time.perf_counter()


class FakeClock(Clock):
    """Scripted clock for tests: each read advances by ``step`` (or pops the
    next scripted advance), so a fresh evaluation records exactly that value."""

    def __init__(self, step: float = 1.0, advances: list[float] | None = None):
        self.step = step
        self.advances = list(advances) if advances is not None else None
        self._t = 0.0

    def now(self) -> float:
        value = self._t
        if self.advances is not None:
            self._t += self.advances.pop(0) if self.advances else self.step
        else:
            self._t += self.step
        return value


def balanced_accuracy(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Mean per-class recall over the classes present in ``y_true``."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or len(y_true) == 0:
        raise ValueError("label vectors must be equal-length, non-empty, 1-d")
    recalls = []
    for c in np.unique(y_true):
        mask = y_true == c
        recalls.append(float(np.mean(y_pred[mask] == c)))
    return float(np.mean(recalls))


@dataclass(frozen=True)
class FoldPlan:
    """A stratified assignment of each row to one of k folds."""

    k: int
    assignment: np.ndarray    # (n,) int fold index per row
    seed: int

    def train_mask(self, fold: int) -> np.ndarray:
        return self.assignment != fold

    def test_mask(self, fold: int) -> np.ndarray:
        return self.assignment == fold


def make_fold_plan(labels: np.ndarray, k: int, seed: int) -> FoldPlan:
    """Stratified folds: per-class counts differ by at most one across folds,
    and a class with fewer than k instances lands in distinct folds."""
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > len(labels):
        raise ValueError("k exceeds the number of rows")
    rng = np.random.default_rng(seed)
    assignment = np.full(len(labels), -1, dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = rng.permutation(idx)
        for i, row in enumerate(idx):
            assignment[row] = (offset + i) % k
        offset = (offset + len(idx)) % k
    return FoldPlan(k=k, assignment=assignment, seed=seed)


@dataclass(frozen=True)
class EvaluationRecord:
    fitness: float
    eval_time: float
    failed: bool
    classifier: str


class EvaluationCache:
    """Canonical-key memo with exact counters.

    ``get_or_compute`` guarantees at most one fit per key: concurrent misses
    on the same key block until the first computation lands.
    """

    def __init__(self):
        self._store: dict[str, EvaluationRecord] = {}
        self._pending: dict[str, threading.Event] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.fit_count = 0

    def __len__(self) -> int:
        return len(self._store)

    def __contains__(self, key: str) -> bool:
        return key in self._store

    def lookup(self, key: str) -> EvaluationRecord | None:
        return self._store.get(key)

    def get_or_compute(self, key: str, compute) -> tuple[EvaluationRecord, bool]:
        """Return ``(record, cached)`` where ``cached`` is True on a hit."""
        while True:
            with self._lock:
                record = self._store.get(key)
                if record is not None:
                    self.hits += 1
                    return record, True
                event = self._pending.get(key)
                if event is None:
                    self._pending[key] = threading.Event()
                    self.misses += 1
                    break
            event.wait()
        try:
            record = compute()
        except BaseException:
            with self._lock:
                self._pending.pop(key).set()
            raise
        with self._lock:
            self._store[key] = record
            self.fit_count += 1
            self._pending.pop(key).set()
        return record, False


def evaluation_rng(seed: int, canonical_key: str) -> np.random.Generator:
    """Generator derived from (session seed, canonical key): cache-equivalent
    workflows would train identically whether or not the cache interferes."""
    digest = hashlib.sha256(f"{seed}:{canonical_key}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def evaluate(
    workflow,
    train: Dataset,
    plan: FoldPlan,
    cache: EvaluationCache,
    clock: Clock,
    seed: int,
) -> tuple[EvaluationRecord, bool]:
    """Score one workflow by stratified k-fold CV; returns ``(record, cached)``.

    A step failure in any fold short-circuits to a failed record with fitness
    zero.  Time covers fitting and prediction only.
    """
    key = workflow.canonical_key

    def compute() -> EvaluationRecord:
        rng = evaluation_rng(seed, key)
        fold_seeds = [int(rng.integers(0, 2 ** 63 - 1)) for _ in range(plan.k)]
        predictions = np.empty(train.n_samples, dtype=train.labels.dtype)
        t0 = clock.now()
        failed = False
        for fold in range(plan.k):
            train_mask = plan.train_mask(fold)
            test_mask = ~train_mask
            try:
                fitted = fit_pipeline(
                    workflow,
                    train.subset(train_mask),
                    np.random.default_rng(fold_seeds[fold]),
                )
                predictions[test_mask] = predict_pipeline(fitted, train.features[test_mask])
            except AlgorithmFailure:
                failed = True
                break
        t1 = clock.now()
        fitness = 0.0 if failed else balanced_accuracy(train.labels, predictions)
        return EvaluationRecord(
            fitness=fitness,
            eval_time=t1 - t0,
            failed=failed,
            classifier=workflow.steps[-1].algorithm,
        )

    return cache.get_or_compute(key, compute)
