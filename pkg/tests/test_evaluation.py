"""Evaluation protocol: balanced accuracy, fold plans, caching, timing."""

from __future__ import annotations

import threading

import numpy as np
import pytest

from evoflow.evaluation import (
    EvaluationCache,
    EvaluationRecord,
    FakeClock,
    SystemClock,
    balanced_accuracy,
    evaluate,
    evaluation_rng,
    make_fold_plan,
)
from evoflow.interaction import parse_workflow_key

from conftest import make_dataset


def oracle_balanced_accuracy(y_true, y_pred) -> float:
    """Independent confusion-matrix oracle: mean of diagonal recall."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    classes = sorted(set(y_true.tolist()))
    per_class = []
    for c in classes:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        support = sum(1 for t in y_true if t == c)
        per_class.append(tp / support)
    return sum(per_class) / len(per_class)


# -- balanced accuracy ---------------------------------------------------------

def test_balanced_accuracy_hand_case():
    # recall(A) = 2/3, recall(B) = 1/1
    y_true = np.array([0, 0, 0, 1])
    y_pred = np.array([0, 0, 1, 1])
    got = balanced_accuracy(y_true, y_pred)
    assert abs(got - (2 / 3 + 1) / 2) < 1e-12
    assert abs(got - 0.8333333333333333) < 1e-12


def test_balanced_accuracy_matches_oracle():
    rng = np.random.default_rng(0)
    for _ in range(300):
        n = int(rng.integers(2, 60))
        k = int(rng.integers(2, 5))
        y_true = rng.integers(0, k, size=n)
        while len(np.unique(y_true)) < 2:
            y_true = rng.integers(0, k, size=n)
        y_pred = rng.integers(0, k, size=n)
        assert abs(
            balanced_accuracy(y_true, y_pred) - oracle_balanced_accuracy(y_true, y_pred)
        ) < 1e-12


def test_balanced_accuracy_ignores_absent_classes():
    # classes only appearing in y_pred contribute nothing
    y_true = np.array([0, 0, 1, 1])
    y_pred = np.array([0, 2, 1, 2])
    assert abs(balanced_accuracy(y_true, y_pred) - 0.5) < 1e-12


def test_balanced_accuracy_input_validation():
    with pytest.raises(ValueError):
        balanced_accuracy(np.array([0, 1]), np.array([0]))
    with pytest.raises(ValueError):
        balanced_accuracy(np.array([]), np.array([]))


# -- fold plans -------------------------------------------------------------------

def test_fold_plan_partitions_rows():
    rng = np.random.default_rng(1)
    for trial in range(40):
        n = int(rng.integers(10, 120))
        k = int(rng.integers(2, 7))
        labels = rng.integers(0, 4, size=n)
        plan = make_fold_plan(labels, k, seed=trial)
        assert plan.assignment.shape == (n,)
        assert set(np.unique(plan.assignment)) <= set(range(k))
        for fold in range(k):
            assert np.array_equal(plan.train_mask(fold), ~plan.test_mask(fold))
        # every row in exactly one test fold
        total = sum(plan.test_mask(f).sum() for f in range(k))
        assert total == n


def test_fold_plan_stratified_skew():
    rng = np.random.default_rng(2)
    for trial in range(40):
        n = int(rng.integers(20, 150))
        k = int(rng.integers(2, 6))
        labels = rng.integers(0, 3, size=n)
        plan = make_fold_plan(labels, k, seed=trial)
        for c in np.unique(labels):
            per_fold = [
                int(np.sum((labels == c) & (plan.assignment == f))) for f in range(k)
            ]
            assert max(per_fold) - min(per_fold) <= 1


def test_rare_class_spreads_over_distinct_folds():
    # 3 instances of class 1, k = 5: the class occupies exactly 3 folds
    labels = np.array([0] * 20 + [1] * 3)
    plan = make_fold_plan(labels, 5, seed=3)
    rare_folds = plan.assignment[labels == 1]
    assert len(set(rare_folds.tolist())) == 3


def test_fold_plan_determinism_and_validation():
    labels = np.array([0, 0, 1, 1, 0, 1, 0, 1])
    a = make_fold_plan(labels, 4, seed=9)
    b = make_fold_plan(labels, 4, seed=9)
    assert np.array_equal(a.assignment, b.assignment)
    c = make_fold_plan(labels, 4, seed=10)
    assert not np.array_equal(a.assignment, c.assignment)
    with pytest.raises(ValueError):
        make_fold_plan(labels, 1, seed=0)
    with pytest.raises(ValueError):
        make_fold_plan(labels, 9, seed=0)


# -- clocks ------------------------------------------------------------------------

def test_fake_clock_step():
    clk = FakeClock(step=0.5)
    assert [clk.now() for _ in range(4)] == [0.0, 0.5, 1.0, 1.5]


def test_fake_clock_scripted():
    clk = FakeClock(step=1.0, advances=[0.25, 0.75])
    assert clk.now() == 0.0
    assert clk.now() == 0.25
    assert clk.now() == 1.0   # script exhausted, falls back to step
    assert clk.now() == 2.0


def test_system_clock_monotone():
    clk = SystemClock()
    a = clk.now()
    b = clk.now()
    assert b >= a


# -- cache -------------------------------------------------------------------------

def test_cache_single_fit_per_key():
    cache = EvaluationCache()
    calls = []

    def compute():
        calls.append(1)
        return EvaluationRecord(fitness=0.5, eval_time=1.0, failed=False, classifier="x")

    r1, c1 = cache.get_or_compute("k", compute)
    r2, c2 = cache.get_or_compute("k", compute)
    assert (c1, c2) == (False, True)
    assert r1 == r2
    assert len(calls) == 1
    assert "k" in cache and len(cache) == 1
    assert cache.lookup("k") == r1
    assert cache.lookup("other") is None


def test_cache_thread_safety():
    cache = EvaluationCache()
    calls = []
    gate = threading.Event()

    def compute():
        gate.wait(1.0)
        calls.append(1)
        return EvaluationRecord(fitness=0.1, eval_time=0.1, failed=False, classifier="x")

    results = []

    def worker():
        results.append(cache.get_or_compute("shared", compute))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    gate.set()
    for t in threads:
        t.join()
    assert len(calls) == 1
    assert sum(1 for _, cached in results if not cached) == 1


# -- evaluate ----------------------------------------------------------------------

def test_evaluate_two_clock_reads_per_fresh_eval(blobs2):
    plan = make_fold_plan(blobs2.labels, 5, seed=0)
    cache = EvaluationCache()
    clock = FakeClock(step=1.0)
    wf = parse_workflow_key("gaussianNB()")
    record, cached = evaluate(wf, blobs2, plan, cache, clock, seed=0)
    assert not cached
    assert record.eval_time == 1.0           # exactly two reads: t1 - t0 = step
    record2, cached2 = evaluate(wf, blobs2, plan, cache, clock, seed=0)
    assert cached2 and record2 == record
    assert clock._t == 2.0                   # cached call never touched the clock


def test_evaluate_gaussian_nb_fitness(blobs2):
    """Separable blobs: CV fitness must be high, and equal to an independent
    NB oracle run over the same folds."""
    plan = make_fold_plan(blobs2.labels, 5, seed=1)
    cache = EvaluationCache()
    wf = parse_workflow_key("gaussianNB()")
    record, _ = evaluate(wf, blobs2, plan, cache, FakeClock(), seed=1)
    assert record.fitness >= 0.95
    assert not record.failed
    assert record.classifier == "gaussianNB"

    # oracle: plain Gaussian NB with the standard variance floor
    X, y = blobs2.features, blobs2.labels
    preds = np.empty_like(y)
    for fold in range(plan.k):
        tr = plan.train_mask(fold)
        te = plan.test_mask(fold)
        scores = []
        for c in (0, 1):
            Xc = X[tr & (y == c)]
            mu, var = Xc.mean(axis=0), Xc.var(axis=0)
            var = var + 1e-9 * X[tr].var(axis=0).max()
            log_like = -0.5 * (
                np.log(2 * np.pi * var) + (X[te] - mu) ** 2 / var
            ).sum(axis=1)
            prior = np.log(Xc.shape[0] / tr.sum())
            scores.append(prior + log_like)
        preds[te] = np.argmax(np.stack(scores, axis=1), axis=1)
    assert abs(record.fitness - balanced_accuracy(y, preds)) < 1e-9


def test_evaluate_failure_maps_to_zero():
    col = np.array([1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0])
    X = np.column_stack([col, col])
    y = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    ds = make_dataset(X, y)
    plan = make_fold_plan(y, 2, seed=0)
    record, _ = evaluate(
        parse_workflow_key("lda()"), ds, plan, EvaluationCache(), FakeClock(), seed=0
    )
    assert record.failed and record.fitness == 0.0
    assert record.eval_time > 0.0            # failure time still measured


def test_evaluation_rng_determinism():
    a = evaluation_rng(3, "kNN(n_neighbors=1,weights=uniform)")
    b = evaluation_rng(3, "kNN(n_neighbors=1,weights=uniform)")
    c = evaluation_rng(4, "kNN(n_neighbors=1,weights=uniform)")
    d = evaluation_rng(3, "gaussianNB()")
    base = a.integers(0, 2 ** 32, size=5)
    assert np.array_equal(base, b.integers(0, 2 ** 32, size=5))
    assert not np.array_equal(base, c.integers(0, 2 ** 32, size=5))
    assert not np.array_equal(base, d.integers(0, 2 ** 32, size=5))


def test_evaluate_deterministic_across_caches(blobs3):
    wf = parse_workflow_key(
        "pca(n_components=3)|mlpClassifier(activation=relu,hidden_layer_size=10)"
    )
    plan = make_fold_plan(blobs3.labels, 3, seed=5)
    r1, _ = evaluate(wf, blobs3, plan, EvaluationCache(), FakeClock(), seed=5)
    r2, _ = evaluate(wf, blobs3, plan, EvaluationCache(), FakeClock(), seed=5)
    assert r1.fitness == r2.fitness
