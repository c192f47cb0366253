"""How a workflow becomes a fitness number.

Stratified folds, balanced accuracy, a clock around the whole CV loop, and a
cache so the engine never pays for the same canonical key twice.
"""

import numpy as np

from evoflow.datasets import make_blobs
from evoflow.evaluation import (
    EvaluationCache,
    FakeClock,
    balanced_accuracy,
    evaluate,
    make_fold_plan,
)
from evoflow.interaction import parse_workflow_key

# Balanced accuracy averages per-class recall, so a majority-class dump scores
# at chance level no matter how skewed the data is.
y_true = np.array([0] * 90 + [1] * 10)
always_zero = np.zeros(100, dtype=int)
plain = float(np.mean(y_true == always_zero))
print(f"90/10 data, constant predictor: plain accuracy {plain:.2f}, "
      f"balanced accuracy {balanced_accuracy(y_true, always_zero):.2f}")

labels = np.array([0] * 13 + [1] * 7 + [2] * 3)
plan = make_fold_plan(labels, k=5, seed=0)
print("\nstratified 5-fold plan on counts [13, 7, 3]:")
for c in (0, 1, 2):
    per_fold = np.bincount(plan.assignment[labels == c], minlength=5).tolist()
    print(f"  class {c}: {per_fold} per fold (skew <= 1)")

# evaluate() reads the clock exactly twice, so a scripted clock makes the
# reported evaluation time exact and the whole record reproducible.
ds = make_blobs([50, 50], n_features=4, seed=7, spread=0.5, radius=4.0)
cache = EvaluationCache()
clock = FakeClock(step=0.25)
workflow = parse_workflow_key("standardScaler()|kNN(n_neighbors=3,weights=uniform)")
plan = make_fold_plan(ds.labels, k=5, seed=0)

record, cached = evaluate(workflow, ds, plan, cache, clock, seed=0)
print(f"\nfresh evaluation: fitness {record.fitness:.3f}, "
      f"eval_time {record.eval_time} (one clock step), cached={cached}")

again, cached = evaluate(workflow, ds, plan, cache, clock, seed=0)
print(f"second call: cached={cached}, same record {record is again}, "
      f"fits performed {cache.fit_count}")
