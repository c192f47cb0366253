"""The native algorithm catalog: fit a few workflows directly.

Every preprocessing step and classifier is a small numpy implementation with
the same seeded-rng discipline as the rest of the package, so a pipeline fit
is reproducible from (workflow key, dataset, seed).
"""

import numpy as np

from evoflow.datasets import make_blobs
from evoflow.evaluation import balanced_accuracy
from evoflow.interaction import parse_workflow_key
from evoflow.mlcatalog import AlgorithmFailure, fit_pipeline, predict_pipeline

ds = make_blobs([60, 40, 30], n_features=6, seed=9, spread=0.6, radius=4.0)
print(f"dataset: {ds.n_samples} rows, {ds.n_features} features, {ds.n_classes} classes")

KEYS = [
    "gaussianNB()",
    "standardScaler()|kNN(n_neighbors=5,weights=distance)",
    "pca(n_components=3)|decisionTree(criterion=gini,maxDepth=8)",
    "minMaxScaler()|mlpClassifier(activation=relu,hidden_layer_size=50)",
]
for key in KEYS:
    workflow = parse_workflow_key(key)
    fitted = fit_pipeline(workflow, ds, np.random.default_rng(0))
    predictions = predict_pipeline(fitted, ds.features)
    score = balanced_accuracy(ds.labels, predictions)
    print(f"  {score:.3f}  {key}")

# Failures carry the offending step instead of leaking numpy errors.
negative = make_blobs([40, 40], n_features=4, seed=1, radius=2.0)
try:
    fit_pipeline(parse_workflow_key("multinomialNB(alpha=1.0,fit_prior=true)"),
                 negative, np.random.default_rng(0))
except AlgorithmFailure as err:
    print(f"\nmultinomialNB on negative features -> AlgorithmFailure at "
          f"step {err.step!r}: {err}")

# Samplers rewrite the training rows only; at predict time they pass through.
imbalanced = make_blobs([100, 25], n_features=4, seed=3, radius=3.0)
fitted = fit_pipeline(
    parse_workflow_key("rus(sampling_strategy=majority)|gaussianNB()"),
    imbalanced, np.random.default_rng(0),
)
print(f"\nrandom undersampling balanced the fit "
      f"(original {np.bincount(imbalanced.labels).tolist()} rows) and still "
      f"predicts all {imbalanced.n_samples} rows at scoring time: "
      f"{len(predict_pipeline(fitted, imbalanced.features))}")
