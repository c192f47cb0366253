"""Tour of the grammar layer: parse, inspect, prune, render.

The grammar is the search space. Everything the engine can build is a
derivation of it, so removing a symbol here removes a whole region of
workflow space there.
"""

from evoflow.grammar import (
    HyperparamValueId,
    IllegalRemovalError,
    default_grammar,
    remove_algorithm,
    remove_hyperparameter_value,
    removable_symbols,
    render,
    validate,
)

g = default_grammar()
blocks = g.algorithms()
print(f"default grammar: {len(blocks)} algorithms "
      f"({len(g.preprocessor_ids())} preprocessors, {len(g.classifier_ids())} classifiers)")
print(f"structurally sound: {validate(g) == []}")

knn = blocks["kNN"]
print("\nkNN hyperparameters:")
for hp in knn.hyperparams:
    if hp.kind == "value":
        detail = f"cat{hp.values}"
    else:
        kind = "int" if hp.integer else "float"
        detail = f"{kind}({hp.lo:g}, {hp.hi:g})"
    print(f"  {hp.symbol}: {detail}")

# Pruning returns a new grammar; the original is never touched.
smaller = remove_algorithm(g, "decisionTree")
print(f"\nafter removing decisionTree: {len(smaller.algorithms())} algorithms")
print(f"decisionTree productions gone: "
      f"{not any('decisionTree' in nt for nt in smaller.productions)}")

# Categorical values are removable one by one, down to the last.
smaller = remove_hyperparameter_value(smaller, HyperparamValueId.parse("kNN::weights=uniform"))
weights = smaller.algorithms()["kNN"].hyperparam("weights")
print(f"kNN::weights after pruning uniform: {weights.values}")

try:
    remove_hyperparameter_value(smaller, "kNN::weights=distance")
except IllegalRemovalError as err:
    print(f"removing the last value is refused: {err}")

algs, values = removable_symbols(smaller)
print(f"\nstill removable: {len(algs)} algorithms, {len(values)} categorical values")

# The whole grammar round-trips through its text form.
assert default_grammar() == g
print(f"\nrender() emits the file format back ({len(render(smaller).splitlines())} lines)")
