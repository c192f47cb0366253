"""Derivation trees and the three genetic operators.

Individuals are grammar derivation trees; the workflow is decoded from the
tree, so crossover and mutation can only ever produce valid workflows.
"""

import numpy as np

from evoflow.evaluation import EvaluationRecord
from evoflow.grammar import default_grammar
from evoflow.search import (
    Individual,
    crossover,
    mutate,
    random_individual,
    tournament_select,
    tree_valid,
)

g = default_grammar()
rng = np.random.default_rng(42)

print("five random individuals (derivation budget 13):")
population = [random_individual(g, 13, rng) for _ in range(5)]
for ind in population:
    print(f"  [{ind.tree.derivation_count:>2} derivations] {ind.workflow.canonical_key}")

a, b = population[0], population[1]
child_a, child_b = crossover(a, b, g, 13, rng)
print("\ncrossover swaps subtrees under a shared non-terminal:")
print(f"  parent a: {a.workflow.canonical_key}")
print(f"  parent b: {b.workflow.canonical_key}")
print(f"  child a:  {child_a.workflow.canonical_key}")
print(f"  child b:  {child_b.workflow.canonical_key}")
assert tree_valid(child_a.tree, g, 13) and tree_valid(child_b.tree, g, 13)

# Mutation regrows one random branch; regrowing the same thing is possible,
# so keep drawing until the key actually changes.
neutral = 0
while True:
    mutant = mutate(a, g, 13, rng)
    if mutant.workflow.canonical_key != a.workflow.canonical_key:
        break
    neutral += 1
print(f"\nmutation regrows one branch ({neutral} neutral draws first):"
      f"\n  before: {a.workflow.canonical_key}"
      f"\n  after:  {mutant.workflow.canonical_key}")

# Selection prefers higher fitness, then lower evaluation time.
def with_record(ind, fitness, eval_time):
    rec = EvaluationRecord(fitness=fitness, eval_time=eval_time, failed=False,
                           classifier=ind.workflow.steps[-1].algorithm)
    return Individual(tree=ind.tree, workflow=ind.workflow, evaluation=rec)

scored = [
    with_record(population[0], 0.90, 2.0),
    with_record(population[1], 0.90, 0.5),
    with_record(population[2], 0.60, 0.1),
]
wins = {ind.workflow.canonical_key: 0 for ind in scored}
for _ in range(1000):
    wins[tournament_select(scored, rng).workflow.canonical_key] += 1
print("\n1000 binary tournaments (fitness first, time breaks ties):")
for key, n in sorted(wins.items(), key=lambda kv: -kv[1]):
    print(f"  {n:>4}  {key}")
