"""A plain non-interactive run, start to finish.

Thirty individuals, fifteen generations, no pauses. Takes a few seconds; the
archive is the best individual ever evaluated, by (fitness, then time).
"""

from evoflow.cli import load_dataset
from evoflow.engine import EngineConfig, start
from evoflow.grammar import default_grammar

train, test = load_dataset("glass")
print(f"glass: {train.n_samples} train rows, {test.n_samples} held out, "
      f"{train.n_classes} classes")

config = EngineConfig(population_size=30, max_generations=15,
                      max_interactions=0, seed=4)
session = start(config, default_grammar(), train)
result = session.run()

print(f"\narchive (found at generation {result.archive_generation}):")
print(f"  {result.archive.workflow.canonical_key}")
print(f"  fitness {result.archive.evaluation.fitness:.4f}, "
      f"eval time {result.archive.evaluation.eval_time * 1000:.1f} ms")

print(f"\nfresh evaluations: {len(result.eval_log)} "
      f"(cache absorbed {config.population_size * (config.max_generations + 1) - len(result.eval_log)} repeats)")
print(f"cumulative evaluation time: {result.cumulative_eval_time:.2f} s")

print("\ncumulative eval time by generation (every third):")
for gen in range(0, len(result.timeline), 3):
    bar = "#" * int(40 * result.timeline[gen] / result.timeline[-1]) if result.timeline[-1] else ""
    print(f"  gen {gen:>2} {result.timeline[gen]:7.2f}s {bar}")
