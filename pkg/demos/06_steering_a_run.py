"""Steering a run by hand: thresholds, candidates, removals.

Runs the same seed twice, once untouched and once steered at generation 5,
then compares what the steering bought. Real wall-clock timing, so numbers
vary between machines; the shape of the story does not.
"""

from evoflow.cli import load_dataset
from evoflow.engine import Decision, EngineConfig, Feedback, Status, start
from evoflow.grammar import default_grammar
from evoflow.interaction import Thresholds
from evoflow.simusers import speedup

train, _ = load_dataset("glass")
config = EngineConfig(population_size=25, max_generations=14,
                      max_interactions=1, first_interaction_generation=5, seed=2)
grammar = default_grammar()

baseline = start(EngineConfig(**{**config.to_dict(), "max_interactions": 0}),
                 grammar, train)
base_result = baseline.run()

session = start(config, grammar, train)
while session.status is Status.RUNNING:
    session.step_generation()

snap = session.snapshot()
fitnesses = sorted(e.fitness for e in snap.individuals)
times = sorted(e.eval_time for e in snap.individuals)
print(f"paused at generation 5 with {len(snap.individuals)} fresh evaluations")
print(f"fitness range {fitnesses[0]:.3f}..{fitnesses[-1]:.3f}, "
      f"eval time range {times[0] * 1000:.1f}..{times[-1] * 1000:.1f} ms")

# Demand decent accuracy at below-median cost and see what only the laggards use.
th = Thresholds(t_acc=0.75 * fitnesses[-1], t_time=times[len(times) // 2])
detailed = snap.with_thresholds(th, session.grammar)
algorithms, values = detailed.candidates
print(f"\nthresholds t_acc={th.t_acc:.3f}, t_time={th.t_time * 1000:.1f} ms split the "
      f"snapshot {len(detailed.partition.r_best)} best / {len(detailed.partition.r_worst)} worst")
print(f"removal candidates: {list(algorithms)} + {[v.render() for v in values]}")

removals = tuple(algorithms)[:3]
session.apply_feedback(Feedback(
    decision=Decision.continue_for(9),
    remove_algorithms=removals,
    thresholds_used=th,
))
print(f"removed {list(removals)}; grammar now has "
      f"{len(session.grammar.algorithms())} algorithms")

while session.status is not Status.FINISHED:
    session.step_generation()
result = session.result()

print(f"\nbaseline archive: {base_result.archive.evaluation.fitness:.4f}  "
      f"{base_result.archive.workflow.canonical_key}")
print(f"steered archive:  {result.archive.evaluation.fitness:.4f}  "
      f"{result.archive.workflow.canonical_key}")
ratio = speedup(result.timeline, base_result.timeline,
                config.first_interaction_generation)
print(f"post-interaction evaluation-time speedup vs baseline: {ratio:.2f}x")
