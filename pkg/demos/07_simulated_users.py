"""Scripted user profiles: the whole suite, then one profile end to end.

A profile turns a snapshot into feedback mechanically: thresholds from
snapshot statistics, removals from the candidate list, and a fixed pause
schedule. Useful for experiments; also a decent template for writing your
own steering policy.
"""

from evoflow.cli import load_dataset
from evoflow.engine import EngineConfig
from evoflow.grammar import default_grammar
from evoflow.simusers import (
    default_schedule,
    parse_profile_id,
    profile_suite,
    run_baseline,
    run_simulated,
    speedup,
)

suite = profile_suite()
print(f"{len(suite)} profiles (threshold constants x removal strategy):")
for p in suite:
    acc = f"{p.fitness_constant} * mean fitness" if p.fitness_constant else "off"
    tim = f"{p.time_constant} * median eval time" if p.time_constant else "off"
    print(f"  {p.id:<22} t_acc = {acc}, t_time = {tim}")

config = EngineConfig(population_size=25, max_generations=12,
                      max_interactions=2, first_interaction_generation=4, seed=6)
print(f"\npause schedule for this config: first at generation "
      f"{config.first_interaction_generation}, then gaps {default_schedule(config)}")

train, _ = load_dataset("glass")
grammar = default_grammar()
profile = parse_profile_id("f0.9_t0.5_aThird")

base = run_baseline(config, grammar, train)
sim = run_simulated(profile, config, grammar, train)

print(f"\nbaseline: fitness {base.result.archive.evaluation.fitness:.4f}, "
      f"{base.result.cumulative_eval_time:.2f}s of evaluation")
print(f"{profile.id}: fitness {sim.result.archive.evaluation.fitness:.4f}, "
      f"{sim.result.cumulative_eval_time:.2f}s of evaluation, "
      f"{sim.result.interactions_used} interactions")
ratio = speedup(sim.result.timeline, base.result.timeline,
                config.first_interaction_generation)
print(f"post-interaction speedup: {ratio:.2f}x")
print("(single runs are noisy either way; time savings are a statistical claim "
      "over seeds, and replacements for removed algorithms cost fresh "
      "evaluations right after a pause)")
