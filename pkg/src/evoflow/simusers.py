"""Simulated user profiles: threshold rules plus an algorithm-removal policy.

A profile scales the snapshot's mean fitness and median evaluation time into
thresholds, asks for the removal candidates, and removes either the single
most frequent worst-region algorithm or up to a third of the original
catalog, plus every candidate hyperparameter value.  Profiles are pure
decision rules, so sweeps over them parallelize at the run level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace as _dc_replace

import numpy as np

from .engine import Decision, EngineConfig, Feedback, RunResult, Status, start
from .evaluation import Clock
from .grammar import (
    Grammar,
    GrammarError,
    HyperparamValueId,
    remove_algorithm,
    remove_hyperparameter_value,
)
from .interaction import (
    InteractionSnapshot,
    Thresholds,
    partition,
    removal_candidates,
    workflow_symbols,
)
from .mlcatalog import Dataset

__all__ = [
    "MOST_FREQUENT_ONE",
    "UP_TO_ONE_THIRD",
    "Profile",
    "profile_suite",
    "parse_profile_id",
    "compute_thresholds",
    "decide",
    "SimulationResult",
    "run_baseline",
    "run_simulated",
    "default_schedule",
    "speedup",
]

MOST_FREQUENT_ONE = "MostFrequentOne"
UP_TO_ONE_THIRD = "UpToOneThird"

_FITNESS_CONSTANTS = (0.0, 0.8, 0.9)
_TIME_CONSTANTS = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class Profile:
    """One simulated user: threshold constants and a removal strategy."""

    fitness_constant: float
    time_constant: float
    algorithm_strategy: str

    def __post_init__(self):
        if self.fitness_constant not in _FITNESS_CONSTANTS:
            raise ValueError(f"fitness_constant must be one of {_FITNESS_CONSTANTS}")
        if self.time_constant not in _TIME_CONSTANTS:
            raise ValueError(f"time_constant must be one of {_TIME_CONSTANTS}")
        if self.fitness_constant == 0.0 and self.time_constant == 0.0:
            raise ValueError("at least one threshold constant must be non-zero")
        if self.algorithm_strategy not in (MOST_FREQUENT_ONE, UP_TO_ONE_THIRD):
            raise ValueError(f"unknown strategy {self.algorithm_strategy!r}")

    @property
    def id(self) -> str:
        parts = []
        if self.fitness_constant > 0.0:
            parts.append(f"f{_fmt(self.fitness_constant)}")
        if self.time_constant > 0.0:
            parts.append(f"t{_fmt(self.time_constant)}")
        parts.append("aOne" if self.algorithm_strategy == MOST_FREQUENT_ONE else "aThird")
        return "_".join(parts)


def _fmt(v: float) -> str:
    return str(int(v)) if v == int(v) else f"{v:g}"


def profile_suite() -> tuple[Profile, ...]:
    """All 16 profiles: 8 legal threshold pairs times 2 strategies."""
    out = []
    for x in _FITNESS_CONSTANTS:
        for y in _TIME_CONSTANTS:
            if x == 0.0 and y == 0.0:
                continue
            for z in (MOST_FREQUENT_ONE, UP_TO_ONE_THIRD):
                out.append(Profile(x, y, z))
    return tuple(out)


def parse_profile_id(text: str) -> Profile:
    """Inverse of ``Profile.id``; also accepts numeric strategy suffixes
    (``a1`` for the single most frequent, any other ``a<n>`` for the third)."""
    x = 0.0
    y = 0.0
    strategy = None
    for token in text.split("_"):
        if token == "aOne" or token == "a1":
            strategy = MOST_FREQUENT_ONE
        elif token == "aThird" or (token.startswith("a") and token[1:].isdigit()):
            strategy = UP_TO_ONE_THIRD
        elif token.startswith("f"):
            x = float(token[1:])
        elif token.startswith("t"):
            y = float(token[1:])
        else:
            raise ValueError(f"unknown profile token {token!r}")
    if strategy is None:
        raise ValueError(f"profile id {text!r} names no strategy")
    return Profile(x, y, strategy)


# ---------------------------------------------------------------------------
# Decisions.

def compute_thresholds(p: Profile, snapshot: InteractionSnapshot) -> Thresholds:
    """Scale the snapshot's mean fitness and median eval time by the profile
    constants; a zero constant disables that axis.  Errors on empty snapshots."""
    if not snapshot.individuals:
        raise ValueError("cannot compute thresholds over an empty snapshot")
    t_acc = None
    t_time = None
    if p.fitness_constant > 0.0:
        mean_fitness = float(np.mean([e.fitness for e in snapshot.individuals]))
        t_acc = p.fitness_constant * mean_fitness
    if p.time_constant > 0.0:
        median_time = float(np.median([e.eval_time for e in snapshot.individuals]))
        t_time = p.time_constant * median_time
    return Thresholds(t_acc=t_acc, t_time=t_time)


def decide(
    p: Profile,
    snapshot: InteractionSnapshot,
    g: Grammar,
    schedule_remaining: tuple[int, ...],
    catalog_size: int | None = None,
) -> Feedback:
    """Turn a snapshot into a legal feedback batch.

    ``catalog_size`` is the algorithm count of the grammar as originally
    configured; the one-third cap counts against it, not the pruned grammar.
    Every removal is checked in list order against a working copy, so the
    emitted batch always passes the engine's atomic validation.
    """
    decision = (
        Decision.continue_for(int(schedule_remaining[0]))
        if schedule_remaining
        else Decision.stop()
    )
    if not snapshot.individuals:
        return Feedback(decision=decision)
    th = compute_thresholds(p, snapshot)
    part = partition(snapshot, th)
    algs, values = removal_candidates(snapshot, part, g)

    counts = {a: 0 for a in algs}
    for e in part.r_worst:
        for sym in workflow_symbols(e.workflow, g):
            if sym in counts:
                counts[sym] += 1
    ranked = sorted(algs, key=lambda a: (-counts[a], a))
    if p.algorithm_strategy == MOST_FREQUENT_ONE:
        chosen_algs = ranked[:1]
    else:
        size = catalog_size if catalog_size is not None else len(g.algorithms())
        chosen_algs = ranked[: math.ceil(size / 3)]
    chosen_values = sorted(values, key=HyperparamValueId.render)

    working = g
    legal_algs: list[str] = []
    legal_values: list[HyperparamValueId] = []
    for a in chosen_algs:
        try:
            working = remove_algorithm(working, a)
        except GrammarError:
            continue
        legal_algs.append(a)
    for v in chosen_values:
        try:
            working = remove_hyperparameter_value(working, v)
        except GrammarError:
            continue
        legal_values.append(v)
    return Feedback(
        decision=decision,
        remove_algorithms=tuple(legal_algs),
        remove_hyperparameter_values=tuple(legal_values),
        thresholds_used=th,
    )


# ---------------------------------------------------------------------------
# Whole-run drivers.

@dataclass(frozen=True)
class SimulationResult:
    profile_id: str            # "baseline" for non-interactive runs
    dataset: str
    seed: int
    result: RunResult
    first_interaction_generation: int


def default_schedule(config: EngineConfig) -> tuple[int, ...]:
    """Gaps between interactions after the first, preserving the shipped
    first/second/final split (15/15/20 of 50 and scaled variants)."""
    n = config.first_interaction_generation
    gaps = []
    if config.max_generations - 2 * n >= 1:
        gaps = [n, config.max_generations - 2 * n]
    elif config.max_generations - n >= 1:
        gaps = [config.max_generations - n]
    return tuple(gaps)


def run_baseline(
    config: EngineConfig,
    grammar: Grammar,
    dataset: Dataset,
    seed: int | None = None,
    *,
    clock: Clock | None = None,
    log_sink=None,
) -> SimulationResult:
    """Non-interactive reference run."""
    cfg = _dc_replace(config, max_interactions=0, seed=config.seed if seed is None else seed)
    session = start(cfg, grammar, dataset, clock=clock, log_sink=log_sink)
    result = session.run()
    return SimulationResult(
        profile_id="baseline",
        dataset=dataset.name,
        seed=cfg.seed,
        result=result,
        first_interaction_generation=config.first_interaction_generation,
    )


def run_simulated(
    profile: Profile,
    config: EngineConfig,
    grammar: Grammar,
    dataset: Dataset,
    seed: int | None = None,
    *,
    schedule: tuple[int, ...] | None = None,
    clock: Clock | None = None,
    log_sink=None,
    baseline_timeline=None,
) -> SimulationResult:
    """Drive a session with the profile answering every pause.

    The first pause comes from the config; ``schedule`` lists the gaps the
    profile will request afterwards (defaulting to the shipped split).  The
    one-third cap is pinned to the catalog size at session start.
    """
    cfg = _dc_replace(config, seed=config.seed if seed is None else seed)
    if cfg.max_interactions == 0:
        raise ValueError("simulated runs need max_interactions > 0")
    remaining = list(default_schedule(cfg) if schedule is None else schedule)
    catalog_size = len(grammar.algorithms())
    session = start(cfg, grammar, dataset, clock=clock, log_sink=log_sink)
    while session.status is not Status.FINISHED:
        if session.status is Status.RUNNING:
            session.step_generation()
            continue
        snap = session.snapshot(baseline_timeline)
        feedback = decide(
            profile, snap, session.grammar, tuple(remaining), catalog_size=catalog_size
        )
        if remaining:
            remaining.pop(0)
        session.apply_feedback(feedback)
    return SimulationResult(
        profile_id=profile.id,
        dataset=dataset.name,
        seed=cfg.seed,
        result=session.result(),
        first_interaction_generation=cfg.first_interaction_generation,
    )


def speedup(
    timeline: tuple[float, ...] | list[float],
    baseline_timeline: tuple[float, ...] | list[float],
    window_start: int,
) -> float:
    """Baseline-over-run ratio of evaluation time after the first interaction.

    ``window_start`` is the first interaction generation; both series index
    cumulative evaluation time by generation (entry 0 is initialization).
    """
    if not 0 <= window_start < min(len(timeline), len(baseline_timeline)):
        raise ValueError("window_start outside both timelines")
    run_window = timeline[-1] - timeline[window_start]
    base_window = baseline_timeline[-1] - baseline_timeline[window_start]
    if run_window <= 0.0:
        raise ValueError("run window has no evaluation time")
    return base_window / run_window
