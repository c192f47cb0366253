"""The session state machine: generations, archive, pauses, grammar swaps.

A session owns the population, the evaluation cache, and the current grammar.
It consumes randomness only for the initial population, breeding, and
replacement individuals after pruning, so a run whose every interaction
removes nothing is stream-identical to a non-interactive run with the same
seed.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .evaluation import (
    Clock,
    EvaluationCache,
    SystemClock,
    evaluate,
    make_fold_plan,
)
from .grammar import (
    Grammar,
    GrammarError,
    HyperparamValueId,
    remove_algorithm,
    remove_hyperparameter_value,
    validate,
)
from .interaction import InteractionSnapshot, Thresholds, build_snapshot
from .mlcatalog import Dataset
from .search import (
    Individual,
    crossover,
    mutate,
    random_individual,
    replace,
    tournament_select,
    tree_valid,
)

__all__ = [
    "EngineError",
    "WrongStatusError",
    "FeedbackRejected",
    "Status",
    "EngineConfig",
    "Decision",
    "Feedback",
    "EvalLogEntry",
    "RunResult",
    "Session",
    "start",
]


class EngineError(Exception):
    """Base class for session failures."""


class WrongStatusError(EngineError):
    """An operation was called in a status that does not allow it."""


class FeedbackRejected(EngineError):
    """The removal batch was illegal; the session is unchanged."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(violations))


class Status(str, enum.Enum):
    RUNNING = "Running"
    AWAITING_FEEDBACK = "AwaitingFeedback"
    FINISHED = "Finished"


@dataclass(frozen=True)
class EngineConfig:
    population_size: int = 100
    crossover_prob: float = 0.8
    mutation_prob: float = 0.2
    max_derivations: int = 13
    max_generations: int = 50
    max_interactions: int = 10
    first_interaction_generation: int = 15
    cv_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover_prob must be in [0, 1]")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must be in [0, 1]")
        if self.max_derivations < 1:
            raise ValueError("max_derivations must be positive")
        if self.max_generations < 1:
            raise ValueError("max_generations must be positive")
        if self.max_interactions < 0:
            raise ValueError("max_interactions must be non-negative")
        if self.first_interaction_generation < 1:
            raise ValueError("first_interaction_generation must be positive")
        if (
            self.max_interactions > 0
            and self.first_interaction_generation > self.max_generations
        ):
            raise ValueError(
                "first_interaction_generation must lie in [1, max_generations]"
            )
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be at least 2")

    def to_dict(self) -> dict:
        return {
            "population_size": self.population_size,
            "crossover_prob": self.crossover_prob,
            "mutation_prob": self.mutation_prob,
            "max_derivations": self.max_derivations,
            "max_generations": self.max_generations,
            "max_interactions": self.max_interactions,
            "first_interaction_generation": self.first_interaction_generation,
            "cv_folds": self.cv_folds,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**data)


@dataclass(frozen=True)
class Decision:
    """Continue for a given number of generations, or stop the run."""

    kind: str                                  # "Continue" or "Stop"
    generations_until_next: int | None = None

    def __post_init__(self):
        if self.kind == "Continue":
            if self.generations_until_next is None or self.generations_until_next < 1:
                raise ValueError("Continue requires generations_until_next >= 1")
        elif self.kind == "Stop":
            if self.generations_until_next is not None:
                raise ValueError("Stop takes no generation count")
        else:
            raise ValueError(f"unknown decision kind {self.kind!r}")

    @classmethod
    def continue_for(cls, generations: int) -> "Decision":
        return cls(kind="Continue", generations_until_next=generations)

    @classmethod
    def stop(cls) -> "Decision":
        return cls(kind="Stop")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "generations_until_next": self.generations_until_next}


@dataclass(frozen=True)
class Feedback:
    """One interaction's worth of user input."""

    decision: Decision
    remove_algorithms: tuple[str, ...] = ()
    remove_hyperparameter_values: tuple[HyperparamValueId, ...] = ()
    thresholds_used: Thresholds = field(default_factory=Thresholds)


@dataclass(frozen=True)
class EvalLogEntry:
    """One fresh (non-cached) evaluation."""

    generation: int
    individual: Individual


@dataclass(frozen=True)
class RunResult:
    archive: Individual
    archive_generation: int
    eval_log: tuple[EvalLogEntry, ...]
    cumulative_eval_time: float
    timeline: tuple[float, ...]
    generations: int
    interactions_used: int


class Session:
    """Single-writer state machine; construct via :func:`start`.

    Exactly one actor may advance a session.  Snapshots handed out at pauses
    are immutable and safe to share.
    """

    def __init__(
        self,
        config: EngineConfig,
        grammar: Grammar,
        dataset: Dataset,
        *,
        clock: Clock | None = None,
        log_sink=None,
    ):
        problems = validate(grammar)
        if problems:
            raise GrammarError("; ".join(problems))
        self.config = config
        self.grammar = grammar
        self.dataset = dataset
        self.population: list[Individual] = []
        self.archive: Individual | None = None
        self.archive_generation = 0
        self.generation = 0
        self.interactions_used = 0
        self.next_interaction_generation: int | None = (
            config.first_interaction_generation if config.max_interactions > 0 else None
        )
        self.eval_log: list[EvalLogEntry] = []
        self.cumulative_eval_time = 0.0
        self.timeline: list[float] = []
        self.status = Status.RUNNING
        self.cache = EvaluationCache()
        self._clock = clock if clock is not None else SystemClock()
        self._log_sink = log_sink
        self._rng = np.random.default_rng(config.seed)
        self._plan = make_fold_plan(dataset.labels, config.cv_folds, config.seed)
        self._window_start = 0
        self._archive_key: tuple[float, float] | None = None
        self._pause_started = 0.0
        self._snapshot_served_at: float | None = None
        self._start()

    # -- lifecycle ---------------------------------------------------------

    def _start(self) -> None:
        cfg = self.config
        for _ in range(cfg.population_size):
            self.population.append(
                random_individual(self.grammar, cfg.max_derivations, self._rng)
            )
        for ind in self.population:
            self._evaluate(ind, generation=0)
        self.timeline.append(self.cumulative_eval_time)

    def step_generation(self) -> None:
        """Breed, evaluate, and install the next generation."""
        if self.status is not Status.RUNNING:
            raise WrongStatusError(f"cannot step in status {self.status.value}")
        cfg = self.config
        g = self.grammar
        rng = self._rng
        parents = self.population
        offspring: list[Individual] = []
        while len(offspring) < cfg.population_size:
            p1 = tournament_select(parents, rng)
            p2 = tournament_select(parents, rng)
            if rng.random() < cfg.crossover_prob:
                c1, c2 = crossover(p1, p2, g, cfg.max_derivations, rng)
            else:
                c1 = Individual(tree=p1.tree, workflow=p1.workflow)
                c2 = Individual(tree=p2.tree, workflow=p2.workflow)
            if rng.random() < cfg.mutation_prob:
                c1 = mutate(c1, g, cfg.max_derivations, rng)
            if rng.random() < cfg.mutation_prob:
                c2 = mutate(c2, g, cfg.max_derivations, rng)
            offspring.append(c1)
            if len(offspring) < cfg.population_size:
                offspring.append(c2)
        new_generation = self.generation + 1
        for child in offspring:
            self._evaluate(child, generation=new_generation)
        self.population = replace(parents, offspring)
        self.generation = new_generation
        self.timeline.append(self.cumulative_eval_time)
        self._settle_status()

    def _settle_status(self) -> None:
        cfg = self.config
        self.status = Status.RUNNING
        if (
            self.next_interaction_generation is not None
            and self.generation == self.next_interaction_generation
            and self.interactions_used < cfg.max_interactions
        ):
            self.status = Status.AWAITING_FEEDBACK
            self._pause_started = time.monotonic()
            self._snapshot_served_at = None
        if self.generation >= cfg.max_generations:
            self.status = Status.FINISHED

    def snapshot(self, baseline_timeline=None) -> InteractionSnapshot:
        """The pause-point view; only legal while awaiting feedback."""
        if self.status is not Status.AWAITING_FEEDBACK:
            raise WrongStatusError(f"no snapshot in status {self.status.value}")
        snap = build_snapshot(self, baseline_timeline)
        self.mark_snapshot_served()
        return snap

    def mark_snapshot_served(self) -> None:
        """Start the interaction wall-time clock (idempotent per pause)."""
        if self._snapshot_served_at is None:
            self._snapshot_served_at = time.monotonic()

    def window(self) -> list[EvalLogEntry]:
        """Evaluations since the previous interaction (or since the start)."""
        return self.eval_log[self._window_start:]

    def apply_feedback(self, feedback: Feedback) -> None:
        """Prune the grammar, repair the population, and reschedule.

        The removal batch is all-or-nothing: any illegal entry rejects the
        whole batch with the violation list and leaves the session unchanged.
        """
        if self.status is not Status.AWAITING_FEEDBACK:
            raise WrongStatusError(f"cannot apply feedback in status {self.status.value}")
        cfg = self.config
        pruned = self.grammar
        violations: list[str] = []
        for alg in feedback.remove_algorithms:
            try:
                pruned = remove_algorithm(pruned, alg)
            except GrammarError as exc:
                violations.extend(getattr(exc, "violations", None) or [str(exc)])
        for vid in feedback.remove_hyperparameter_values:
            try:
                pruned = remove_hyperparameter_value(pruned, vid)
            except GrammarError as exc:
                violations.extend(getattr(exc, "violations", None) or [str(exc)])
        if violations:
            raise FeedbackRejected(violations)

        wall = time.monotonic() - (self._snapshot_served_at or self._pause_started)
        next_window_start = len(self.eval_log)
        if pruned is not self.grammar:
            self.grammar = pruned
            survivors = [
                ind
                for ind in self.population
                if tree_valid(ind.tree, pruned, cfg.max_derivations)
            ]
            replacements = [
                random_individual(pruned, cfg.max_derivations, self._rng)
                for _ in range(cfg.population_size - len(survivors))
            ]
            for ind in replacements:
                self._evaluate(ind, generation=self.generation)
            self.population = survivors + replacements
        self.interactions_used += 1
        self._window_start = next_window_start
        self._emit(
            {
                "generation": self.generation,
                "thresholds": feedback.thresholds_used.to_dict(),
                "removed_algorithms": list(feedback.remove_algorithms),
                "removed_hyperparameter_values": [
                    v.render() if isinstance(v, HyperparamValueId) else str(v)
                    for v in feedback.remove_hyperparameter_values
                ],
                "decision": feedback.decision.to_dict(),
                "wall_time_spent_seconds": wall,
            }
        )
        if feedback.decision.kind == "Stop":
            self.next_interaction_generation = None
            self.status = Status.FINISHED
        else:
            self.next_interaction_generation = min(
                self.generation + feedback.decision.generations_until_next,
                cfg.max_generations,
            )
            self.status = Status.RUNNING

    def result(self) -> RunResult:
        if self.status is not Status.FINISHED:
            raise WrongStatusError(f"no result in status {self.status.value}")
        return RunResult(
            archive=self.archive,
            archive_generation=self.archive_generation,
            eval_log=tuple(self.eval_log),
            cumulative_eval_time=self.cumulative_eval_time,
            timeline=tuple(self.timeline),
            generations=self.generation,
            interactions_used=self.interactions_used,
        )

    def run(self, feedback_provider=None, baseline_timeline=None) -> RunResult:
        """Drive the session to completion.

        ``feedback_provider(snapshot)`` is called at every pause and must
        return a :class:`Feedback`.  Without a provider, pauses are an error;
        configure ``max_interactions=0`` for non-interactive runs.
        """
        while self.status is not Status.FINISHED:
            if self.status is Status.RUNNING:
                self.step_generation()
            else:
                if feedback_provider is None:
                    raise EngineError("session awaits feedback but no provider was given")
                self.apply_feedback(feedback_provider(self.snapshot(baseline_timeline)))
        return self.result()

    # -- internals ---------------------------------------------------------

    def _evaluate(self, ind: Individual, generation: int) -> None:
        record, cached = evaluate(
            ind.workflow, self.dataset, self._plan, self.cache, self._clock, self.config.seed
        )
        ind.evaluation = record
        if not cached:
            self.eval_log.append(EvalLogEntry(generation=generation, individual=ind))
            self.cumulative_eval_time += record.eval_time
        key = (-record.fitness, record.eval_time)
        if self._archive_key is None or key < self._archive_key:
            self.archive = ind
            self.archive_generation = generation
            self._archive_key = key
        self._emit(
            {
                "generation": generation,
                "canonical_key": ind.workflow.canonical_key,
                "fitness": record.fitness,
                "eval_time": record.eval_time,
                "classifier": record.classifier,
                "cached": cached,
            }
        )

    def _emit(self, record: dict) -> None:
        if self._log_sink is not None:
            self._log_sink(record)


def start(
    config: EngineConfig,
    grammar: Grammar,
    dataset: Dataset,
    *,
    clock: Clock | None = None,
    log_sink=None,
) -> Session:
    """Create a session with its initial population evaluated."""
    return Session(config, grammar, dataset, clock=clock, log_sink=log_sink)
