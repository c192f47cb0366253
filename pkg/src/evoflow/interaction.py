"""Interaction snapshots, threshold regions, and the removal-candidate rule.

A snapshot packages everything evaluated since the previous interaction (or
since the start, for the first one), per-symbol statistics, and the running
time series.  Thresholds split the snapshot into a best region (strictly
better on every enabled axis) and a worst region.  A grammar symbol is a
removal candidate when it occurs in at least one worst-region workflow, in no
best-region workflow, and the grammar could legally lose it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace as _dc_replace

from .evaluation import EvaluationRecord
from .grammar import (
    CLASSIFIER,
    VALUE,
    Grammar,
    HyperparamValueId,
    removable_symbols,
)
from .search import WorkflowSpec, WorkflowStep

__all__ = [
    "Thresholds",
    "SnapshotEntry",
    "RegionPartition",
    "SymbolStats",
    "InteractionSnapshot",
    "build_snapshot",
    "partition",
    "removal_candidates",
    "workflow_symbols",
    "parse_workflow_key",
]


@dataclass(frozen=True)
class Thresholds:
    """Region cutoffs; ``None`` disables that axis entirely."""

    t_acc: float | None = None
    t_time: float | None = None

    def __post_init__(self):
        if self.t_acc is not None and not 0.0 <= self.t_acc <= 1.0:
            raise ValueError(f"t_acc must be in [0, 1], got {self.t_acc}")
        if self.t_time is not None and self.t_time < 0.0:
            raise ValueError(f"t_time must be >= 0, got {self.t_time}")

    def admits(self, fitness: float, eval_time: float) -> bool:
        """Strictly greater fitness, strictly lower time; ties fall outside."""
        if self.t_acc is not None and not fitness > self.t_acc:
            return False
        if self.t_time is not None and not eval_time < self.t_time:
            return False
        return True

    def to_dict(self) -> dict:
        return {"t_acc": self.t_acc, "t_time": self.t_time}


@dataclass(frozen=True)
class SnapshotEntry:
    """One evaluated workflow as shown to the user."""

    workflow: WorkflowSpec
    record: EvaluationRecord
    generation: int

    @property
    def fitness(self) -> float:
        return self.record.fitness

    @property
    def eval_time(self) -> float:
        return self.record.eval_time

    def to_dict(self) -> dict:
        return {
            "workflow": self.workflow.canonical_key,
            "fitness": self.record.fitness,
            "eval_time": self.record.eval_time,
            "failed": self.record.failed,
            "classifier": self.record.classifier,
            "generation": self.generation,
        }


@dataclass(frozen=True)
class RegionPartition:
    """Disjoint, exhaustive split of the snapshot individuals."""

    r_best: tuple[SnapshotEntry, ...]
    r_worst: tuple[SnapshotEntry, ...]

    def to_dict(self) -> dict:
        return {
            "r_best": [e.to_dict() for e in self.r_best],
            "r_worst": [e.to_dict() for e in self.r_worst],
        }


@dataclass(frozen=True)
class SymbolStats:
    """Aggregates over exactly the snapshot workflows containing the symbol."""

    symbol: str
    kind: str                  # "Preprocessor", "Classifier", or "HyperparamValue"
    occurrences: int
    max_eval_time: float
    mean_eval_time: float
    max_fitness: float

    def to_dict(self) -> dict:
        return {
            "symbol": self.symbol,
            "kind": self.kind,
            "occurrences": self.occurrences,
            "max_eval_time": self.max_eval_time,
            "mean_eval_time": self.mean_eval_time,
            "max_fitness": self.max_fitness,
        }


@dataclass(frozen=True)
class InteractionSnapshot:
    """Immutable view served at a pause point.

    ``partition`` and ``candidates`` stay ``None`` until thresholds are
    chosen; :meth:`with_thresholds` fills them in.
    """

    individuals: tuple[SnapshotEntry, ...]
    best_current: SnapshotEntry
    best_global: SnapshotEntry
    stats: tuple[SymbolStats, ...]
    partition: RegionPartition | None
    candidates: tuple[tuple[str, ...], tuple[HyperparamValueId, ...]] | None
    budget: tuple[int, int]    # (interactions_left, generations_left)
    time_divergence: tuple[tuple[int, float, float | None], ...]

    def with_thresholds(self, th: Thresholds, g: Grammar) -> "InteractionSnapshot":
        part = partition(self, th)
        algs, values = removal_candidates(self, part, g)
        cand = (tuple(sorted(algs)), tuple(sorted(values, key=HyperparamValueId.render)))
        return _dc_replace(self, partition=part, candidates=cand)

    def to_dict(self) -> dict:
        cand = None
        if self.candidates is not None:
            cand = {
                "algorithms": list(self.candidates[0]),
                "hyperparameter_values": [v.render() for v in self.candidates[1]],
            }
        return {
            "individuals": [e.to_dict() for e in self.individuals],
            "best_current": self.best_current.to_dict(),
            "best_global": self.best_global.to_dict(),
            "stats": [s.to_dict() for s in self.stats],
            "partition": self.partition.to_dict() if self.partition else None,
            "candidates": cand,
            "budget": {
                "interactions_left": self.budget[0],
                "generations_left": self.budget[1],
            },
            "time_divergence": [list(row) for row in self.time_divergence],
        }


# ---------------------------------------------------------------------------
# Workflow symbols.

_STEP_RE = re.compile(r"^([A-Za-z_][\w.-]*)\((.*)\)$")


def parse_workflow_key(key: str) -> WorkflowSpec:
    """Inverse of the canonical key rendering."""
    steps = []
    for part in key.split("|"):
        m = _STEP_RE.match(part)
        if not m:
            raise ValueError(f"malformed workflow step {part!r}")
        name, inner = m.group(1), m.group(2)
        params: list[tuple[str, int | float | str]] = []
        if inner:
            for item in inner.split(","):
                if "=" not in item:
                    raise ValueError(f"malformed hyperparameter {item!r} in {part!r}")
                k, v = item.split("=", 1)
                params.append((k, _parse_value(v)))
        params.sort(key=lambda kv: kv[0])
        steps.append(WorkflowStep(algorithm=name, hyperparams=tuple(params)))
    return WorkflowSpec(steps=tuple(steps), canonical_key=key)


def _parse_value(text: str) -> int | float | str:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _value_text(v: int | float | str) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def workflow_symbols(workflow: WorkflowSpec, g: Grammar) -> frozenset[str]:
    """Grammar symbols a workflow exercises, as rendered ids.

    Algorithm ids always count.  A hyperparameter setting counts only when
    ``alg::hp=value`` is a categorical value terminal of the grammar; values
    drawn from numeric ranges are not shared symbols and are skipped.
    """
    out: set[str] = set()
    for step in workflow.steps:
        out.add(step.algorithm)
        for name, value in step.hyperparams:
            vid = HyperparamValueId(step.algorithm, name, _value_text(value)).render()
            t = g.terminals.get(vid)
            if t is not None and t.kind == VALUE:
                out.add(vid)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Snapshot construction.

def build_snapshot(session, baseline_timeline=None) -> InteractionSnapshot:
    """Assemble the snapshot for a paused session.

    ``session`` must be awaiting feedback; :meth:`Session.snapshot` is the
    guarded entry point.  ``baseline_timeline`` is an optional per-generation
    cumulative-eval-time series from a reference run; when given, the
    divergence series pairs each generation with it.
    """
    entries = tuple(
        SnapshotEntry(e.individual.workflow, e.individual.evaluation, e.generation)
        for e in session.window()
    )
    cfg = session.config
    population = session.population
    best_i = min(
        range(len(population)),
        key=lambda i: (
            -population[i].evaluation.fitness,
            population[i].evaluation.eval_time,
            i,
        ),
    )
    best_current = SnapshotEntry(
        population[best_i].workflow, population[best_i].evaluation, session.generation
    )
    best_global = SnapshotEntry(
        session.archive.workflow, session.archive.evaluation, session.archive_generation
    )
    divergence = []
    for gen, cum in enumerate(session.timeline):
        base = None
        if baseline_timeline is not None and gen < len(baseline_timeline):
            base = float(baseline_timeline[gen])
        divergence.append((gen, cum, base))
    return InteractionSnapshot(
        individuals=entries,
        best_current=best_current,
        best_global=best_global,
        stats=tuple(_symbol_stats(entries, session.grammar)),
        partition=None,
        candidates=None,
        budget=(
            cfg.max_interactions - session.interactions_used,
            cfg.max_generations - session.generation,
        ),
        time_divergence=tuple(divergence),
    )


def _symbol_stats(entries: tuple[SnapshotEntry, ...], g: Grammar) -> list[SymbolStats]:
    blocks = g.algorithms()
    acc: dict[str, list] = {}
    for e in entries:
        for sym in workflow_symbols(e.workflow, g):
            row = acc.setdefault(sym, [0, 0.0, 0.0, 0.0])
            row[0] += 1
            row[1] = max(row[1], e.eval_time)
            row[2] += e.eval_time
            row[3] = max(row[3], e.fitness)
    out = []
    for sym in sorted(acc):
        n, tmax, tsum, fmax = acc[sym]
        if "::" in sym:
            kind = "HyperparamValue"
        else:
            block = blocks.get(sym)
            kind = "Classifier" if block is not None and block.kind == CLASSIFIER else "Preprocessor"
        out.append(
            SymbolStats(
                symbol=sym,
                kind=kind,
                occurrences=n,
                max_eval_time=tmax,
                mean_eval_time=tsum / n,
                max_fitness=fmax,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Regions and candidates.

def partition(snapshot: InteractionSnapshot, th: Thresholds) -> RegionPartition:
    best = []
    worst = []
    for e in snapshot.individuals:
        (best if th.admits(e.fitness, e.eval_time) else worst).append(e)
    return RegionPartition(r_best=tuple(best), r_worst=tuple(worst))


def removal_candidates(
    snapshot: InteractionSnapshot, part: RegionPartition, g: Grammar
) -> tuple[set[str], set[HyperparamValueId]]:
    """Symbols occurring only in the worst region that the grammar can lose."""
    best_syms: set[str] = set()
    worst_syms: set[str] = set()
    for e in part.r_best:
        best_syms |= workflow_symbols(e.workflow, g)
    for e in part.r_worst:
        worst_syms |= workflow_symbols(e.workflow, g)
    only_worst = worst_syms - best_syms
    algs, values = removable_symbols(g)
    return (
        {a for a in algs if a in only_worst},
        {v for v in values if v.render() in only_worst},
    )
