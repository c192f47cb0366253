"""Batch entry points: dataset loading, baseline runs, profile sweeps,
serving, and speedup/fitness reports.

Every run persists an experiment JSON plus the engine's JSONL log, so reports
can be recomputed from disk alone.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, replace as _dc_replace
from pathlib import Path

import numpy as np

from . import datasets as _datasets
from .engine import EngineConfig
from .evaluation import FakeClock, balanced_accuracy, evaluation_rng
from .grammar import Grammar, default_grammar, parse_grammar
from .mlcatalog import AlgorithmFailure, Dataset, fit_pipeline, predict_pipeline
from .simusers import (
    SimulationResult,
    parse_profile_id,
    profile_suite,
    run_baseline as _run_baseline_session,
    run_simulated,
    speedup,
)

__all__ = [
    "ExperimentResult",
    "load_dataset",
    "stratified_split",
    "run_baseline",
    "run_sweep",
    "report",
    "main",
]

_BUILTIN_DATASETS = {
    "breastcancer": _datasets.make_breastcancer,
    "glass": _datasets.make_glass,
    "iris": _datasets.make_iris,
}


@dataclass(frozen=True)
class ExperimentResult:
    """One run's persisted summary."""

    dataset: str
    profile: str               # profile id, or "baseline"
    seed: int
    archive_workflow: str
    archive_fitness: float
    archive_eval_time: float
    test_balanced_accuracy: float
    timeline: tuple[float, ...]
    total_wall_time_seconds: float
    generations: int
    first_interaction_generation: int

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "profile": self.profile,
            "seed": self.seed,
            "archive": {
                "workflow": self.archive_workflow,
                "fitness": self.archive_fitness,
                "eval_time": self.archive_eval_time,
            },
            "test_balanced_accuracy": self.test_balanced_accuracy,
            "timeline": list(self.timeline),
            "total_wall_time_seconds": self.total_wall_time_seconds,
            "generations": self.generations,
            "first_interaction_generation": self.first_interaction_generation,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentResult":
        return cls(
            dataset=data["dataset"],
            profile=data["profile"],
            seed=int(data["seed"]),
            archive_workflow=data["archive"]["workflow"],
            archive_fitness=float(data["archive"]["fitness"]),
            archive_eval_time=float(data["archive"]["eval_time"]),
            test_balanced_accuracy=float(data["test_balanced_accuracy"]),
            timeline=tuple(float(v) for v in data["timeline"]),
            total_wall_time_seconds=float(data["total_wall_time_seconds"]),
            generations=int(data["generations"]),
            first_interaction_generation=int(data["first_interaction_generation"]),
        )


# ---------------------------------------------------------------------------
# Dataset loading and splitting.

def stratified_split(
    dataset: Dataset, test_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Per-class split; the test side gets ceil(fraction * n) rows overall,
    allocated to classes by largest remainder, never emptying a class with
    two or more rows out of the training side."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    n = dataset.n_samples
    target = math.ceil(test_fraction * n - 1e-9)
    classes = np.unique(dataset.labels)
    quotas = {}
    for c in classes:
        n_c = int(np.sum(dataset.labels == c))
        cap = n_c - 1 if n_c >= 2 else 0
        quotas[int(c)] = [test_fraction * n_c, cap]
    counts = {c: min(int(q), cap) for c, (q, cap) in quotas.items()}
    while sum(counts.values()) < target:
        open_classes = [c for c in counts if counts[c] < quotas[c][1]]
        if not open_classes:
            break
        pick = max(open_classes, key=lambda c: (quotas[c][0] - counts[c], -c))
        counts[pick] += 1
    rng = np.random.default_rng(seed)
    test_idx = []
    for c in classes:
        members = np.flatnonzero(dataset.labels == c)
        perm = members[rng.permutation(len(members))]
        test_idx.extend(perm[: counts[int(c)]].tolist())
    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    train, test = dataset.subset(~mask), dataset.subset(mask)
    if len(np.unique(train.labels)) < 2:
        raise ValueError("training split has fewer than two classes")
    return train, test


def load_dataset(
    path: str,
    *,
    test_path: str | None = None,
    test_fraction: float = 1.0 / 3.0,
    seed: int = 0,
) -> tuple[Dataset, Dataset]:
    """Resolve a dataset reference into (train, test).

    ``path`` may be a builtin name (breastcancer, glass, iris) or a CSV file.
    With ``test_path``, both files are taken as-is under a shared class-name
    mapping; otherwise the rows are split stratified by ``test_fraction``.
    """
    if test_path is not None:
        return _load_presplit(path, test_path)
    maker = _BUILTIN_DATASETS.get(path)
    if maker is not None:
        ds = maker()
    else:
        ds = _datasets.read_csv(path, name=Path(path).stem)
    return stratified_split(ds, test_fraction, seed)


def _load_presplit(train_path: str, test_path: str) -> tuple[Dataset, Dataset]:
    raw_train = _datasets.read_csv(train_path, name=Path(train_path).stem)
    raw_test = _datasets.read_csv(test_path, name=raw_train.name)
    names = tuple(sorted(set(raw_train.class_names) | set(raw_test.class_names)))
    index = {cname: i for i, cname in enumerate(names)}

    def remap(ds: Dataset) -> Dataset:
        labels = np.array(
            [index[ds.class_names[v]] for v in ds.labels], dtype=np.int64
        )
        return Dataset(features=ds.features, labels=labels, class_names=names, name=ds.name)

    train, test = remap(raw_train), remap(raw_test)
    if len(np.unique(train.labels)) < 2:
        raise ValueError("training file has fewer than two classes")
    return train, test


# ---------------------------------------------------------------------------
# Runs.

def _test_accuracy(result, train: Dataset, test: Dataset, seed: int) -> float:
    """Refit the archive workflow on the full training set, score the test set."""
    workflow = result.archive.workflow
    rng = evaluation_rng(seed, workflow.canonical_key + "#test")
    try:
        fitted = fit_pipeline(workflow, train, rng)
        predictions = predict_pipeline(fitted, test.features)
    except AlgorithmFailure:
        return 0.0
    return balanced_accuracy(test.labels, predictions)


def _jsonl_sink(path: Path):
    fh = open(path, "w", encoding="utf-8")

    def sink(record: dict) -> None:
        fh.write(json.dumps(record) + "\n")

    sink.close = fh.close
    return sink


def _persist(result: ExperimentResult, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{result.dataset}_{result.profile}_{result.seed}.json"
    path.write_text(json.dumps(result.to_dict(), indent=2) + "\n", encoding="utf-8")
    return path


def _execute_run(
    profile_id: str | None,
    config: EngineConfig,
    grammar: Grammar,
    train: Dataset,
    test: Dataset,
    seed: int,
    out_dir: Path | None,
    clock_step: float | None = None,
) -> ExperimentResult:
    clock = FakeClock(step=clock_step) if clock_step is not None else None
    sink = None
    log_path = None
    if out_dir is not None:
        logs = out_dir / "logs"
        logs.mkdir(parents=True, exist_ok=True)
        name = profile_id if profile_id is not None else "baseline"
        log_path = logs / f"{train.name}_{name}_{seed}.jsonl"
        sink = _jsonl_sink(log_path)
    started = time.perf_counter()
    try:
        if profile_id is None:
            sim: SimulationResult = _run_baseline_session(
                config, grammar, train, seed, clock=clock, log_sink=sink
            )
        else:
            sim = run_simulated(
                parse_profile_id(profile_id),
                config,
                grammar,
                train,
                seed,
                clock=clock,
                log_sink=sink,
            )
    finally:
        if sink is not None:
            sink.close()
    wall = time.perf_counter() - started
    result = ExperimentResult(
        dataset=train.name,
        profile=sim.profile_id,
        seed=sim.seed,
        archive_workflow=sim.result.archive.workflow.canonical_key,
        archive_fitness=sim.result.archive.evaluation.fitness,
        archive_eval_time=sim.result.archive.evaluation.eval_time,
        test_balanced_accuracy=_test_accuracy(sim.result, train, test, sim.seed),
        timeline=sim.result.timeline,
        total_wall_time_seconds=wall,
        generations=sim.result.generations,
        first_interaction_generation=sim.first_interaction_generation,
    )
    if out_dir is not None:
        _persist(result, out_dir)
    return result


def run_baseline(
    dataset_ref: str,
    config: EngineConfig,
    seed: int,
    *,
    grammar: Grammar | None = None,
    out_dir: str | Path | None = None,
    test_path: str | None = None,
    clock_step: float | None = None,
) -> ExperimentResult:
    train, test = load_dataset(dataset_ref, test_path=test_path, seed=seed)
    g = grammar if grammar is not None else default_grammar()
    out = Path(out_dir) if out_dir is not None else None
    return _execute_run(None, config, g, train, test, seed, out, clock_step)


def _sweep_job(args_tuple):
    dataset_ref, profile_id, config, seed, out_dir = args_tuple
    train, test = load_dataset(dataset_ref, seed=seed)
    g = default_grammar()
    return _execute_run(profile_id, config, g, train, test, seed, out_dir)


def run_sweep(
    dataset_refs: list[str],
    profile_ids: list[str],
    repeats: int,
    config: EngineConfig,
    base_seed: int,
    *,
    out_dir: str | Path | None = None,
    workers: int = 1,
) -> tuple[list[ExperimentResult], list[str]]:
    """Baselines plus every (dataset, profile, repeat); seed = base_seed + repeat.

    Returns the results and a list of failure descriptions; a failed run never
    aborts the sweep.
    """
    out = Path(out_dir) if out_dir is not None else None
    jobs = []
    for dataset_ref in dataset_refs:
        for repeat in range(repeats):
            jobs.append((dataset_ref, None, config, base_seed + repeat, out))
            for pid in profile_ids:
                jobs.append((dataset_ref, pid, config, base_seed + repeat, out))
    results: list[ExperimentResult] = []
    failures: list[str] = []
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_sweep_job, job): job for job in jobs}
            for fut in concurrent.futures.as_completed(futures):
                job = futures[fut]
                try:
                    results.append(fut.result())
                except Exception as exc:
                    failures.append(f"{job[0]}/{job[1] or 'baseline'}/seed={job[3]}: {exc}")
    else:
        for job in jobs:
            try:
                results.append(_sweep_job(job))
            except Exception as exc:
                failures.append(f"{job[0]}/{job[1] or 'baseline'}/seed={job[3]}: {exc}")
    results.sort(key=lambda r: (r.dataset, r.profile, r.seed))
    return results, failures


# ---------------------------------------------------------------------------
# Reporting.

def _quartiles(values: list[float]) -> tuple[float, float, float]:
    q1, med, q3 = np.percentile(np.asarray(values, dtype=np.float64), [25.0, 50.0, 75.0])
    return float(q1), float(med), float(q3)


def report(in_dir: str | Path, out_dir: str | Path | None = None) -> dict:
    """Aggregate persisted results into per-run, speedup, and fitness tables.

    Returns the tables as dictionaries and, with ``out_dir``, writes
    ``runs.csv``, ``speedup.csv``, ``fitness.csv``, and ``summary.txt``.
    """
    in_path = Path(in_dir)
    results = [
        ExperimentResult.from_dict(json.loads(p.read_text(encoding="utf-8")))
        for p in sorted(in_path.glob("*.json"))
    ]
    if not results:
        raise ValueError(f"no result files in {in_path}")

    baselines = {
        (r.dataset, r.seed): r for r in results if r.profile == "baseline"
    }
    run_rows = []
    speedups: dict[tuple[str, str], list[float]] = {}
    fitness: dict[tuple[str, str], list[float]] = {}
    for r in results:
        ratio = None
        if r.profile != "baseline":
            base = baselines.get((r.dataset, r.seed))
            if base is not None:
                try:
                    ratio = speedup(
                        r.timeline, base.timeline, r.first_interaction_generation
                    )
                except ValueError:
                    ratio = None
                else:
                    speedups.setdefault((r.dataset, r.profile), []).append(ratio)
        fitness.setdefault((r.dataset, r.profile), []).append(r.archive_fitness)
        run_rows.append(
            {
                "dataset": r.dataset,
                "profile": r.profile,
                "seed": r.seed,
                "fitness": r.archive_fitness,
                "eval_time": r.archive_eval_time,
                "test_balanced_accuracy": r.test_balanced_accuracy,
                "cumulative_eval_time": r.timeline[-1],
                "speedup": ratio,
            }
        )

    speedup_rows = []
    for (dataset, profile) in sorted(speedups):
        values = speedups[(dataset, profile)]
        q1, med, q3 = _quartiles(values)
        speedup_rows.append(
            {
                "dataset": dataset,
                "profile": profile,
                "n": len(values),
                "q1": q1,
                "median": med,
                "q3": q3,
            }
        )
    by_profile: dict[str, list[float]] = {}
    for (_, profile), values in speedups.items():
        by_profile.setdefault(profile, []).extend(values)
    for profile in sorted(by_profile):
        q1, med, q3 = _quartiles(by_profile[profile])
        speedup_rows.append(
            {
                "dataset": "all",
                "profile": profile,
                "n": len(by_profile[profile]),
                "q1": q1,
                "median": med,
                "q3": q3,
            }
        )

    fitness_rows = []
    for (dataset, profile) in sorted(fitness):
        values = fitness[(dataset, profile)]
        base_values = fitness.get((dataset, "baseline"), [])
        base_mean = float(np.mean(base_values)) if base_values else None
        mean = float(np.mean(values))
        fitness_rows.append(
            {
                "dataset": dataset,
                "profile": profile,
                "n": len(values),
                "mean_fitness": mean,
                "baseline_mean_fitness": base_mean,
                "delta": (mean - base_mean) if base_mean is not None else None,
            }
        )

    tables = {"runs": run_rows, "speedup": speedup_rows, "fitness": fitness_rows}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "runs.csv", run_rows)
        _write_csv(out / "speedup.csv", speedup_rows)
        _write_csv(out / "fitness.csv", fitness_rows)
        (out / "summary.txt").write_text(_render_summary(tables), encoding="utf-8")
    return tables


def _write_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if not rows:
            fh.write("")
            return
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})


def _render_summary(tables: dict) -> str:
    lines = []
    lines.append(f"runs: {len(tables['runs'])}")
    if tables["speedup"]:
        lines.append("")
        lines.append("speedup (baseline window time / run window time)")
        lines.append(f"{'dataset':<16}{'profile':<20}{'n':>4}{'q1':>9}{'median':>9}{'q3':>9}")
        for row in tables["speedup"]:
            lines.append(
                f"{row['dataset']:<16}{row['profile']:<20}{row['n']:>4}"
                f"{row['q1']:>9.4f}{row['median']:>9.4f}{row['q3']:>9.4f}"
            )
    if tables["fitness"]:
        lines.append("")
        lines.append("final fitness vs baseline")
        lines.append(f"{'dataset':<16}{'profile':<20}{'n':>4}{'mean':>9}{'base':>9}{'delta':>9}")
        for row in tables["fitness"]:
            base = row["baseline_mean_fitness"]
            delta = row["delta"]
            lines.append(
                f"{row['dataset']:<16}{row['profile']:<20}{row['n']:>4}"
                f"{row['mean_fitness']:>9.4f}"
                + (f"{base:>9.4f}" if base is not None else f"{'-':>9}")
                + (f"{delta:>+9.4f}" if delta is not None else f"{'-':>9}")
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Command-line surface.

def _load_config(path: str | None, seed: int | None = None) -> EngineConfig:
    """key=value pairs mirroring the config fields; later keys win."""
    values: dict = {}
    if path is not None:
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, text = (part.strip() for part in line.split("=", 1))
            if key not in EngineConfig.__dataclass_fields__:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            caster = float if key in ("crossover_prob", "mutation_prob") else int
            values[key] = caster(text)
    config = EngineConfig(**values)
    if seed is not None:
        config = _dc_replace(config, seed=seed)
    return config


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, default=0, help="base random seed")
    parser.add_argument("--out", help="output directory")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="evoflow",
        description="Interactive grammar-guided AutoML workflows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_base = sub.add_parser("run-baseline", help="one non-interactive run")
    p_base.add_argument("--dataset", required=True, help="builtin name or CSV path")
    p_base.add_argument("--test", help="pre-split test CSV (dataset becomes the train file)")
    p_base.add_argument("--grammar", help="grammar file; defaults to the shipped one")
    p_base.add_argument(
        "--fixed-clock",
        type=float,
        metavar="STEP",
        help="replace wall-clock timing with a fixed per-evaluation step (reproducibility aid)",
    )
    _add_common(p_base)

    p_sweep = sub.add_parser("run-sweep", help="profiles x datasets x repeats, plus baselines")
    p_sweep.add_argument("--datasets", required=True, help="comma-separated names/paths")
    p_sweep.add_argument("--profiles", default="all", help='"all" or comma-separated profile ids')
    p_sweep.add_argument("--repeats", type=int, default=1)
    p_sweep.add_argument("--workers", type=int, default=1, help="parallel run workers")
    _add_common(p_sweep)

    p_serve = sub.add_parser("serve", help="HTTP session service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--workdir", default=".", help="datasets/, grammars/, sessions/ root")

    p_report = sub.add_parser("report", help="aggregate result JSONs into tables")
    p_report.add_argument("--in", dest="in_dir", required=True)
    p_report.add_argument("--out", dest="out_dir")

    args = parser.parse_args(argv)
    try:
        if args.command == "run-baseline":
            config = _load_config(args.config, args.seed)
            grammar = (
                parse_grammar(Path(args.grammar).read_text(encoding="utf-8"))
                if args.grammar
                else None
            )
            result = run_baseline(
                args.dataset,
                config,
                args.seed,
                grammar=grammar,
                out_dir=args.out,
                test_path=args.test,
                clock_step=args.fixed_clock,
            )
            print(
                f"{result.dataset} seed={result.seed} "
                f"archive={result.archive_workflow} "
                f"fitness={result.archive_fitness:.4f} "
                f"test={result.test_balanced_accuracy:.4f}"
            )
        elif args.command == "run-sweep":
            config = _load_config(args.config, args.seed)
            dataset_refs = [d.strip() for d in args.datasets.split(",") if d.strip()]
            if args.profiles.strip() == "all":
                profile_ids = [p.id for p in profile_suite()]
            else:
                profile_ids = [
                    parse_profile_id(p.strip()).id
                    for p in args.profiles.split(",")
                    if p.strip()
                ]
            results, failures = run_sweep(
                dataset_refs,
                profile_ids,
                args.repeats,
                config,
                args.seed,
                out_dir=args.out,
                workers=args.workers,
            )
            print(f"completed {len(results)} runs, {len(failures)} failures")
            for failure in failures:
                print(f"  failed: {failure}", file=sys.stderr)
            if args.out:
                report(args.out, args.out)
                print((Path(args.out) / "summary.txt").read_text(encoding="utf-8"))
        elif args.command == "serve":
            from .service import serve

            serve(host=args.host, port=args.port, workdir=args.workdir)
        elif args.command == "report":
            tables = report(args.in_dir, args.out_dir)
            print(_render_summary(tables))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
