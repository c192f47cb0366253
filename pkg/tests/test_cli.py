"""Command-line interface: splits, runs, sweeps, reports."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from evoflow.cli import (
    ExperimentResult,
    load_dataset,
    main,
    report,
    run_baseline,
    run_sweep,
    stratified_split,
)
from evoflow.datasets import make_blobs, make_breastcancer, make_iris, write_csv
from evoflow.engine import EngineConfig

FAST = dict(
    population_size=8,
    max_generations=4,
    max_interactions=1,
    first_interaction_generation=2,
    cv_folds=3,
)


# -- stratified split ---------------------------------------------------------------

def test_split_totals_match_ceiling():
    for n_per_class, fraction in [((466, 233), 1 / 3), ((100, 50), 0.25)]:
        ds = make_blobs(counts=n_per_class, n_features=3, seed=1)
        train, test = stratified_split(ds, fraction, seed=0)
        want = math.ceil(fraction * ds.n_samples - 1e-9)
        assert test.n_samples == want
        assert train.n_samples == ds.n_samples - want


def test_split_reproduces_reference_counts():
    # 699 rows -> 233 test, 214 -> 72, 1484 -> 495 at one third
    for counts, expect in [
        ((458, 241), 233),
        ((70, 76, 17, 13, 9, 29), 72),
        ((463, 429, 244, 163, 51, 44, 35, 30, 20, 5), 495),
    ]:
        ds = make_blobs(counts=counts, n_features=2, seed=2)
        _, test = stratified_split(ds, 1 / 3, seed=0)
        assert test.n_samples == expect


def test_split_is_stratified_and_never_empties_a_class():
    ds = make_blobs(counts=(30, 9, 2, 1), n_features=2, seed=3)
    train, test = stratified_split(ds, 1 / 3, seed=4)
    train_counts = np.bincount(train.labels, minlength=4)
    # singleton class stays in training
    assert train_counts[3] == 1
    assert all(c >= 1 for c in train_counts)
    for c in range(3):
        frac = np.sum(test.labels == c) / np.sum(ds.labels == c)
        assert 0.0 <= frac <= 0.7


def test_split_deterministic_and_disjoint():
    ds = make_blobs(counts=(40, 20), n_features=2, seed=5)
    a_train, a_test = stratified_split(ds, 1 / 3, seed=6)
    b_train, b_test = stratified_split(ds, 1 / 3, seed=6)
    assert np.array_equal(a_train.features, b_train.features)
    assert np.array_equal(a_test.features, b_test.features)
    # row-disjoint and exhaustive
    assert a_train.n_samples + a_test.n_samples == 60
    with pytest.raises(ValueError):
        stratified_split(ds, 0.0, seed=0)
    with pytest.raises(ValueError):
        stratified_split(ds, 1.0, seed=0)


# -- load_dataset -------------------------------------------------------------------

def test_load_builtin():
    train, test = load_dataset("breastcancer")
    assert train.n_samples == 466 and test.n_samples == 233
    full = make_breastcancer()
    assert train.n_features == full.n_features == 9


def test_load_csv(tmp_path):
    path = tmp_path / "mine.csv"
    write_csv(make_iris(), path)
    train, test = load_dataset(str(path), test_fraction=0.2, seed=1)
    assert train.n_samples == 120 and test.n_samples == 30
    assert train.name == "mine"


def test_load_presplit(tmp_path):
    iris = make_iris()
    tr_path, te_path = tmp_path / "tr.csv", tmp_path / "te.csv"
    write_csv(iris.subset(slice(0, 100)), tr_path)
    write_csv(iris.subset(slice(100, 150)), te_path)
    train, test = load_dataset(str(tr_path), test_path=str(te_path))
    assert train.n_samples == 100 and test.n_samples == 50
    assert train.class_names == test.class_names   # shared mapping


def test_load_missing_file():
    with pytest.raises((FileNotFoundError, OSError)):
        load_dataset("no_such_dataset_anywhere")


# -- runs ---------------------------------------------------------------------------

def test_run_baseline_persists(tmp_path):
    cfg = EngineConfig(**{**FAST, "max_interactions": 0}, seed=3)
    result = run_baseline("iris", cfg, seed=3, out_dir=tmp_path, clock_step=0.001)
    assert result.profile == "baseline"
    assert result.dataset == "iris"
    assert 0.0 <= result.archive_fitness <= 1.0
    assert 0.0 <= result.test_balanced_accuracy <= 1.0
    assert len(result.timeline) == 5
    saved = json.loads((tmp_path / "iris_baseline_3.json").read_text())
    assert ExperimentResult.from_dict(saved) == result
    logs = list((tmp_path / "logs").glob("*.jsonl"))
    assert len(logs) == 1


def test_run_baseline_deterministic(tmp_path):
    cfg = EngineConfig(**{**FAST, "max_interactions": 0}, seed=4)
    a = run_baseline("iris", cfg, seed=4, out_dir=tmp_path / "a", clock_step=0.001)
    b = run_baseline("iris", cfg, seed=4, out_dir=tmp_path / "b", clock_step=0.001)
    assert a.archive_workflow == b.archive_workflow
    assert a.timeline == b.timeline
    assert a.test_balanced_accuracy == b.test_balanced_accuracy


def test_run_sweep_covers_grid(tmp_path):
    cfg = EngineConfig(**FAST)
    results, failures = run_sweep(
        ["iris"], ["t0.5_aOne", "f0.8_aThird"], repeats=2, config=cfg,
        base_seed=50, out_dir=tmp_path,
    )
    assert failures == []
    combos = {(r.dataset, r.profile, r.seed) for r in results}
    # 2 baselines + 2 profiles x 2 repeats
    assert combos == {
        ("iris", "baseline", 50),
        ("iris", "baseline", 51),
        ("iris", "t0.5_aOne", 50),
        ("iris", "t0.5_aOne", 51),
        ("iris", "f0.8_aThird", 50),
        ("iris", "f0.8_aThird", 51),
    }
    assert len(list(tmp_path.glob("*.json"))) == 6


# -- report -------------------------------------------------------------------------

def synthetic_result(dataset, profile, seed, fitness, timeline, first=1, test_acc=0.5):
    return ExperimentResult(
        dataset=dataset,
        profile=profile,
        seed=seed,
        archive_workflow="gaussianNB()",
        archive_fitness=fitness,
        archive_eval_time=0.5,
        test_balanced_accuracy=test_acc,
        timeline=tuple(timeline),
        total_wall_time_seconds=1.0,
        generations=len(timeline) - 1,
        first_interaction_generation=first,
    )


def write_results(path: Path, results):
    path.mkdir(parents=True, exist_ok=True)
    for i, r in enumerate(results):
        (path / f"r{i:03d}.json").write_text(json.dumps(r.to_dict()))


def test_report_matches_hand_medians(tmp_path):
    """Ten synthetic runs with hand-computed aggregates."""
    rows = []
    # five seeds; baseline window per seed is [1 -> 3] = 2.0
    for seed in range(5):
        rows.append(synthetic_result("ds", "baseline", seed, 0.80, [0.0, 1.0, 3.0]))
    # profile windows chosen for speedups 1.0, 1.25, 2.0, 2.5, 4.0
    windows = [2.0, 1.6, 1.0, 0.8, 0.5]
    for seed, w in enumerate(windows):
        rows.append(
            synthetic_result("ds", "t1_aOne", seed, 0.78 + 0.01 * seed, [0.0, 1.0, 1.0 + w])
        )
    write_results(tmp_path / "in", rows)
    tables = report(tmp_path / "in", tmp_path / "out")

    by_key = {(r["dataset"], r["profile"]): r for r in tables["speedup"]}
    row = by_key[("ds", "t1_aOne")]
    assert row["n"] == 5
    assert abs(row["median"] - 2.0) < 1e-12            # median of 1,1.25,2,2.5,4
    assert abs(row["q1"] - 1.25) < 1e-12
    assert abs(row["q3"] - 2.5) < 1e-12
    pooled = by_key[("all", "t1_aOne")]
    assert pooled["n"] == 5 and abs(pooled["median"] - 2.0) < 1e-12

    fit = {(r["dataset"], r["profile"]): r for r in tables["fitness"]}
    prof = fit[("ds", "t1_aOne")]
    assert abs(prof["mean_fitness"] - np.mean([0.78, 0.79, 0.80, 0.81, 0.82])) < 1e-12
    assert abs(prof["baseline_mean_fitness"] - 0.80) < 1e-12
    assert abs(prof["delta"] - 0.0) < 1e-12
    for name in ("runs.csv", "speedup.csv", "fitness.csv", "summary.txt"):
        assert (tmp_path / "out" / name).exists()


def test_report_all_unit_speedups(tmp_path):
    rows = []
    for seed in range(4):
        rows.append(synthetic_result("d1", "baseline", seed, 0.8, [0.0, 1.0, 2.0]))
        rows.append(synthetic_result("d1", "aOneProf", seed, 0.8, [0.0, 1.0, 2.0]))
    write_results(tmp_path / "in", rows)
    tables = report(tmp_path / "in")
    for row in tables["speedup"]:
        assert row["median"] == 1.0 and row["q1"] == 1.0 and row["q3"] == 1.0


def test_report_baseline_only(tmp_path):
    rows = [synthetic_result("d1", "baseline", s, 0.7 + 0.01 * s, [0.0, 1.0]) for s in range(3)]
    write_results(tmp_path / "in", rows)
    tables = report(tmp_path / "in", tmp_path / "out")
    assert tables["speedup"] == []
    assert len(tables["fitness"]) == 1
    assert tables["fitness"][0]["profile"] == "baseline"
    assert abs(tables["fitness"][0]["mean_fitness"] - 0.71) < 1e-12


def test_report_empty_dir(tmp_path):
    (tmp_path / "in").mkdir()
    with pytest.raises(ValueError):
        report(tmp_path / "in")


# -- argument parsing -----------------------------------------------------------------

def test_main_run_baseline(tmp_path, capsys):
    cfg_path = tmp_path / "fast.cfg"
    cfg_path.write_text(
        "population_size = 8\nmax_generations = 3\nmax_interactions = 0\ncv_folds = 3\n"
    )
    code = main(
        [
            "run-baseline",
            "--dataset", "iris",
            "--config", str(cfg_path),
            "--seed", "9",
            "--out", str(tmp_path / "out"),
            "--fixed-clock", "0.001",
        ]
    )
    assert code == 0
    assert (tmp_path / "out" / "iris_baseline_9.json").exists()
    assert "iris" in capsys.readouterr().out


def test_main_report_roundtrip(tmp_path, capsys):
    rows = [synthetic_result("d", "baseline", 0, 0.9, [0.0, 1.0])]
    write_results(tmp_path / "in", rows)
    assert main(["report", "--in", str(tmp_path / "in"), "--out", str(tmp_path / "rep")]) == 0
    assert (tmp_path / "rep" / "summary.txt").exists()


def test_main_errors_return_nonzero(tmp_path, capsys):
    assert main(["report", "--in", str(tmp_path / "void")]) == 1
    err = capsys.readouterr().err
    assert err.strip()
    assert main(["run-baseline", "--dataset", "nope_missing", "--out", str(tmp_path)]) == 1
