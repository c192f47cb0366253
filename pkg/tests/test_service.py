"""REST facade: session lifecycle over HTTP."""

from __future__ import annotations

import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from evoflow.cli import run_baseline
from evoflow.datasets import make_iris, write_csv
from evoflow.engine import EngineConfig
from evoflow.evaluation import FakeClock
from evoflow.service import create_app

FAST_CONFIG = {
    "population_size": 8,
    "max_generations": 4,
    "max_interactions": 2,
    "first_interaction_generation": 2,
    "cv_folds": 3,
    "seed": 21,
}


@pytest.fixture()
def workdir(tmp_path):
    (tmp_path / "datasets").mkdir()
    write_csv(make_iris(), tmp_path / "datasets" / "iris.csv")
    return tmp_path


@pytest.fixture()
def client(workdir):
    app = create_app(workdir, clock_factory=lambda cfg: FakeClock(step=0.001))
    with TestClient(app) as c:
        yield c


def wait_for(client, session_id, statuses, timeout=20.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        data = client.get(f"/sessions/{session_id}/status").json()
        if data["status"] in statuses:
            return data
        time.sleep(0.02)
    raise AssertionError(f"session never reached {statuses}: {data}")


def create(client, **overrides):
    config = {**FAST_CONFIG, **overrides}
    r = client.post("/sessions", json={"dataset": "iris", "config": config})
    assert r.status_code == 201, r.text
    return r.json()


# -- creation ----------------------------------------------------------------------

def test_create_session_ack(client):
    data = create(client)
    assert set(data) >= {"session_id", "dataset_name", "config", "created_at", "status"}
    assert data["dataset_name"] == "iris"
    assert data["config"]["population_size"] == 8
    assert data["status"] in ("Running", "AwaitingFeedback")


def test_create_unknown_dataset(client):
    r = client.post("/sessions", json={"dataset": "atlantis", "config": FAST_CONFIG})
    assert r.status_code == 404


def test_create_unknown_grammar(client):
    r = client.post(
        "/sessions",
        json={"dataset": "iris", "grammar": "missing", "config": FAST_CONFIG},
    )
    assert r.status_code == 404


def test_create_invalid_config(client):
    r = client.post(
        "/sessions",
        json={"dataset": "iris", "config": {**FAST_CONFIG, "population_size": 1}},
    )
    assert r.status_code == 422
    r = client.post(
        "/sessions",
        json={"dataset": "iris", "config": {**FAST_CONFIG, "bogus_field": 5}},
    )
    assert r.status_code == 422


def test_unknown_session_404(client):
    for path in ("status", "snapshot", "result", "timeline"):
        assert client.get(f"/sessions/deadbeef/{path}").status_code == 404
    r = client.post("/sessions/deadbeef/feedback", json={"decision": {"kind": "Stop"}})
    assert r.status_code == 404


# -- snapshot ----------------------------------------------------------------------

def test_snapshot_flow(client):
    sid = create(client)["session_id"]
    st = wait_for(client, sid, {"AwaitingFeedback"})
    assert st["generation"] == 2

    r1 = client.get(f"/sessions/{sid}/snapshot")
    r2 = client.get(f"/sessions/{sid}/snapshot")
    assert r1.status_code == r2.status_code == 200
    assert r1.content == r2.content            # byte-identical repeats
    snap = r1.json()
    assert set(snap) == {
        "individuals", "best_current", "best_global", "stats",
        "partition", "candidates", "budget", "time_divergence",
    }
    assert snap["partition"] is None and snap["candidates"] is None
    assert snap["budget"] == {"interactions_left": 2, "generations_left": 2}
    assert len(snap["time_divergence"]) == 3   # generations 0..2


def test_snapshot_with_thresholds(client):
    sid = create(client)["session_id"]
    wait_for(client, sid, {"AwaitingFeedback"})
    r = client.get(f"/sessions/{sid}/snapshot", params={"t_acc": 0.5, "t_time": 0.01})
    assert r.status_code == 200
    snap = r.json()
    assert snap["partition"] is not None
    n = len(snap["partition"]["r_best"]) + len(snap["partition"]["r_worst"])
    assert n == len(snap["individuals"])
    assert set(snap["candidates"]) == {"algorithms", "hyperparameter_values"}
    bad = client.get(f"/sessions/{sid}/snapshot", params={"t_acc": 1.5})
    assert bad.status_code == 422


def test_snapshot_wrong_status_409(client):
    sid = create(client)["session_id"]
    # immediately after creation the session is (briefly) Running
    r = client.get(f"/sessions/{sid}/snapshot")
    assert r.status_code in (200, 409)
    wait_for(client, sid, {"AwaitingFeedback"})
    client.post(f"/sessions/{sid}/feedback", json={"decision": {"kind": "Stop"}})
    wait_for(client, sid, {"Finished"})
    assert client.get(f"/sessions/{sid}/snapshot").status_code == 409


# -- feedback -----------------------------------------------------------------------

def test_feedback_continue_and_stop(client, workdir):
    sid = create(client)["session_id"]
    wait_for(client, sid, {"AwaitingFeedback"})
    client.get(f"/sessions/{sid}/snapshot")
    r = client.post(
        f"/sessions/{sid}/feedback",
        json={
            "decision": {"kind": "Continue", "generations_until_next": 1},
            "remove_algorithms": ["fastICA"],
            "thresholds_used": {"t_acc": 0.5, "t_time": None},
        },
    )
    assert r.status_code == 200
    ack = r.json()
    assert ack["applied_removals"]["algorithms"] == ["fastICA"]
    assert ack["status"] == "Running"

    wait_for(client, sid, {"AwaitingFeedback"})
    r = client.post(f"/sessions/{sid}/feedback", json={"decision": {"kind": "Stop"}})
    assert r.json()["status"] == "Finished"

    entries = [
        json.loads(line)
        for line in (workdir / "sessions" / sid / "interactions.jsonl").read_text().splitlines()
    ]
    assert len(entries) == 2
    first = entries[0]
    assert first["session_id"] == sid
    assert first["interaction_index"] == 1
    assert first["removed_algorithms"] == ["fastICA"]
    assert first["thresholds"] == {"t_acc": 0.5, "t_time": None}
    assert first["decision"] == {"kind": "Continue", "generations_until_next": 1}
    assert first["wall_time_spent_seconds"] >= 0.0
    assert entries[1]["decision"] == {"kind": "Stop", "generations_until_next": None}


def test_feedback_violations_422(client):
    sid = create(client)["session_id"]
    wait_for(client, sid, {"AwaitingFeedback"})
    all_classifiers = [
        "kNN", "decisionTree", "logisticRegression", "gaussianNB", "multinomialNB",
        "lda", "lsvc", "passiveAggressiveClassifier", "extraTreeClassifier",
        "mlpClassifier",
    ]
    r = client.post(
        f"/sessions/{sid}/feedback",
        json={
            "decision": {"kind": "Continue", "generations_until_next": 1},
            "remove_algorithms": all_classifiers,
        },
    )
    assert r.status_code == 422
    assert r.json()["detail"]["violations"]
    # session still paused and usable
    assert client.get(f"/sessions/{sid}/status").json()["status"] == "AwaitingFeedback"
    ok = client.post(f"/sessions/{sid}/feedback", json={"decision": {"kind": "Stop"}})
    assert ok.status_code == 200


def test_feedback_malformed_422(client):
    sid = create(client)["session_id"]
    wait_for(client, sid, {"AwaitingFeedback"})
    assert (
        client.post(f"/sessions/{sid}/feedback", json={}).status_code == 422
    )
    r = client.post(
        f"/sessions/{sid}/feedback",
        json={"decision": {"kind": "Continue", "generations_until_next": 0}},
    )
    assert r.status_code == 422
    r = client.post(
        f"/sessions/{sid}/feedback",
        json={"decision": {"kind": "Stop"}, "remove_hyperparameter_values": ["garbage"]},
    )
    assert r.status_code == 422


def test_feedback_wrong_status_409(client):
    sid = create(client)["session_id"]
    wait_for(client, sid, {"AwaitingFeedback"})
    client.post(f"/sessions/{sid}/feedback", json={"decision": {"kind": "Stop"}})
    wait_for(client, sid, {"Finished"})
    r = client.post(f"/sessions/{sid}/feedback", json={"decision": {"kind": "Stop"}})
    assert r.status_code == 409


# -- result and timeline -------------------------------------------------------------

def test_result_after_finish(client, workdir):
    sid = create(client)["session_id"]
    wait_for(client, sid, {"AwaitingFeedback"})
    assert client.get(f"/sessions/{sid}/result").status_code == 409
    client.post(
        f"/sessions/{sid}/feedback",
        json={"decision": {"kind": "Continue", "generations_until_next": 2}},
    )
    wait_for(client, sid, {"Finished"})
    r = client.get(f"/sessions/{sid}/result")
    assert r.status_code == 200
    body = r.json()
    assert set(body) >= {"archive", "cumulative_eval_time", "generations", "interactions_used"}
    assert body["generations"] == 4
    assert body["interactions_used"] == 1
    assert "|" in body["archive"]["workflow"] or "(" in body["archive"]["workflow"]
    assert Path(body["logs"]["run"]).exists()
    # repeated GETs serve the same document
    assert client.get(f"/sessions/{sid}/result").content == r.content


def test_timeline_anytime(client):
    sid = create(client)["session_id"]
    wait_for(client, sid, {"AwaitingFeedback"})
    tl = client.get(f"/sessions/{sid}/timeline").json()
    assert len(tl["timeline"]) == 3
    assert tl["baseline_timeline"] is None
    assert all(b >= a for a, b in zip(tl["timeline"], tl["timeline"][1:]))


def test_run_log_written(client, workdir):
    sid = create(client)["session_id"]
    wait_for(client, sid, {"AwaitingFeedback"})
    client.post(f"/sessions/{sid}/feedback", json={"decision": {"kind": "Stop"}})
    wait_for(client, sid, {"Finished"})
    lines = (workdir / "sessions" / sid / "run.jsonl").read_text().splitlines()
    records = [json.loads(x) for x in lines]
    evals = [r for r in records if "canonical_key" in r]
    interactions = [r for r in records if "removed_algorithms" in r]
    assert len(evals) == 8 * 3                 # pop x (init + 2 generations)
    assert all({"generation", "fitness", "eval_time", "cached"} <= set(r) for r in evals)
    assert len(interactions) == 1


# -- cross-interface determinism ------------------------------------------------------

def test_service_matches_cli_on_noop_run(client, tmp_path):
    """A no-op interactive session lands on the CLI baseline's archive."""
    sid = create(client)["session_id"]
    while True:
        st = wait_for(client, sid, {"AwaitingFeedback", "Finished"})
        if st["status"] == "Finished":
            break
        client.post(
            f"/sessions/{sid}/feedback",
            json={"decision": {"kind": "Continue", "generations_until_next": 1}},
        )
    via_service = client.get(f"/sessions/{sid}/result").json()

    cfg = EngineConfig.from_dict({**FAST_CONFIG, "max_interactions": 0})
    via_cli = run_baseline(
        "iris", cfg, seed=FAST_CONFIG["seed"], out_dir=tmp_path, clock_step=0.001
    )
    assert via_service["archive"]["workflow"] == via_cli.archive_workflow
    assert abs(via_service["archive"]["fitness"] - via_cli.archive_fitness) < 1e-12
