"""The REST facade, exercised in-process.

Walks the full session lifecycle over HTTP semantics without opening a port
(fastapi's TestClient; needs the dev extra installed). `evoflow serve` hosts
the same app over uvicorn for real clients.
"""

import json
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from evoflow.service import create_app

workdir = Path(tempfile.mkdtemp(prefix="evoflow-demo-"))
client = TestClient(create_app(workdir=str(workdir)))

created = client.post("/sessions", json={
    "dataset": "iris",
    "config": {
        "population_size": 12,
        "max_generations": 6,
        "max_interactions": 1,
        "first_interaction_generation": 3,
        "cv_folds": 3,
        "seed": 5,
    },
})
sid = created.json()["session_id"]
print(f"POST /sessions -> {created.status_code}, session {sid}")

# The driver thread steps the engine; poll until it parks at the pause.
while True:
    status = client.get(f"/sessions/{sid}/status").json()
    if status["status"] != "Running":
        break
    time.sleep(0.05)
print(f"status: {json.dumps(status)}")

snapshot = client.get(f"/sessions/{sid}/snapshot").json()
print(f"snapshot: {len(snapshot['individuals'])} individuals, "
      f"budget {snapshot['budget']}")

with_thresholds = client.get(
    f"/sessions/{sid}/snapshot", params={"t_acc": 0.8, "t_time": 10.0}
).json()
candidates = with_thresholds["candidates"]
print(f"thresholded: {len(with_thresholds['partition']['r_best'])} best / "
      f"{len(with_thresholds['partition']['r_worst'])} worst, "
      f"candidates {candidates['algorithms']}")

ack = client.post(f"/sessions/{sid}/feedback", json={
    "decision": {"kind": "Continue", "generations_until_next": 3},
    "remove_algorithms": candidates["algorithms"][:1],
    "thresholds_used": {"t_acc": 0.8, "t_time": 10.0},
})
print(f"feedback -> {ack.status_code}: {json.dumps(ack.json())}")

while client.get(f"/sessions/{sid}/status").json()["status"] != "Finished":
    time.sleep(0.05)
result = client.get(f"/sessions/{sid}/result").json()
print(f"\nresult: archive {result['archive']['workflow']}")
print(f"        fitness {result['archive']['fitness']:.4f}, "
      f"{result['generations']} generations, "
      f"{result['interactions_used']} interaction(s)")
print(f"logs under {workdir}/sessions/{sid}/")
