"""HTTP facade hosting interactive sessions.

Each session runs on its own driver thread; HTTP handlers read published
state and, at pauses, apply feedback while the driver is parked.  Logs land
under ``<workdir>/sessions/<id>/`` as ``run.jsonl`` (every evaluation and
interaction) and ``interactions.jsonl`` (one entry per applied feedback).
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query, Response

from .cli import load_dataset
from .engine import (
    Decision,
    EngineConfig,
    Feedback,
    FeedbackRejected,
    Session,
    Status,
)
from .evaluation import Clock
from .grammar import (
    Grammar,
    GrammarParseError,
    HyperparamValueId,
    UnknownSymbolError,
    default_grammar,
    parse_grammar,
)
from .interaction import Thresholds, build_snapshot

__all__ = ["create_app", "serve"]

_POLL_SECONDS = 0.02


class _HostedSession:
    """One session, its driver thread, and the state published to HTTP."""

    def __init__(
        self,
        session_id: str,
        dataset_name: str,
        config: EngineConfig,
        grammar: Grammar,
        train,
        directory: Path,
        baseline_timeline: list[float] | None,
        clock: Clock | None,
    ):
        self.session_id = session_id
        self.dataset_name = dataset_name
        self.config = config
        self.created_at = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        self.lock = threading.Lock()
        self.published_status = Status.RUNNING.value
        self.snapshot_body: bytes | None = None
        self.pause_served_at: float | None = None
        self.resume = threading.Event()
        self.error: str | None = None
        self.session: Session | None = None
        self.result_body: bytes | None = None
        self.baseline_timeline = baseline_timeline
        self.directory = directory
        self._grammar = grammar
        self._train = train
        self._clock = clock
        self._run_log = open(directory / "run.jsonl", "a", encoding="utf-8")
        self.thread = threading.Thread(target=self._drive, daemon=True)
        self.thread.start()

    # -- driver thread -------------------------------------------------------

    def _sink(self, record: dict) -> None:
        self._run_log.write(json.dumps(record) + "\n")
        self._run_log.flush()

    def _drive(self) -> None:
        try:
            session = Session(
                self.config,
                self._grammar,
                self._train,
                clock=self._clock,
                log_sink=self._sink,
            )
            self.session = session
            while True:
                if session.status is Status.RUNNING:
                    session.step_generation()
                elif session.status is Status.AWAITING_FEEDBACK:
                    snap = build_snapshot(session, self.baseline_timeline)
                    body = json.dumps(snap.to_dict()).encode("utf-8")
                    with self.lock:
                        self.snapshot_body = body
                        self.pause_served_at = None
                        self.published_status = Status.AWAITING_FEEDBACK.value
                    self.resume.wait()
                    self.resume.clear()
                else:
                    break
            with self.lock:
                self.published_status = Status.FINISHED.value
        except Exception as exc:   # published so clients see why the run died
            with self.lock:
                self.error = f"{type(exc).__name__}: {exc}"
                self.published_status = "Failed"
        finally:
            self._run_log.close()


def _parse_thresholds(data: dict | None) -> Thresholds:
    if not data:
        return Thresholds()
    try:
        return Thresholds(
            t_acc=None if data.get("t_acc") is None else float(data["t_acc"]),
            t_time=None if data.get("t_time") is None else float(data["t_time"]),
        )
    except (TypeError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))


def _parse_feedback(body: dict) -> Feedback:
    try:
        decision_data = body.get("decision")
        if not isinstance(decision_data, dict) or "kind" not in decision_data:
            raise ValueError('feedback needs a decision {"kind": "Continue"|"Stop"}')
        raw_gap = decision_data.get("generations_until_next")
        decision = Decision(
            kind=str(decision_data["kind"]),
            generations_until_next=None if raw_gap is None else int(raw_gap),
        )
        values = tuple(
            HyperparamValueId.parse(str(v))
            for v in body.get("remove_hyperparameter_values", [])
        )
        return Feedback(
            decision=decision,
            remove_algorithms=tuple(str(a) for a in body.get("remove_algorithms", [])),
            remove_hyperparameter_values=values,
            thresholds_used=_parse_thresholds(body.get("thresholds_used")),
        )
    except HTTPException:
        raise
    except (TypeError, ValueError, UnknownSymbolError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))


def create_app(workdir: str | Path = ".", clock_factory=None) -> FastAPI:
    """Build the application.

    ``clock_factory(config)`` may return a Clock for new sessions; tests use
    it to pin evaluation timing.
    """
    root = Path(workdir)
    sessions: dict[str, _HostedSession] = {}
    registry_lock = threading.Lock()
    app = FastAPI(title="evoflow service")

    def _get(session_id: str) -> _HostedSession:
        hosted = sessions.get(session_id)
        if hosted is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return hosted

    def _resolve_grammar(ref: str | None) -> Grammar:
        if ref is None or ref == "default":
            return default_grammar()
        for candidate in (root / "grammars" / ref, root / "grammars" / f"{ref}.txt", Path(ref)):
            if candidate.is_file():
                try:
                    return parse_grammar(candidate.read_text(encoding="utf-8"))
                except GrammarParseError as exc:
                    raise HTTPException(status_code=422, detail=str(exc))
        raise HTTPException(status_code=404, detail=f"unknown grammar {ref!r}")

    def _resolve_dataset(ref: str, seed: int):
        candidates = [root / "datasets" / ref, root / "datasets" / f"{ref}.csv"]
        for candidate in candidates:
            if candidate.is_file():
                return load_dataset(str(candidate), seed=seed)
        try:
            return load_dataset(ref, seed=seed)
        except (FileNotFoundError, OSError):
            raise HTTPException(status_code=404, detail=f"unknown dataset {ref!r}")
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    def _resolve_baseline(ref: str | None) -> list[float] | None:
        if ref is None:
            return None
        for candidate in (root / ref, Path(ref)):
            if candidate.is_file():
                data = json.loads(candidate.read_text(encoding="utf-8"))
                timeline = data.get("timeline") if isinstance(data, dict) else data
                if not isinstance(timeline, list):
                    raise HTTPException(
                        status_code=422, detail=f"baseline {ref!r} has no timeline"
                    )
                return [float(v) for v in timeline]
        raise HTTPException(status_code=404, detail=f"unknown baseline {ref!r}")

    @app.post("/sessions", status_code=201)
    def create_session(request: dict = Body(...)):
        dataset_ref = request.get("dataset")
        if not isinstance(dataset_ref, str) or not dataset_ref:
            raise HTTPException(status_code=422, detail="request needs a dataset reference")
        overrides = request.get("config") or {}
        try:
            config = EngineConfig.from_dict(overrides)
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        grammar = _resolve_grammar(request.get("grammar"))
        baseline = _resolve_baseline(request.get("baseline"))
        train, _test = _resolve_dataset(dataset_ref, config.seed)
        session_id = uuid.uuid4().hex
        directory = root / "sessions" / session_id
        directory.mkdir(parents=True, exist_ok=True)
        clock = clock_factory(config) if clock_factory is not None else None
        hosted = _HostedSession(
            session_id=session_id,
            dataset_name=train.name,
            config=config,
            grammar=grammar,
            train=train,
            directory=directory,
            baseline_timeline=baseline,
            clock=clock,
        )
        with registry_lock:
            sessions[session_id] = hosted
        return {
            "session_id": session_id,
            "dataset_name": hosted.dataset_name,
            "config": config.to_dict(),
            "created_at": hosted.created_at,
            "status": hosted.published_status,
        }

    @app.get("/sessions/{session_id}/status")
    def get_status(session_id: str):
        hosted = _get(session_id)
        session = hosted.session
        payload = {
            "session_id": session_id,
            "dataset_name": hosted.dataset_name,
            "config": hosted.config.to_dict(),
            "created_at": hosted.created_at,
            "status": hosted.published_status,
            "generation": session.generation if session is not None else 0,
            "interactions_used": session.interactions_used if session is not None else 0,
        }
        if hosted.error is not None:
            payload["error"] = hosted.error
        return payload

    @app.get("/sessions/{session_id}/snapshot")
    def get_snapshot(
        session_id: str,
        t_acc: float | None = Query(default=None),
        t_time: float | None = Query(default=None),
    ):
        hosted = _get(session_id)
        with hosted.lock:
            if (
                hosted.published_status != Status.AWAITING_FEEDBACK.value
                or hosted.snapshot_body is None
            ):
                raise HTTPException(
                    status_code=409,
                    detail=f"session is {hosted.published_status}, not awaiting feedback",
                )
            if hosted.pause_served_at is None:
                hosted.pause_served_at = time.monotonic()
                hosted.session.mark_snapshot_served()
            if t_acc is None and t_time is None:
                return Response(content=hosted.snapshot_body, media_type="application/json")
            try:
                thresholds = Thresholds(t_acc=t_acc, t_time=t_time)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            session = hosted.session
            snap = build_snapshot(session, hosted.baseline_timeline)
            body = json.dumps(snap.with_thresholds(thresholds, session.grammar).to_dict())
            return Response(content=body.encode("utf-8"), media_type="application/json")

    @app.post("/sessions/{session_id}/feedback")
    def post_feedback(session_id: str, body: dict = Body(...)):
        hosted = _get(session_id)
        feedback = _parse_feedback(body)
        with hosted.lock:
            if hosted.published_status != Status.AWAITING_FEEDBACK.value:
                raise HTTPException(
                    status_code=409,
                    detail=f"session is {hosted.published_status}, not awaiting feedback",
                )
            session = hosted.session
            served_at = hosted.pause_served_at
            try:
                session.apply_feedback(feedback)
            except FeedbackRejected as exc:
                raise HTTPException(status_code=422, detail={"violations": exc.violations})
            wall = time.monotonic() - served_at if served_at is not None else 0.0
            entry = {
                "session_id": session_id,
                "interaction_index": session.interactions_used,
                "wall_time_spent_seconds": wall,
                "thresholds": feedback.thresholds_used.to_dict(),
                "removed_algorithms": list(feedback.remove_algorithms),
                "removed_hyperparameter_values": [
                    v.render() for v in feedback.remove_hyperparameter_values
                ],
                "decision": feedback.decision.to_dict(),
            }
            with open(hosted.directory / "interactions.jsonl", "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry) + "\n")
            hosted.snapshot_body = None
            hosted.pause_served_at = None
            hosted.published_status = session.status.value
            hosted.resume.set()
            return {
                "applied_removals": {
                    "algorithms": list(feedback.remove_algorithms),
                    "hyperparameter_values": [
                        v.render() for v in feedback.remove_hyperparameter_values
                    ],
                },
                "status": hosted.published_status,
            }

    @app.get("/sessions/{session_id}/result")
    def get_result(session_id: str):
        hosted = _get(session_id)
        with hosted.lock:
            if hosted.published_status != Status.FINISHED.value:
                raise HTTPException(
                    status_code=409,
                    detail=f"session is {hosted.published_status}, not finished",
                )
            if hosted.result_body is None:
                result = hosted.session.result()
                record = result.archive.evaluation
                payload = {
                    "archive": {
                        "workflow": result.archive.workflow.canonical_key,
                        "fitness": record.fitness,
                        "eval_time": record.eval_time,
                    },
                    "cumulative_eval_time": result.cumulative_eval_time,
                    "generations": result.generations,
                    "interactions_used": result.interactions_used,
                    "logs": {
                        "run": str(hosted.directory / "run.jsonl"),
                        "interactions": str(hosted.directory / "interactions.jsonl"),
                    },
                }
                hosted.result_body = json.dumps(payload).encode("utf-8")
            return Response(content=hosted.result_body, media_type="application/json")

    @app.get("/sessions/{session_id}/timeline")
    def get_timeline(session_id: str):
        hosted = _get(session_id)
        session = hosted.session
        timeline = list(session.timeline) if session is not None else []
        return {
            "timeline": timeline,
            "baseline_timeline": hosted.baseline_timeline,
        }

    return app


def serve(host: str = "127.0.0.1", port: int = 8000, workdir: str | Path = ".") -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(workdir), host=host, port=port, log_level="warning")
