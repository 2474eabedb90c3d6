"""HTTP facade over the feedback module for live interactive sessions.

Endpoints:
    POST /sessions                   create a session from a run file
    GET  /sessions/{id}              session metadata, label log, recommendations
    POST /sessions/{id}/labels       apply a label batch
    GET  /sessions/{id}/ranking      current ranking (optionally truncated)
    GET  /sessions/{id}/export       trec-style run bytes of the current ranking
    GET  /assets/keyframes/{shot_id} keyframe thumbnail or 404

Sessions live in memory; label posts are serialized per session, reads are
lock-free snapshots.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel

from . import fileio
from .errors import InsfuseError, ValidationError
from .feedback import CaafParams, Label, TopKStrategy
from .models import FeatureTable
from .session import STRATEGY_CAAF, STRATEGY_TOPK, FeedbackSession


class StrategyBody(BaseModel):
    kind: str
    k: int | None = None
    mode: str | None = None
    a_probe: int | None = None
    n_gallery: int | None = None
    beta: float | str | None = None
    lam: float | None = None
    batch: int | None = None
    max_sweeps: int | None = None
    tol: float | None = None


class CreateSessionBody(BaseModel):
    run: str
    topic_id: str
    strategy: StrategyBody
    features: str | None = None


class LabelBody(BaseModel):
    shot_id: str
    polarity: str


class PostLabelsBody(BaseModel):
    labels: list[LabelBody]


@dataclass
class SessionRecord:
    session_id: str
    topic_id: str
    strategy: dict
    inner: FeedbackSession
    version: int = 0
    rounds: int = 0
    label_log: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _error(status: int, code: str, detail: Any = None) -> JSONResponse:
    payload = {"code": code}
    if detail is not None:
        payload["detail"] = detail
    return JSONResponse(status_code=status, content=payload)


def _strategy_params(body: StrategyBody) -> tuple[TopKStrategy | None, CaafParams | None]:
    if body.kind == STRATEGY_TOPK:
        kwargs = {}
        if body.k is not None:
            kwargs["k"] = body.k
        if body.mode is not None:
            kwargs["mode"] = body.mode
        return TopKStrategy(**kwargs), None
    if body.kind == STRATEGY_CAAF:
        kwargs = {}
        for name, attr in (
            ("a_probe", "a_probe"), ("n_gallery", "n_gallery"), ("beta", "beta"),
            ("lam", "lam"), ("batch", "batch"), ("max_sweeps", "max_sweeps"), ("tol", "tol"),
        ):
            value = getattr(body, attr)
            if value is not None:
                kwargs[name] = value
        return None, CaafParams(**kwargs)
    raise ValidationError(f"unknown strategy kind {body.kind!r}")


def create_app(data_dir: str | Path = ".", assets_dir: str | Path | None = None) -> FastAPI:
    data_dir = Path(data_dir)
    assets_dir = Path(assets_dir) if assets_dir else None
    app = FastAPI(title="insfuse session service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, SessionRecord] = {}
    registry_lock = threading.Lock()

    def resolve(path_str: str) -> Path:
        path = Path(path_str)
        return path if path.is_absolute() else data_dir / path

    def session_or_none(session_id: str) -> SessionRecord | None:
        return sessions.get(session_id)

    def view(record: SessionRecord) -> dict:
        return {
            "session_id": record.session_id,
            "topic_id": record.topic_id,
            "strategy": record.strategy,
            "version": record.version,
            "rounds": record.rounds,
            # Chronological accepted-label history; the latest entry per shot
            # is the effective polarity.
            "labels": [label for entry in record.label_log for label in entry["accepted"]],
            "recommendations": record.inner.recommendations(),
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        run_path = resolve(body.run)
        if not run_path.exists():
            return _error(404, "unknown_run", str(run_path))
        try:
            rankings = fileio.read_run(run_path)
        except InsfuseError as err:
            return _error(422, "bad_run", str(err))
        ranking = next((r for r in rankings if r.topic_id == body.topic_id), None)
        if ranking is None:
            return _error(404, "unknown_topic", body.topic_id)
        try:
            topk, caaf_params = _strategy_params(body.strategy)
        except InsfuseError as err:
            return _error(422, "bad_strategy", str(err))

        features: FeatureTable | None = None
        if body.strategy.kind == STRATEGY_CAAF:
            features_path = resolve(body.features) if body.features else data_dir / "features.tsv"
            if not features_path.exists():
                return _error(422, "missing_features", str(features_path))
            try:
                features = fileio.load_features(features_path)
            except InsfuseError as err:
                return _error(422, "bad_features", str(err))
        try:
            inner = FeedbackSession.start(
                body.strategy.kind, ranking, topk=topk, caaf_params=caaf_params, features=features
            )
        except InsfuseError as err:
            return _error(422, "missing_features" if "features" in str(err) else "bad_strategy", str(err))

        record = SessionRecord(
            session_id=uuid.uuid4().hex,
            topic_id=body.topic_id,
            strategy=body.strategy.model_dump(exclude_none=True),
            inner=inner,
        )
        with registry_lock:
            sessions[record.session_id] = record
        return {"session_id": record.session_id, "recommendations": inner.recommendations()}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        record = session_or_none(session_id)
        if record is None:
            return _error(404, "unknown_session", session_id)
        return view(record)

    @app.post("/sessions/{session_id}/labels")
    def post_labels(session_id: str, body: PostLabelsBody):
        record = session_or_none(session_id)
        if record is None:
            return _error(404, "unknown_session", session_id)
        try:
            batch = [Label(lb.shot_id, lb.polarity) for lb in body.labels]
        except InsfuseError as err:
            return _error(422, "bad_label", str(err))
        started = time.time()
        with record.lock:
            accepted, rejected = record.inner.post(batch)
            record.version += 1
            record.rounds += 1
            record.label_log.append(
                {
                    "round": record.rounds,
                    "timestamp": started,
                    "elapsed_s": time.time() - started,
                    "labels": [{"shot_id": lb.shot_id, "polarity": lb.polarity} for lb in batch],
                    "accepted": [{"shot_id": lb.shot_id, "polarity": lb.polarity} for lb in accepted],
                    "rejected": [{"shot_id": lb.shot_id, "polarity": lb.polarity} for lb in rejected],
                }
            )
            return {
                "version": record.version,
                "recommendations": record.inner.recommendations(),
                "rejected": [{"shot_id": lb.shot_id, "polarity": lb.polarity} for lb in rejected],
            }

    @app.get("/sessions/{session_id}/ranking")
    def get_ranking(session_id: str, limit: int | None = Query(default=None, ge=1)):
        record = session_or_none(session_id)
        if record is None:
            return _error(404, "unknown_session", session_id)
        ranking = record.inner.current
        entries = ranking.entries[:limit] if limit else ranking.entries
        return {
            "session_id": session_id,
            "topic_id": ranking.topic_id,
            "version": record.version,
            "entries": [
                {"shot_id": shot_id, "score": score, "rank": rank}
                for rank, (shot_id, score) in enumerate(entries, start=1)
            ],
        }

    @app.get("/sessions/{session_id}/export")
    def export_run(session_id: str):
        record = session_or_none(session_id)
        if record is None:
            return _error(404, "unknown_session", session_id)
        data = fileio.write_run(record.inner.current)
        return Response(content=data, media_type="text/plain")

    @app.get("/assets/keyframes/{shot_id}")
    def get_keyframe(shot_id: str):
        if assets_dir is None:
            return _error(404, "unknown_asset", shot_id)
        path = assets_dir / f"{shot_id}.jpg"
        if not path.exists():
            return _error(404, "unknown_asset", shot_id)
        return FileResponse(path, media_type="image/jpeg")

    return app


def serve(host: str, port: int, data_dir: str | Path, assets_dir: str | Path | None) -> None:
    import uvicorn

    uvicorn.run(create_app(data_dir, assets_dir), host=host, port=port, log_level="warning")
