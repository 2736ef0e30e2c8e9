"""HTTP facade over the search engine.

Sessions live in memory with TTL eviction and an optional JSON snapshot
written on graceful shutdown and restored at startup. The index and model
are shared read-only; operations on a single session are serialized by a
per-session lock while distinct sessions proceed concurrently.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .corpus import TokenizerConfig
from .embeddings import EmbeddingModel, SentenceIndex
from .search import (
    EXPORT_FORMATS,
    SearchMode,
    Session,
    ValidationError,
    create_session,
    export,
    next_results,
    record_feedback,
)

logger = logging.getLogger("corpusloop.service")

EXPORT_CONTENT_TYPES = {
    "txt": "text/plain; charset=utf-8",
    "csv": "text/csv; charset=utf-8",
    "json": "application/json",
}


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    index_path: str = ""
    model_path: str = ""
    default_k: int = 5
    default_mode: str = "embedding"
    default_alpha: float = 0.5
    session_ttl: float = 24 * 3600.0
    snapshot_path: str | None = None
    cors_origins: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValueError("port must be in [1, 65535]")
        if self.default_k < 1:
            raise ValueError("default_k must be at least 1")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _session_to_dict(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "query_text": session.query_text,
        "query_tokens": list(session.query_tokens),
        "query_vector": None if session.query_vector is None
        else [float(x) for x in session.query_vector],
        "k": session.k,
        "mode": {"kind": session.mode.kind, "alpha": session.mode.alpha},
        "relevant": sorted(session.relevant),
        "irrelevant": sorted(session.irrelevant),
        "shown": sorted(session.shown),
        "relevant_order": list(session.relevant_order),
        "rounds": session.rounds,
        "created_at": session.created_at,
        "tokenizer": {
            "lowercase": session.tokenizer_config.lowercase,
            "strip_punctuation": session.tokenizer_config.strip_punctuation,
        },
    }


def _session_from_dict(data: dict) -> Session:
    vector = data["query_vector"]
    return Session(
        session_id=data["session_id"],
        query_text=data["query_text"],
        query_tokens=list(data["query_tokens"]),
        query_vector=None if vector is None else np.asarray(vector, dtype=np.float64),
        k=int(data["k"]),
        mode=SearchMode(kind=data["mode"]["kind"], alpha=float(data["mode"]["alpha"])),
        relevant=set(data["relevant"]),
        irrelevant=set(data["irrelevant"]),
        shown=set(data["shown"]),
        created_at=float(data["created_at"]),
        tokenizer_config=TokenizerConfig(
            lowercase=data["tokenizer"]["lowercase"],
            strip_punctuation=data["tokenizer"]["strip_punctuation"],
        ),
        relevant_order=list(data["relevant_order"]),
        rounds=int(data["rounds"]),
    )


class SessionStore:
    """In-memory session map with TTL eviction and JSON snapshots."""

    def __init__(self, ttl: float, snapshot_path: str | None, corpus_sentences: int):
        self._ttl = ttl
        self._snapshot_path = snapshot_path
        self._corpus_sentences = corpus_sentences
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._last_access: dict[str, float] = {}

    def _evict_expired(self, now: float) -> None:
        expired = [sid for sid, t in self._last_access.items() if now - t > self._ttl]
        for sid in expired:
            del self._sessions[sid], self._locks[sid], self._last_access[sid]

    def put(self, session: Session) -> None:
        now = time.time()
        with self._lock:
            self._evict_expired(now)
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()
            self._last_access[session.session_id] = now

    def get(self, session_id: str) -> tuple[Session, threading.Lock]:
        now = time.time()
        with self._lock:
            self._evict_expired(now)
            session = self._sessions.get(session_id)
            if session is None:
                raise ApiError(404, "session_not_found", f"unknown session {session_id}")
            self._last_access[session_id] = now
            return session, self._locks[session_id]

    def snapshot(self) -> None:
        if not self._snapshot_path:
            return
        with self._lock:
            payload = {
                "corpus_sentences": self._corpus_sentences,
                "sessions": [_session_to_dict(s) for s in self._sessions.values()],
            }
        try:
            with open(self._snapshot_path, "w", encoding="utf-8") as fh:
                json.dump(payload, fh)
        except OSError as exc:
            logger.error("could not write session snapshot to %s: %s",
                         self._snapshot_path, exc)

    def restore(self) -> None:
        if not self._snapshot_path:
            return
        try:
            with open(self._snapshot_path, encoding="utf-8") as fh:
                payload = json.load(fh)
            if payload.get("corpus_sentences") != self._corpus_sentences:
                logger.warning("snapshot was taken against a different index "
                               "(%s sentences vs %s); starting with no sessions",
                               payload.get("corpus_sentences"), self._corpus_sentences)
                return
            sessions = [_session_from_dict(d) for d in payload["sessions"]]
        except FileNotFoundError:
            return
        except (OSError, ValueError, KeyError, TypeError) as exc:
            logger.warning("ignoring unreadable session snapshot %s: %s",
                           self._snapshot_path, exc)
            return
        for session in sessions:
            self.put(session)


class CreateSessionRequest(BaseModel):
    query: str
    k: int | None = None
    mode: str | None = None
    alpha: float | None = None


class Judgment(BaseModel):
    sentence_id: int
    relevant: bool


class FeedbackRequest(BaseModel):
    judgments: list[Judgment]


def _results_json(results) -> list[dict]:
    return [
        {"id": r.sentence_id, "text": r.text, "score": r.score, "rank": r.rank}
        for r in results
    ]


def create_app(index: SentenceIndex, model: EmbeddingModel,
               config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = SessionStore(config.session_ttl, config.snapshot_path, len(index.entries))

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        store.restore()
        yield
        store.snapshot()

    app = FastAPI(title="corpusloop", lifespan=lifespan)
    app.state.session_store = store
    if config.cors_origins:
        app.add_middleware(CORSMiddleware, allow_origins=config.cors_origins,
                           allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": {"code": exc.code, "message": exc.message}})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": {"code": "bad_request", "message": str(exc)}})

    @app.post("/api/sessions", status_code=201)
    def post_session(req: CreateSessionRequest):
        k = req.k if req.k is not None else config.default_k
        if k < 1:
            raise ApiError(400, "bad_request", "k must be at least 1")
        mode_kind = req.mode if req.mode is not None else config.default_mode
        if mode_kind not in ("embedding", "fuzzy", "hybrid"):
            raise ApiError(422, "unknown_mode", f"unknown search mode {mode_kind!r}")
        alpha = req.alpha if req.alpha is not None else config.default_alpha
        try:
            session = create_session(index, model, req.query,
                                     mode=SearchMode(mode_kind, alpha), k=k)
        except ValidationError as exc:
            raise ApiError(400, "bad_request", str(exc))
        results = next_results(session, index, model)
        store.put(session)
        return {"session_id": session.session_id, "results": _results_json(results)}

    @app.post("/api/sessions/{session_id}/feedback")
    def post_feedback(session_id: str, req: FeedbackRequest):
        session, lock = store.get(session_id)
        with lock:
            for j in req.judgments:
                if j.sentence_id not in session.shown:
                    raise ApiError(409, "unshown_sentence",
                                   f"sentence {j.sentence_id} was never shown in this session")
            for j in req.judgments:
                record_feedback(session, j.sentence_id, j.relevant)
            return {"relevant_count": len(session.relevant),
                    "irrelevant_count": len(session.irrelevant)}

    @app.post("/api/sessions/{session_id}/more")
    def post_more(session_id: str):
        session, lock = store.get(session_id)
        with lock:
            results = next_results(session, index, model)
        return {"results": _results_json(results)}

    @app.get("/api/sessions/{session_id}/export")
    def get_export(session_id: str, format: str = "txt"):
        if format not in EXPORT_FORMATS:
            raise ApiError(400, "bad_format", f"unknown export format {format!r}")
        session, lock = store.get(session_id)
        with lock:
            body = export(session, index, format)
        filename = f"session-{session_id}.{format}"
        return Response(content=body, media_type=EXPORT_CONTENT_TYPES[format],
                        headers={"Content-Disposition": f'attachment; filename="{filename}"'})

    @app.get("/api/health")
    def get_health():
        return {"status": "ok", "corpus_sentences": len(index.entries), "dim": model.dim}

    return app
