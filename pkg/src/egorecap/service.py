"""HTTP session service: ingest, summarize, query, and fetch artifacts.

The service owns no state beyond a session-root directory; every response is
reconstructable from the files a session persists, so restarting the process
returns byte-identical artifact responses. Providers are attached at app
construction (or via the ``EGORECAP_PROVIDERS`` endpoint variable); when a
required provider is missing the affected operation answers 503 naming the
role, while archive-backed operations keep working.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel

from .errors import (
    ConfigError,
    IngestError,
    PipelineError,
    ProviderError,
    ValidationError,
)
from .ingest import MANIFEST_NAME, Session, ingest_video, list_sessions
from .model import config_from_mapping
from .pipeline import (
    GENERIC_KEYS,
    MODALITIES,
    latency_report,
    run_generic,
    run_query,
)
from .providers.base import ProviderSet
from .providers.wire import http_provider_set

PROVIDER_ENDPOINT_ENV = "EGORECAP_PROVIDERS"
MAX_QUERY_CHARS = 1024

_MEDIA_TYPES = {
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".png": "image/png",
    ".ppm": "image/x-portable-pixmap",
    ".bmp": "image/bmp",
    ".webp": "image/webp",
}


class IngestBody(BaseModel):
    id: str
    source: str
    native_fps: Optional[float] = None
    config: Optional[dict] = None
    extractor: Optional[str] = None


class QueryBody(BaseModel):
    text: str
    modality: str = "storyboard"


def providers_from_env() -> ProviderSet:
    endpoint = os.environ.get(PROVIDER_ENDPOINT_ENV)
    if endpoint:
        return http_provider_set(endpoint)
    return ProviderSet()


def create_app(
    root: Path | str,
    providers: Optional[ProviderSet] = None,
) -> FastAPI:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    providers = providers if providers is not None else providers_from_env()

    app = FastAPI(title="egorecap", version="1.0")
    # browser consoles are served as static files from another origin; the
    # API carries no credentials, so a blanket allow is safe
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, Session] = {}
    query_slots: dict[str, threading.Semaphore] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> Session:
        with registry_lock:
            if session_id in sessions:
                return sessions[session_id]
        path = root / session_id
        if not (path / MANIFEST_NAME).exists():
            raise HTTPException(404, f"unknown session {session_id!r}")
        loaded = Session.load(path)
        with registry_lock:
            return sessions.setdefault(session_id, loaded)

    def query_slot(session_id: str) -> threading.Semaphore:
        joint = providers.joint_embedding
        limit = max(1, joint.descriptor.max_inflight) if joint is not None else 4
        with registry_lock:
            return query_slots.setdefault(session_id, threading.Semaphore(limit))

    def session_detail(session: Session) -> dict:
        manifest = json.loads((session.root / MANIFEST_NAME).read_text())
        manifest["artifacts"] = session.artifact_keys()
        manifest["generic_ready"] = all(
            session.has_artifact(k) for k in GENERIC_KEYS.values()
        )
        return manifest

    # ------------------------------------------------------------- errors

    @app.exception_handler(PipelineError)
    def handle_pipeline(_request, exc: PipelineError):
        return JSONResponse(status_code=503,
                            content={"detail": str(exc), "role": exc.role})

    @app.exception_handler(ProviderError)
    def handle_provider(_request, exc: ProviderError):
        return JSONResponse(
            status_code=503,
            content={"detail": str(exc), "role": exc.role,
                     "retryable": exc.retryable},
        )

    @app.exception_handler(ValidationError)
    def handle_validation(_request, exc: ValidationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ConfigError)
    def handle_config(_request, exc: ConfigError):
        return JSONResponse(status_code=422,
                            content={"detail": str(exc),
                                     "violations": exc.violations})

    @app.exception_handler(IngestError)
    def handle_ingest(_request, exc: IngestError):
        return JSONResponse(status_code=400,
                            content={"detail": str(exc),
                                     "diagnostics": exc.diagnostics})

    # ---------------------------------------------------------- endpoints

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "sessions": list_sessions(root),
            "providers": providers.versions(),
        }

    @app.get("/sessions")
    def index_sessions():
        return {
            "sessions": [session_detail(get_session(sid))
                         for sid in list_sessions(root)]
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: IngestBody):
        cfg = config_from_mapping(body.config or {})
        session = ingest_video(root, body.id, body.source,
                               native_fps=body.native_fps, cfg=cfg,
                               template=body.extractor)
        with registry_lock:
            sessions[body.id] = session
        return session_detail(session)

    @app.get("/sessions/{session_id}")
    def show_session(session_id: str):
        return session_detail(get_session(session_id))

    @app.post("/sessions/{session_id}/generic")
    def generic(session_id: str, force: bool = False):
        session = get_session(session_id)
        result = run_generic(session, providers, force=force)
        return {
            "keys": GENERIC_KEYS,
            "cached": result.cached,
            "storyboard_entries": len(result.storyboard.entries),
            "skim_total_s": result.skim.total_s,
            "text_available": result.text is not None,
            "text_error": result.text_error,
        }

    @app.post("/sessions/{session_id}/query")
    def query(session_id: str, body: QueryBody):
        if not body.text.strip():
            raise HTTPException(422, "query text must be non-empty")
        if len(body.text) > MAX_QUERY_CHARS:
            raise HTTPException(
                422, f"query text exceeds {MAX_QUERY_CHARS} characters"
            )
        if body.modality not in MODALITIES:
            raise HTTPException(
                422, f"modality must be one of {', '.join(MODALITIES)}"
            )
        session = get_session(session_id)
        with query_slot(session_id):
            result = run_query(session, body.text, body.modality, providers)
        return {
            "key": result.key,
            "modality": result.modality,
            "query": result.query,
            "cached": result.cached,
            "document": result.document,
            "latency": result.latency,
        }

    @app.get("/sessions/{session_id}/artifacts/{key}")
    def artifact(session_id: str, key: str):
        session = get_session(session_id)
        if not session.has_artifact(key):
            if key in GENERIC_KEYS.values():
                raise HTTPException(
                    409,
                    f"generic summary not generated yet; "
                    f"POST /sessions/{session_id}/generic first",
                )
            raise HTTPException(404, f"no artifact {key!r}")
        document, meta = session.load_artifact(key)
        return {"key": key, "document": document, "meta": meta}

    @app.get("/sessions/{session_id}/frames/{stream}/{index}")
    def frame(session_id: str, stream: str, index: int):
        session = get_session(session_id)
        try:
            path = session.frame_path(stream, index)
        except (IngestError, ValidationError) as exc:
            raise HTTPException(404, str(exc))
        if path is None or not path.exists():
            raise HTTPException(
                404, f"stream {stream!r} has no image for frame {index}"
            )
        media = _MEDIA_TYPES.get(path.suffix.lower(), "application/octet-stream")
        return FileResponse(path, media_type=media)

    @app.get("/sessions/{session_id}/latency")
    def latency(session_id: str):
        session = get_session(session_id)
        return {
            "report": latency_report(session),
            "records": len(session.latency_records()),
        }

    return app


def serve(
    root: Path | str,
    host: str = "127.0.0.1",
    port: int = 8000,
    providers: Optional[ProviderSet] = None,
):
    """Blocking entry point used by the CLI."""
    import uvicorn

    uvicorn.run(create_app(root, providers), host=host, port=port)
