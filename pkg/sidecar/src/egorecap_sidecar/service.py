"""HTTP face of the sidecar: ``GET /healthz`` and ``POST /invoke``.

``dispatch`` routes one decoded envelope to a backend and wraps the outcome,
never letting an exception escape as anything but a protocol error envelope:

* ``bad_request`` — the envelope or payload is malformed, the role/op is
  unknown, or the named role is not served here;
* ``contract`` — a served role refused an exchange that violates its declared
  contract (wrong segment length, empty caption text);
* ``model`` — the backing model failed; memory exhaustion is retryable.

Backends whose ``serialize`` flag is set share one work lock, so GPU-bound
calls run one at a time no matter how many requests the server accepts; the
``describe`` op advertises each backend's ``max_inflight`` so a polite client
can stop before queueing here.
"""

from __future__ import annotations

import threading
from typing import Callable, Mapping

import numpy as np

from .protocol import (
    ERROR_BAD_REQUEST,
    ERROR_MODEL,
    PROTOCOL_VERSION,
    ROLES,
    BadRequest,
    CaptionCall,
    FrameRef,
    SegmentRef,
    WireFault,
    decode_matrix,
    encode_matrix,
    error_envelope,
    is_memory_exhaustion,
    ok_envelope,
)


def _op_embed_frames(backend, payload: dict) -> dict:
    frames = [FrameRef.from_payload(f) for f in payload["frames"]]
    return {"matrix": encode_matrix(np.asarray(backend.embed_frames(frames), dtype=np.float32))}


def _op_embed_segments(backend, payload: dict) -> dict:
    segments = [SegmentRef.from_payload(s) for s in payload["segments"]]
    return {"matrix": encode_matrix(np.asarray(backend.embed_segments(segments), dtype=np.float32))}


def _op_embed_text(backend, payload: dict) -> dict:
    text = payload["text"]
    if not isinstance(text, str) or not text.strip():
        raise BadRequest("text must be a non-empty string")
    return {"vector": encode_matrix(np.asarray(backend.embed_text(text), dtype=np.float32))}


def _op_score_importance(backend, payload: dict) -> dict:
    features = decode_matrix(payload["features"])
    curve = np.asarray(backend.score_importance(features), dtype=np.float64)
    return {"curve": encode_matrix(curve.reshape(-1, 1))}


def _op_caption(backend, payload: dict) -> dict:
    return {"text": backend.caption(CaptionCall.from_payload(payload))}


_OPS: dict[str, Callable] = {
    "embed_frames": _op_embed_frames,
    "embed_segments": _op_embed_segments,
    "embed_text": _op_embed_text,
    "score_importance": _op_score_importance,
    "caption": _op_caption,
}


def _describe(backend) -> dict:
    return {
        "role": backend.role,
        "version": backend.version,
        "dim": backend.dim,
        "max_inflight": backend.max_inflight,
        "protocol": PROTOCOL_VERSION,
    }


def dispatch(backends: Mapping[str, object], request, work_lock=None) -> dict:
    """Answer one envelope; every failure mode has a protocol error kind."""
    if not isinstance(request, dict):
        return error_envelope(ERROR_BAD_REQUEST, "request must be a JSON object")
    op = request.get("op")
    role = request.get("role")
    if not isinstance(op, str) or not isinstance(role, str):
        return error_envelope(ERROR_BAD_REQUEST, "request needs op and role")
    if role not in ROLES:
        return error_envelope(ERROR_BAD_REQUEST, f"unknown role {role!r}")
    backend = backends.get(role)
    if backend is None:
        return error_envelope(ERROR_BAD_REQUEST, f"no backend serves role {role!r}")
    payload = request.get("payload") or {}
    if not isinstance(payload, dict):
        return error_envelope(ERROR_BAD_REQUEST, "payload must be a JSON object")
    try:
        if op == "describe":
            result = _describe(backend)
        else:
            handler = _OPS.get(op)
            if handler is None:
                raise BadRequest(f"unknown op {op!r}")
            if not hasattr(backend, op):
                raise BadRequest(f"role {role!r} does not serve op {op!r}")
            if getattr(backend, "serialize", False) and work_lock is not None:
                with work_lock:
                    result = handler(backend, payload)
            else:
                result = handler(backend, payload)
    except WireFault as exc:
        return error_envelope(exc.kind, str(exc), retryable=exc.retryable)
    except (KeyError, TypeError, ValueError) as exc:
        return error_envelope(ERROR_BAD_REQUEST, f"malformed payload: {exc}")
    except Exception as exc:  # a model blew up: name the role, mark exhaustion
        return error_envelope(
            ERROR_MODEL,
            f"{role}: {type(exc).__name__}: {exc}",
            retryable=is_memory_exhaustion(exc),
        )
    return ok_envelope(result)


def build_app(backends: Mapping[str, object]):
    """An ASGI app serving the protocol for the given role→backend mapping."""
    from fastapi import FastAPI
    from fastapi.responses import JSONResponse

    app = FastAPI(title="egorecap-sidecar")
    work_lock = threading.Lock()

    @app.get("/healthz")
    def healthz():
        roles = [r for r in ROLES if r in backends]
        return {"status": "ok", "roles": roles, "protocol": PROTOCOL_VERSION}

    # registered as a raw route: the body is protocol-framed JSON, and even a
    # malformed body must answer with an in-band protocol error
    async def invoke(request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(error_envelope(ERROR_BAD_REQUEST, "body is not valid JSON"))
        return JSONResponse(dispatch(backends, body, work_lock))

    app.add_route("/invoke", invoke, methods=["POST"])
    return app
