"""Wire protocol for out-of-process providers.

One request shape everywhere: ``{"op": ..., "role": ..., "payload": {...}}``,
answered by ``{"ok": true, "result": {...}}`` or ``{"ok": false, "error":
{"kind", "message", "retryable"}}``. Matrices travel as base64-encoded
little-endian float32 with explicit shape, so a response is byte-checkable.

Two transports speak it:

* subprocess-stdio — each message is a 4-byte little-endian length prefix
  followed by UTF-8 JSON, one request in flight at a time;
* http — the same JSON POSTed to ``/invoke``; protocol-level failures ride
  in-band in the envelope, transport failures surface as HTTP errors.

``dispatch`` is the server half, shared by the stdio loop and the ASGI app.
"""

from __future__ import annotations

import base64
import json
import struct
import subprocess
import threading
from typing import BinaryIO, Optional

import numpy as np

from ..errors import ContractViolation, ProviderError, ValidationError
from .base import (
    ROLES,
    CaptionRequest,
    FrameHandle,
    ProviderDescriptor,
    ProviderSet,
    SegmentHandle,
)

PROTOCOL_VERSION = 1
MAX_MESSAGE_BYTES = 1 << 30

_LEN = struct.Struct("<I")

ERROR_BAD_REQUEST = "bad_request"
ERROR_CONTRACT = "contract"
ERROR_MODEL = "model"
ERROR_TRANSPORT = "transport"


# ------------------------------------------------------------------ encoding

def encode_matrix(values: np.ndarray) -> dict:
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValidationError(f"cannot encode array of rank {arr.ndim}")
    return {
        "rows": int(arr.shape[0]),
        "dim": int(arr.shape[1]),
        "encoding": "b64/f32le",
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def decode_matrix(doc: dict) -> np.ndarray:
    if doc.get("encoding") != "b64/f32le":
        raise ProviderError(
            f"unsupported matrix encoding {doc.get('encoding')!r}", retryable=False
        )
    rows, dim = int(doc["rows"]), int(doc["dim"])
    raw = base64.b64decode(doc["data"])
    expected = rows * dim * 4
    if len(raw) != expected:
        raise ProviderError(
            f"matrix body holds {len(raw)} bytes, shape says {expected}",
            retryable=False,
        )
    return np.frombuffer(raw, dtype="<f4").reshape(rows, dim).copy()


# ------------------------------------------------------------------ server

def _error_response(kind: str, message: str, retryable: bool = False) -> dict:
    return {
        "ok": False,
        "error": {"kind": kind, "message": message, "retryable": retryable},
    }


def dispatch(providers: ProviderSet, request: dict) -> dict:
    """Route one decoded request to a provider and wrap the outcome."""
    try:
        op = request["op"]
        role = request["role"]
        payload = request.get("payload", {})
    except (TypeError, KeyError):
        return _error_response(ERROR_BAD_REQUEST, "request needs op and role")
    if role not in ROLES:
        return _error_response(ERROR_BAD_REQUEST, f"unknown role {role!r}")
    provider = providers.get(role)
    if provider is None:
        return _error_response(ERROR_BAD_REQUEST, f"no provider serves role {role!r}")
    try:
        result = _invoke(provider, op, payload)
    except ContractViolation as exc:
        return _error_response(ERROR_CONTRACT, str(exc))
    except ValidationError as exc:
        return _error_response(ERROR_BAD_REQUEST, str(exc))
    except ProviderError as exc:
        return _error_response(ERROR_MODEL, str(exc), retryable=exc.retryable)
    except (KeyError, TypeError, ValueError) as exc:
        return _error_response(ERROR_BAD_REQUEST, f"malformed payload: {exc}")
    return {"ok": True, "result": result}


def _invoke(provider, op: str, payload: dict) -> dict:
    desc: ProviderDescriptor = provider.descriptor
    if op == "describe":
        return {
            "role": desc.role,
            "version": desc.version,
            "dim": desc.dim,
            "max_inflight": desc.max_inflight,
            "protocol": PROTOCOL_VERSION,
        }
    if op == "embed_frames":
        frames = [FrameHandle.from_payload(f) for f in payload["frames"]]
        return {"matrix": encode_matrix(provider.embed_frames(frames))}
    if op == "embed_segments":
        segments = [SegmentHandle.from_payload(s) for s in payload["segments"]]
        return {"matrix": encode_matrix(provider.embed_segments(segments))}
    if op == "embed_text":
        text = payload["text"]
        if not isinstance(text, str) or not text.strip():
            raise ValidationError("text must be a non-empty string")
        return {"vector": encode_matrix(provider.embed_text(text))}
    if op == "score_importance":
        features = decode_matrix(payload["features"])
        curve = np.asarray(provider.score_importance(features), dtype=np.float64)
        return {"curve": encode_matrix(curve.reshape(-1, 1))}
    if op == "caption":
        request = CaptionRequest.from_payload(payload)
        return {"text": provider.caption(request)}
    raise ValidationError(f"unknown op {op!r}")


def read_message(stream: BinaryIO) -> Optional[dict]:
    """Read one framed message; None on clean EOF at a frame boundary."""
    header = stream.read(_LEN.size)
    if not header:
        return None
    if len(header) < _LEN.size:
        raise ProviderError("stream ended inside a frame header", retryable=False)
    (length,) = _LEN.unpack(header)
    if length > MAX_MESSAGE_BYTES:
        raise ProviderError(f"frame of {length} bytes exceeds limit", retryable=False)
    body = stream.read(length)
    if len(body) < length:
        raise ProviderError("stream ended inside a frame body", retryable=False)
    return json.loads(body.decode("utf-8"))


def write_message(stream: BinaryIO, doc: dict):
    data = json.dumps(doc, separators=(",", ":")).encode("utf-8")
    stream.write(_LEN.pack(len(data)))
    stream.write(data)
    stream.flush()


def serve_stdio(providers: ProviderSet, stdin: BinaryIO, stdout: BinaryIO):
    """Answer framed requests until the peer closes its end."""
    while True:
        try:
            request = read_message(stdin)
        except ProviderError as exc:
            write_message(stdout, _error_response(ERROR_TRANSPORT, str(exc)))
            return
        if request is None:
            return
        write_message(stdout, dispatch(providers, request))


def build_provider_app(providers: ProviderSet):
    """A minimal ASGI app serving the protocol at POST /invoke."""
    from fastapi import FastAPI
    from fastapi.responses import JSONResponse

    app = FastAPI(title="egorecap-providers")

    @app.get("/healthz")
    def healthz():
        roles = [r for r in ROLES if providers.get(r) is not None]
        return {"status": "ok", "roles": roles, "protocol": PROTOCOL_VERSION}

    # registered as a raw route: the body is protocol-framed JSON, and even a
    # malformed body must come back as an in-band protocol error
    async def invoke(request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(
                _error_response(ERROR_BAD_REQUEST, "body is not valid JSON")
            )
        if not isinstance(body, dict):
            return JSONResponse(
                _error_response(ERROR_BAD_REQUEST, "body must be a JSON object")
            )
        return JSONResponse(dispatch(providers, body))

    app.add_route("/invoke", invoke, methods=["POST"])
    return app


# ------------------------------------------------------------------ clients

class StdioTransport:
    """Owns a provider subprocess and frames requests over its stdio."""

    kind = "subprocess-stdio"

    def __init__(self, command: list[str]):
        self.endpoint = " ".join(command)
        self._lock = threading.Lock()
        self._proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
        )

    def call(self, op: str, role: str, payload: dict) -> dict:
        with self._lock:
            if self._proc.poll() is not None:
                raise ProviderError(
                    f"provider process exited with {self._proc.returncode}",
                    role=role,
                    retryable=True,
                )
            try:
                write_message(self._proc.stdin, {"op": op, "role": role, "payload": payload})
                response = read_message(self._proc.stdout)
            except (BrokenPipeError, OSError) as exc:
                raise ProviderError(
                    f"provider pipe failed: {exc}", role=role, retryable=True
                ) from exc
        if response is None:
            raise ProviderError(
                "provider closed its stream mid-conversation", role=role, retryable=True
            )
        return _unwrap(response, role)

    def close(self):
        if self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class HttpTransport:
    """POSTs protocol requests to a provider service."""

    kind = "http"

    def __init__(self, endpoint: str, timeout_s: float = 60.0, client=None):
        import httpx

        self.endpoint = endpoint
        self._client = client or httpx.Client(base_url=endpoint, timeout=timeout_s)

    def call(self, op: str, role: str, payload: dict) -> dict:
        import httpx

        try:
            response = self._client.post(
                "/invoke", json={"op": op, "role": role, "payload": payload}
            )
        except httpx.HTTPError as exc:
            raise ProviderError(
                f"provider endpoint unreachable: {exc}", role=role, retryable=True
            ) from exc
        if response.status_code != 200:
            raise ProviderError(
                f"provider endpoint answered HTTP {response.status_code}",
                role=role,
                retryable=response.status_code >= 500,
            )
        return _unwrap(response.json(), role)

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _unwrap(response: dict, role: str) -> dict:
    if not isinstance(response, dict) or "ok" not in response:
        raise ProviderError("malformed provider response", role=role, retryable=False)
    if response["ok"]:
        return response.get("result", {})
    err = response.get("error", {})
    kind = err.get("kind", ERROR_MODEL)
    message = err.get("message", "provider error")
    if kind == ERROR_CONTRACT:
        raise ContractViolation(message, role=role)
    retryable = bool(err.get("retryable", kind == ERROR_TRANSPORT))
    raise ProviderError(message, role=role, retryable=retryable)


class RemoteProvider:
    """Client-side face of one remote role; implements every role method.

    Calling a method the far side does not serve raises the far side's
    bad-request error, so a misplugged role fails loudly, not silently.
    """

    def __init__(self, transport, role: str):
        self._transport = transport
        info = transport.call("describe", role, {})
        if info.get("role") != role:
            raise ContractViolation(
                f"endpoint serves role {info.get('role')!r}, expected {role!r}",
                role=role,
            )
        self.descriptor = ProviderDescriptor(
            role=role,
            transport=transport.kind,
            version=str(info.get("version", "unknown")),
            endpoint=transport.endpoint,
            dim=info.get("dim"),
            max_inflight=int(info.get("max_inflight", 1)),
        )

    def _call(self, op: str, payload: dict) -> dict:
        return self._transport.call(op, self.descriptor.role, payload)

    def embed_frames(self, frames: list[FrameHandle]) -> np.ndarray:
        result = self._call(
            "embed_frames", {"frames": [f.to_payload() for f in frames]}
        )
        return decode_matrix(result["matrix"])

    def embed_segments(self, segments: list[SegmentHandle]) -> np.ndarray:
        result = self._call(
            "embed_segments", {"segments": [s.to_payload() for s in segments]}
        )
        return decode_matrix(result["matrix"])

    def embed_text(self, text: str) -> np.ndarray:
        result = self._call("embed_text", {"text": text})
        return decode_matrix(result["vector"]).ravel()

    def score_importance(self, features: np.ndarray) -> np.ndarray:
        result = self._call("score_importance", {"features": encode_matrix(features)})
        return decode_matrix(result["curve"]).ravel().astype(np.float64)

    def caption(self, request: CaptionRequest) -> str:
        result = self._call("caption", request.to_payload())
        return result["text"]


def connect_stdio(command: list[str], role: str) -> RemoteProvider:
    return RemoteProvider(StdioTransport(command), role)


def connect_http(endpoint: str, role: str, timeout_s: float = 60.0) -> RemoteProvider:
    return RemoteProvider(HttpTransport(endpoint, timeout_s=timeout_s), role)


def http_provider_set(
    endpoint: str, roles: tuple[str, ...] = ROLES, timeout_s: float = 60.0
) -> ProviderSet:
    """Connect every requested role to one endpoint, sharing the HTTP client."""
    transport = HttpTransport(endpoint, timeout_s=timeout_s)
    kwargs = {role: RemoteProvider(transport, role) for role in roles}
    return ProviderSet(**kwargs)
