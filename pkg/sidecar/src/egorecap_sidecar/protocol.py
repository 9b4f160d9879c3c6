"""The provider wire protocol, implemented from the sidecar's side.

Every request is one JSON envelope ``{"op": ..., "role": ..., "payload":
{...}}`` and every answer is ``{"ok": true, "result": {...}}`` or ``{"ok":
false, "error": {"kind", "message", "retryable"}}``. Matrices travel as
base64-encoded little-endian float32 with an explicit shape, so a response
can be checked byte for byte.

This module deliberately does not import the engine: the sidecar must run on
machines where only the models are installed. The engine's own protocol
conformance suite (exercised in this package's tests) keeps the two
implementations agreeing.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass
from typing import Optional

import numpy as np

PROTOCOL_VERSION = 1

ROLE_FRAME_FEATURES = "frame_features"
ROLE_IMPORTANCE = "importance"
ROLE_JOINT_EMBEDDING = "joint_embedding"
ROLE_CAPTIONER = "captioner"

ROLES = (ROLE_FRAME_FEATURES, ROLE_IMPORTANCE, ROLE_JOINT_EMBEDDING, ROLE_CAPTIONER)

ERROR_BAD_REQUEST = "bad_request"
ERROR_CONTRACT = "contract"
ERROR_MODEL = "model"
ERROR_TRANSPORT = "transport"

MATRIX_ENCODING = "b64/f32le"

DEFAULT_CAPTION_FRAME_CAP = 100


# ------------------------------------------------------------------- errors

class WireFault(Exception):
    """A failure that must answer in-band as a protocol error envelope."""

    kind = ERROR_MODEL

    def __init__(self, message: str, retryable: bool = False):
        super().__init__(message)
        self.retryable = retryable


class BadRequest(WireFault):
    """The caller sent something the protocol does not allow."""

    kind = ERROR_BAD_REQUEST


class ContractBreach(WireFault):
    """The exchange violated a declared role contract (shape, length, text)."""

    kind = ERROR_CONTRACT


class ModelFault(WireFault):
    """The backing model failed; ``retryable`` marks transient exhaustion."""

    kind = ERROR_MODEL


def is_memory_exhaustion(exc: BaseException) -> bool:
    """True for the failures a caller should retry once pressure clears."""
    if isinstance(exc, MemoryError):
        return True
    if type(exc).__name__ == "OutOfMemoryError":
        return True
    return "out of memory" in str(exc).lower()


def ok_envelope(result: dict) -> dict:
    return {"ok": True, "result": result}


def error_envelope(kind: str, message: str, retryable: bool = False) -> dict:
    return {
        "ok": False,
        "error": {"kind": kind, "message": message, "retryable": retryable},
    }


# ----------------------------------------------------------------- matrices

def encode_matrix(values: np.ndarray) -> dict:
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise BadRequest(f"cannot encode array of rank {arr.ndim}")
    return {
        "rows": int(arr.shape[0]),
        "dim": int(arr.shape[1]),
        "encoding": MATRIX_ENCODING,
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def decode_matrix(doc: dict) -> np.ndarray:
    if not isinstance(doc, dict):
        raise BadRequest("matrix must be a JSON object")
    if doc.get("encoding") != MATRIX_ENCODING:
        raise BadRequest(f"unsupported matrix encoding {doc.get('encoding')!r}")
    rows, dim = int(doc["rows"]), int(doc["dim"])
    raw = base64.b64decode(doc["data"])
    expected = rows * dim * 4
    if len(raw) != expected:
        raise BadRequest(f"matrix body holds {len(raw)} bytes, shape says {expected}")
    return np.frombuffer(raw, dtype="<f4").reshape(rows, dim).copy()


# ------------------------------------------------------------------ handles

@dataclass(frozen=True)
class FrameRef:
    """One frame of a stream: position, stream rate, optional image locator."""

    index: int
    rate: float
    image: Optional[str] = None

    @property
    def timestamp_s(self) -> float:
        return self.index / self.rate

    @classmethod
    def from_payload(cls, doc: dict) -> "FrameRef":
        return cls(index=int(doc["index"]), rate=float(doc["rate"]), image=doc.get("image"))


@dataclass(frozen=True)
class SegmentRef:
    """A fixed-length clip as a frame range, with optional per-frame images."""

    start: int
    end: int
    rate: float
    images: Optional[tuple[str, ...]] = None

    @property
    def duration_s(self) -> float:
        return (self.end - self.start) / self.rate

    @classmethod
    def from_payload(cls, doc: dict) -> "SegmentRef":
        images = doc.get("images")
        return cls(
            start=int(doc["start"]),
            end=int(doc["end"]),
            rate=float(doc["rate"]),
            images=tuple(images) if images is not None else None,
        )


@dataclass(frozen=True)
class CaptionCall:
    """A capped frame sample plus prompt, length knob, and optional query."""

    frames: tuple[FrameRef, ...]
    prompt: str
    length_penalty: float
    query: Optional[str] = None
    frame_cap: int = DEFAULT_CAPTION_FRAME_CAP

    @classmethod
    def from_payload(cls, doc: dict) -> "CaptionCall":
        call = cls(
            frames=tuple(FrameRef.from_payload(f) for f in doc["frames"]),
            prompt=doc["prompt"],
            length_penalty=float(doc["length_penalty"]),
            query=doc.get("query"),
            frame_cap=int(doc.get("frame_cap", DEFAULT_CAPTION_FRAME_CAP)),
        )
        if not isinstance(call.prompt, str) or not call.prompt.strip():
            raise BadRequest("caption prompt must be non-empty")
        if len(call.frames) > call.frame_cap:
            raise BadRequest(
                f"caption request carries {len(call.frames)} frames, "
                f"cap is {call.frame_cap}"
            )
        return call
