"""Provider roles, descriptors, and the engine-side operation wrappers.

Four learned-model roles sit behind this boundary: per-frame visual features,
frame-level importance scoring, the joint text/video embedding space, and the
captioner. The engine never imports a model; it talks to provider objects
that implement the role methods, and every response is validated against the
role contract (shape, dimension, finiteness) before it is trusted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Protocol, runtime_checkable

import numpy as np

from ..errors import ContractViolation, ProviderError, ValidationError
from ..model import EmbeddingMatrix, ImportanceCurve

ROLE_FRAME_FEATURES = "frame_features"
ROLE_IMPORTANCE = "importance"
ROLE_JOINT_EMBEDDING = "joint_embedding"
ROLE_CAPTIONER = "captioner"

ROLES = (ROLE_FRAME_FEATURES, ROLE_IMPORTANCE, ROLE_JOINT_EMBEDDING, ROLE_CAPTIONER)

DEFAULT_ROLE_DIMS = {
    ROLE_FRAME_FEATURES: 512,
    ROLE_JOINT_EMBEDDING: 768,
}

DEFAULT_CAPTION_FRAME_CAP = 100


@dataclass(frozen=True)
class ProviderDescriptor:
    """Identity and transport of one provider role."""

    role: str
    transport: str  # in-process-fixture | subprocess-stdio | http
    version: str
    endpoint: str = ""
    dim: Optional[int] = None
    max_inflight: int = 1

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValidationError(f"unknown provider role {self.role!r}")


@dataclass(frozen=True)
class FrameHandle:
    """A frame as providers see it: stream position plus optional image locator."""

    index: int
    rate: float
    image: Optional[str] = None

    @property
    def timestamp_s(self) -> float:
        return self.index / self.rate

    def to_payload(self) -> dict:
        return {"index": self.index, "rate": self.rate, "image": self.image}

    @classmethod
    def from_payload(cls, doc: dict) -> "FrameHandle":
        return cls(index=doc["index"], rate=doc["rate"], image=doc.get("image"))


@dataclass(frozen=True)
class SegmentHandle:
    """A fixed-length clip: frame range plus optional per-frame image locators."""

    start: int
    end: int
    rate: float
    images: Optional[tuple[str, ...]] = None

    @property
    def duration_s(self) -> float:
        return (self.end - self.start) / self.rate

    def to_payload(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "rate": self.rate,
            "images": list(self.images) if self.images is not None else None,
        }

    @classmethod
    def from_payload(cls, doc: dict) -> "SegmentHandle":
        images = doc.get("images")
        return cls(
            start=doc["start"], end=doc["end"], rate=doc["rate"],
            images=tuple(images) if images is not None else None,
        )


def uniform_subsample(n: int, cap: int) -> list[int]:
    """Evenly spread ``cap`` indices over ``range(n)``; identity when n <= cap."""
    if n <= cap:
        return list(range(n))
    return [round(i * (n - 1) / (cap - 1)) for i in range(cap)]


@dataclass(frozen=True)
class CaptionRequest:
    """What the captioner receives: capped frame sample, prompt, length knob."""

    frames: tuple[FrameHandle, ...]
    prompt: str
    length_penalty: float
    query: Optional[str] = None
    frame_cap: int = DEFAULT_CAPTION_FRAME_CAP

    def __post_init__(self):
        if not self.prompt.strip():
            raise ValidationError("caption prompt must be non-empty")
        if len(self.frames) > self.frame_cap:
            raise ValidationError(
                f"caption request carries {len(self.frames)} frames, cap is "
                f"{self.frame_cap}"
            )

    def to_payload(self) -> dict:
        return {
            "frames": [f.to_payload() for f in self.frames],
            "prompt": self.prompt,
            "length_penalty": self.length_penalty,
            "query": self.query,
            "frame_cap": self.frame_cap,
        }

    @classmethod
    def from_payload(cls, doc: dict) -> "CaptionRequest":
        return cls(
            frames=tuple(FrameHandle.from_payload(f) for f in doc["frames"]),
            prompt=doc["prompt"],
            length_penalty=doc["length_penalty"],
            query=doc.get("query"),
            frame_cap=doc.get("frame_cap", DEFAULT_CAPTION_FRAME_CAP),
        )


@runtime_checkable
class Provider(Protocol):
    descriptor: ProviderDescriptor


class FrameEmbedder(Protocol):
    descriptor: ProviderDescriptor

    def embed_frames(self, frames: list[FrameHandle]) -> np.ndarray: ...


class JointEmbedder(Protocol):
    descriptor: ProviderDescriptor

    def embed_frames(self, frames: list[FrameHandle]) -> np.ndarray: ...
    def embed_segments(self, segments: list[SegmentHandle]) -> np.ndarray: ...
    def embed_text(self, text: str) -> np.ndarray: ...


class ImportanceScorer(Protocol):
    descriptor: ProviderDescriptor

    def score_importance(self, features: np.ndarray) -> np.ndarray: ...


class Captioner(Protocol):
    descriptor: ProviderDescriptor

    def caption(self, request: CaptionRequest) -> str: ...


@dataclass
class ProviderSet:
    """The four roles an engine run may need; any subset may be absent."""

    frame_features: Optional[FrameEmbedder] = None
    importance: Optional[ImportanceScorer] = None
    joint_embedding: Optional[JointEmbedder] = None
    captioner: Optional[Captioner] = None

    def get(self, role: str):
        return getattr(self, role, None)

    def versions(self) -> dict[str, str]:
        out = {}
        for role in ROLES:
            provider = self.get(role)
            if provider is not None:
                out[role] = provider.descriptor.version
        return out


# ------------------------------------------------------------------ engine ops

def _expect_dim(provider, fallback_role: str) -> int:
    d = provider.descriptor.dim
    if d is not None:
        return d
    return DEFAULT_ROLE_DIMS[fallback_role]


def _check_matrix(raw: np.ndarray, rows: int, dim: int, role: str) -> np.ndarray:
    raw = np.asarray(raw, dtype=np.float32)
    if raw.ndim != 2 or raw.shape != (rows, dim):
        raise ContractViolation(
            f"{role} returned shape {raw.shape}, contract is ({rows}, {dim})",
            role=role,
        )
    if raw.size and not np.isfinite(raw).all():
        raise ContractViolation(f"{role} returned non-finite values", role=role)
    return raw


def embed_frames(provider: FrameEmbedder, frames: list[FrameHandle]) -> EmbeddingMatrix:
    """One row per frame in the provider's declared embedding space."""
    role = provider.descriptor.role
    if role not in (ROLE_FRAME_FEATURES, ROLE_JOINT_EMBEDDING):
        raise ValidationError(f"provider role {role!r} cannot embed frames")
    dim = _expect_dim(provider, role)
    raw = provider.embed_frames(list(frames))
    if len(frames) == 0:
        raw = np.asarray(raw, dtype=np.float32).reshape(0, dim)
    values = _check_matrix(raw, len(frames), dim, role)
    return EmbeddingMatrix(values=values, space=provider.descriptor.version)


def embed_segments(
    provider: JointEmbedder,
    segments: list[SegmentHandle],
    segment_len_s: float,
) -> EmbeddingMatrix:
    """One joint-space row per fixed-length segment."""
    if provider.descriptor.role != ROLE_JOINT_EMBEDDING:
        raise ValidationError("segment embedding requires the joint-embedding role")
    for seg in segments:
        if abs(seg.duration_s - segment_len_s) > 1e-9:
            raise ContractViolation(
                f"segment [{seg.start}, {seg.end}) lasts {seg.duration_s}s, "
                f"provider expects exactly {segment_len_s}s",
                role=ROLE_JOINT_EMBEDDING,
            )
    dim = _expect_dim(provider, ROLE_JOINT_EMBEDDING)
    raw = provider.embed_segments(list(segments))
    if len(segments) == 0:
        raw = np.asarray(raw, dtype=np.float32).reshape(0, dim)
    values = _check_matrix(raw, len(segments), dim, ROLE_JOINT_EMBEDDING)
    return EmbeddingMatrix(values=values, space=provider.descriptor.version)


def embed_text(provider: JointEmbedder, query: str) -> np.ndarray:
    """The query vector in the joint space; empty queries never reach transport."""
    if provider.descriptor.role != ROLE_JOINT_EMBEDDING:
        raise ValidationError("text embedding requires the joint-embedding role")
    if not query or not query.strip():
        raise ValidationError("query must be non-empty")
    dim = _expect_dim(provider, ROLE_JOINT_EMBEDDING)
    raw = np.asarray(provider.embed_text(query), dtype=np.float32).ravel()
    if raw.shape != (dim,):
        raise ContractViolation(
            f"text embedding has shape {raw.shape}, contract is ({dim},)",
            role=ROLE_JOINT_EMBEDDING,
        )
    if not np.isfinite(raw).all():
        raise ContractViolation("text embedding is non-finite", role=ROLE_JOINT_EMBEDDING)
    return raw


def score_importance(
    provider: ImportanceScorer,
    features: EmbeddingMatrix,
) -> ImportanceCurve:
    """One finite score per frame of the generic stream."""
    if provider.descriptor.role != ROLE_IMPORTANCE:
        raise ValidationError("importance scoring requires the importance role")
    raw = np.asarray(provider.score_importance(features.values), dtype=np.float64).ravel()
    if raw.shape[0] != features.rows:
        raise ContractViolation(
            f"importance curve has {raw.shape[0]} scores for {features.rows} frames",
            role=ROLE_IMPORTANCE,
        )
    if raw.size and not np.isfinite(raw).all():
        raise ContractViolation("importance curve is non-finite", role=ROLE_IMPORTANCE)
    return ImportanceCurve(scores=raw)


def caption(provider: Captioner, request: CaptionRequest) -> tuple[str, dict]:
    """Caption text plus provider metadata; empty text is a contract violation."""
    if provider.descriptor.role != ROLE_CAPTIONER:
        raise ValidationError("captioning requires the captioner role")
    started = time.perf_counter()
    text = provider.caption(request)
    elapsed = time.perf_counter() - started
    if not isinstance(text, str) or not text.strip():
        raise ContractViolation("captioner returned empty text", role=ROLE_CAPTIONER)
    meta = {
        "provider": provider.descriptor.version,
        "length_penalty": request.length_penalty,
        "frames_sent": len(request.frames),
        "realized_chars": len(text),
        "caption_seconds": elapsed,
    }
    return text, meta
