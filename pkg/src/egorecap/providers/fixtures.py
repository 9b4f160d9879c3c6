"""Deterministic in-process providers.

Two families:

* ``Fixture*`` providers replay pre-built arrays, so tests can pin exact
  numbers end to end.
* ``Hash*`` providers synthesize values from stable hashes of their inputs,
  so any session can run the full engine without model weights. Useful for
  demos and CLI smoke runs; the numbers mean nothing.

Every provider here is a pure function of (its construction arguments, the
request); an optional ``delay_s`` sleeps before answering so latency
accounting can be exercised without touching the outputs.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ContractViolation, ProviderError
from .base import (
    DEFAULT_ROLE_DIMS,
    ROLE_CAPTIONER,
    ROLE_FRAME_FEATURES,
    ROLE_IMPORTANCE,
    ROLE_JOINT_EMBEDDING,
    CaptionRequest,
    FrameHandle,
    ProviderDescriptor,
    ProviderSet,
    SegmentHandle,
)


def _hash_unit_vector(tag: str, dim: int) -> np.ndarray:
    seed = int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:8], "little")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    return (v / np.linalg.norm(v)).astype(np.float32)


def _sleep(delay_s: float):
    if delay_s > 0:
        time.sleep(delay_s)


@dataclass
class FixtureFrameFeatureProvider:
    """Replays a prebuilt (n_frames, dim) feature matrix by frame index."""

    matrix: np.ndarray
    version: str = "fixture-frame-features/1"
    delay_s: float = 0.0

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float32)
        self.descriptor = ProviderDescriptor(
            role=ROLE_FRAME_FEATURES,
            transport="in-process-fixture",
            version=self.version,
            dim=int(self.matrix.shape[1]),
        )

    def embed_frames(self, frames: list[FrameHandle]) -> np.ndarray:
        _sleep(self.delay_s)
        indices = [f.index for f in frames]
        if any(i < 0 or i >= self.matrix.shape[0] for i in indices):
            raise ProviderError(
                f"frame index outside fixture of {self.matrix.shape[0]} rows",
                role=ROLE_FRAME_FEATURES,
            )
        return self.matrix[indices]


@dataclass
class FixtureImportanceProvider:
    """Replays a stored importance curve; the curve length must match."""

    curve: np.ndarray
    version: str = "fixture-importance/1"
    delay_s: float = 0.0

    def __post_init__(self):
        self.curve = np.asarray(self.curve, dtype=np.float64).ravel()
        self.descriptor = ProviderDescriptor(
            role=ROLE_IMPORTANCE,
            transport="in-process-fixture",
            version=self.version,
            dim=1,
        )

    def score_importance(self, features: np.ndarray) -> np.ndarray:
        _sleep(self.delay_s)
        if features.shape[0] != self.curve.shape[0]:
            raise ContractViolation(
                f"fixture curve has {self.curve.shape[0]} scores, "
                f"stream has {features.shape[0]} frames",
                role=ROLE_IMPORTANCE,
            )
        return self.curve.copy()


@dataclass
class FixtureJointProvider:
    """Replays joint-space rows for frames, fixed segments, and known queries.

    Segments are resolved by their position ``start // (rate * segment_len_s)``
    in the fixed grid. Unknown query strings fall back to a stable hash vector
    so ad-hoc queries still run.
    """

    frame_matrix: np.ndarray
    segment_matrix: np.ndarray
    query_vectors: dict[str, np.ndarray] = field(default_factory=dict)
    segment_len_s: float = 8.0
    version: str = "fixture-joint/1"
    delay_s: float = 0.0

    def __post_init__(self):
        self.frame_matrix = np.asarray(self.frame_matrix, dtype=np.float32)
        self.segment_matrix = np.asarray(self.segment_matrix, dtype=np.float32)
        if self.frame_matrix.shape[1] != self.segment_matrix.shape[1]:
            raise ContractViolation(
                "frame and segment fixtures disagree on dimension",
                role=ROLE_JOINT_EMBEDDING,
            )
        self.descriptor = ProviderDescriptor(
            role=ROLE_JOINT_EMBEDDING,
            transport="in-process-fixture",
            version=self.version,
            dim=int(self.frame_matrix.shape[1]),
        )

    def embed_frames(self, frames: list[FrameHandle]) -> np.ndarray:
        _sleep(self.delay_s)
        indices = [f.index for f in frames]
        if any(i < 0 or i >= self.frame_matrix.shape[0] for i in indices):
            raise ProviderError(
                f"frame index outside fixture of {self.frame_matrix.shape[0]} rows",
                role=ROLE_JOINT_EMBEDDING,
            )
        return self.frame_matrix[indices]

    def embed_segments(self, segments: list[SegmentHandle]) -> np.ndarray:
        _sleep(self.delay_s)
        rows = []
        for seg in segments:
            per_seg = seg.rate * self.segment_len_s
            pos = int(round(seg.start / per_seg))
            if abs(seg.start - pos * per_seg) > 1e-6 or not (
                0 <= pos < self.segment_matrix.shape[0]
            ):
                raise ProviderError(
                    f"segment [{seg.start}, {seg.end}) is not on the fixture grid",
                    role=ROLE_JOINT_EMBEDDING,
                )
            rows.append(self.segment_matrix[pos])
        if not rows:
            return np.zeros((0, self.segment_matrix.shape[1]), dtype=np.float32)
        return np.stack(rows)

    def embed_text(self, text: str) -> np.ndarray:
        _sleep(self.delay_s)
        known = self.query_vectors.get(text)
        if known is not None:
            return np.asarray(known, dtype=np.float32)
        return _hash_unit_vector(f"{self.version}:text:{text}", self.frame_matrix.shape[1])


@dataclass
class FixtureCaptionProvider:
    """Deterministic captioner; canned answers by query, a stock line otherwise.

    The most recent request is kept on ``last_request`` so tests can assert
    what actually crossed the boundary (frame count, prompt, penalty).
    """

    canned: dict[Optional[str], str] = field(default_factory=dict)
    version: str = "fixture-captioner/1"
    delay_s: float = 0.0
    last_request: Optional[CaptionRequest] = field(default=None, repr=False)

    def __post_init__(self):
        self.descriptor = ProviderDescriptor(
            role=ROLE_CAPTIONER,
            transport="in-process-fixture",
            version=self.version,
        )

    def caption(self, request: CaptionRequest) -> str:
        _sleep(self.delay_s)
        self.last_request = request
        text = self.canned.get(request.query)
        if text is not None:
            return text
        span = ""
        if request.frames:
            span = (
                f" spanning {request.frames[0].timestamp_s:.1f}s to "
                f"{request.frames[-1].timestamp_s:.1f}s"
            )
        if request.query is not None:
            return f"Regarding {request.query!r}: {len(request.frames)} frames{span}."
        return f"A recording of {len(request.frames)} sampled frames{span}."


@dataclass
class HashFrameFeatureProvider:
    """Synthesizes a stable unit vector per frame index; no weights needed."""

    dim: int = DEFAULT_ROLE_DIMS[ROLE_FRAME_FEATURES]
    tag: str = "hash-frame-features/1"
    delay_s: float = 0.0

    def __post_init__(self):
        self.descriptor = ProviderDescriptor(
            role=ROLE_FRAME_FEATURES,
            transport="in-process-fixture",
            version=self.tag,
            dim=self.dim,
        )

    def embed_frames(self, frames: list[FrameHandle]) -> np.ndarray:
        _sleep(self.delay_s)
        if not frames:
            return np.zeros((0, self.dim), dtype=np.float32)
        return np.stack(
            [_hash_unit_vector(f"{self.tag}:frame:{f.index}", self.dim) for f in frames]
        )


@dataclass
class HashImportanceProvider:
    """Scores each frame by hashing its feature bytes into [0, 1)."""

    tag: str = "hash-importance/1"
    delay_s: float = 0.0

    def __post_init__(self):
        self.descriptor = ProviderDescriptor(
            role=ROLE_IMPORTANCE,
            transport="in-process-fixture",
            version=self.tag,
            dim=1,
        )

    def score_importance(self, features: np.ndarray) -> np.ndarray:
        _sleep(self.delay_s)
        rows = np.ascontiguousarray(features, dtype=np.float32)
        out = np.empty(rows.shape[0], dtype=np.float64)
        for i in range(rows.shape[0]):
            digest = hashlib.sha256(self.tag.encode() + rows[i].tobytes()).digest()
            out[i] = int.from_bytes(digest[:8], "little") / 2**64
        return out


@dataclass
class HashJointProvider:
    """Joint-space stand-in: stable hash vectors for frames, segments, text."""

    dim: int = DEFAULT_ROLE_DIMS[ROLE_JOINT_EMBEDDING]
    tag: str = "hash-joint/1"
    delay_s: float = 0.0

    def __post_init__(self):
        self.descriptor = ProviderDescriptor(
            role=ROLE_JOINT_EMBEDDING,
            transport="in-process-fixture",
            version=self.tag,
            dim=self.dim,
        )

    def embed_frames(self, frames: list[FrameHandle]) -> np.ndarray:
        _sleep(self.delay_s)
        if not frames:
            return np.zeros((0, self.dim), dtype=np.float32)
        return np.stack(
            [_hash_unit_vector(f"{self.tag}:frame:{f.index}", self.dim) for f in frames]
        )

    def embed_segments(self, segments: list[SegmentHandle]) -> np.ndarray:
        _sleep(self.delay_s)
        if not segments:
            return np.zeros((0, self.dim), dtype=np.float32)
        return np.stack(
            [
                _hash_unit_vector(f"{self.tag}:segment:{s.start}:{s.end}", self.dim)
                for s in segments
            ]
        )

    def embed_text(self, text: str) -> np.ndarray:
        _sleep(self.delay_s)
        return _hash_unit_vector(f"{self.tag}:text:{text}", self.dim)


def hash_provider_set(
    feature_dim: int = DEFAULT_ROLE_DIMS[ROLE_FRAME_FEATURES],
    joint_dim: int = DEFAULT_ROLE_DIMS[ROLE_JOINT_EMBEDDING],
    delay_s: float = 0.0,
) -> ProviderSet:
    """A full provider set that runs anywhere; outputs are stable nonsense."""
    return ProviderSet(
        frame_features=HashFrameFeatureProvider(dim=feature_dim, delay_s=delay_s),
        importance=HashImportanceProvider(delay_s=delay_s),
        joint_embedding=HashJointProvider(dim=joint_dim, delay_s=delay_s),
        captioner=FixtureCaptionProvider(delay_s=delay_s),
    )
