"""Deterministic stub backends: stable hash-derived outputs, no weights.

Each backend carries the attributes the protocol's ``describe`` op reports
(``role``, ``version``, ``dim``, ``max_inflight``) plus a ``serialize`` flag
telling the service whether calls must take the shared work lock. Stubs are
pure CPU arithmetic, so they run concurrently; the same answer always comes
back for the same request, byte for byte, which is what lets the engine's
conformance and determinism checks pass against a sidecar with no models.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .protocol import (
    ROLE_CAPTIONER,
    ROLE_FRAME_FEATURES,
    ROLE_IMPORTANCE,
    ROLE_JOINT_EMBEDDING,
    CaptionCall,
    ContractBreach,
    FrameRef,
    SegmentRef,
)

DEFAULT_FEATURE_DIM = 512
DEFAULT_JOINT_DIM = 768
DEFAULT_SEGMENT_LEN_S = 8.0


def _unit_vector(tag: str, dim: int) -> np.ndarray:
    """A stable unit vector: the tag seeds the generator, nothing else does."""
    seed = int.from_bytes(hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest(), "big")
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(dim).astype(np.float32)
    return vec / np.linalg.norm(vec)


@dataclass
class StubFrameFeatures:
    """Per-frame feature rows synthesized from the frame index."""

    dim: int = DEFAULT_FEATURE_DIM
    version: str = "sidecar-stub-frames/1"

    role = ROLE_FRAME_FEATURES
    max_inflight = 4
    serialize = False

    def embed_frames(self, frames: list[FrameRef]) -> np.ndarray:
        if not frames:
            return np.zeros((0, self.dim), dtype=np.float32)
        return np.stack(
            [_unit_vector(f"{self.version}|frame|{f.index}", self.dim) for f in frames]
        )


@dataclass
class StubImportance:
    """Scores each frame by hashing its feature bytes into [0, 1)."""

    version: str = "sidecar-stub-importance/1"

    role = ROLE_IMPORTANCE
    dim = 1
    max_inflight = 4
    serialize = False

    def score_importance(self, features: np.ndarray) -> np.ndarray:
        rows = np.ascontiguousarray(features, dtype=np.float32)
        out = np.empty(rows.shape[0], dtype=np.float64)
        for i in range(rows.shape[0]):
            digest = hashlib.blake2b(
                self.version.encode("utf-8") + rows[i].tobytes(), digest_size=8
            ).digest()
            out[i] = int.from_bytes(digest, "big") / 2**64
        return out


@dataclass
class StubJointEmbedding:
    """One hash-derived space for frames, fixed-length segments, and text."""

    dim: int = DEFAULT_JOINT_DIM
    segment_len_s: Optional[float] = DEFAULT_SEGMENT_LEN_S
    version: str = "sidecar-stub-joint/1"

    role = ROLE_JOINT_EMBEDDING
    max_inflight = 4
    serialize = False

    def embed_frames(self, frames: list[FrameRef]) -> np.ndarray:
        if not frames:
            return np.zeros((0, self.dim), dtype=np.float32)
        return np.stack(
            [_unit_vector(f"{self.version}|frame|{f.index}", self.dim) for f in frames]
        )

    def embed_segments(self, segments: list[SegmentRef]) -> np.ndarray:
        if self.segment_len_s is not None:
            for seg in segments:
                if abs(seg.duration_s - self.segment_len_s) > 1e-9:
                    raise ContractBreach(
                        f"segment [{seg.start}, {seg.end}) lasts {seg.duration_s}s, "
                        f"this backend embeds fixed {self.segment_len_s}s clips"
                    )
        if not segments:
            return np.zeros((0, self.dim), dtype=np.float32)
        return np.stack(
            [
                _unit_vector(f"{self.version}|segment|{s.start}|{s.end}", self.dim)
                for s in segments
            ]
        )

    def embed_text(self, text: str) -> np.ndarray:
        return _unit_vector(f"{self.version}|text|{text}", self.dim)


@dataclass
class StubCaptioner:
    """Always one sentence, shaped by the frame span, query, and length knob."""

    version: str = "sidecar-stub-captioner/1"

    role = ROLE_CAPTIONER
    dim = None
    max_inflight = 4
    serialize = False

    def caption(self, call: CaptionCall) -> str:
        n = len(call.frames)
        if n:
            t0 = int(round(call.frames[0].timestamp_s))
            t1 = int(round(call.frames[-1].timestamp_s))
            span = f"between {t0}s and {t1}s" if t1 > t0 else f"around {t0}s"
        else:
            span = "with no frames attached"
        if call.query is not None:
            body = f"the {n} sampled frames {span} are the closest match to {call.query!r}"
        else:
            body = f"the {n} sampled frames {span} show the camera's ongoing work"
        if call.length_penalty >= 1.5 or n == 0:
            return body[0].upper() + body[1:] + "."
        return f"In short, {body}."


def stub_backends(
    feature_dim: int = DEFAULT_FEATURE_DIM,
    joint_dim: int = DEFAULT_JOINT_DIM,
    segment_len_s: Optional[float] = DEFAULT_SEGMENT_LEN_S,
) -> dict:
    """One stub per role, keyed by role name; runs anywhere, needs nothing."""
    return {
        ROLE_FRAME_FEATURES: StubFrameFeatures(dim=feature_dim),
        ROLE_IMPORTANCE: StubImportance(),
        ROLE_JOINT_EMBEDDING: StubJointEmbedding(dim=joint_dim, segment_len_s=segment_len_s),
        ROLE_CAPTIONER: StubCaptioner(),
    }
