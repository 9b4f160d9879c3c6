"""Core domain types and pipeline configuration.

Timestamps are stored as (frame index, stream rate) and rendered to seconds
on demand, so a 40-minute session never accumulates floating-point drift.
All types here are immutable values and safe to share between tasks.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .errors import ConfigError, ValidationError

GENERIC_FEATURE_DIM = 512
JOINT_EMBEDDING_DIM = 768


@dataclass(frozen=True)
class VideoMeta:
    """Source video identity: where it lives, how long it is, how fast it plays."""

    source_uri: str
    native_fps: float
    frame_count: int
    duration_s: float

    def __post_init__(self):
        if self.native_fps <= 0:
            raise ValidationError("native_fps must be > 0")
        if self.frame_count < 1:
            raise ValidationError("frame_count must be >= 1")
        # duration must agree with the frame count to within one frame period
        if abs(self.duration_s - self.frame_count / self.native_fps) > 1.0 / self.native_fps:
            raise ValidationError(
                f"duration_s={self.duration_s} inconsistent with "
                f"{self.frame_count} frames at {self.native_fps} fps"
            )

    @classmethod
    def from_frames(cls, source_uri: str, native_fps: float, frame_count: int) -> "VideoMeta":
        return cls(source_uri, native_fps, frame_count, frame_count / native_fps)


@dataclass(frozen=True, order=True)
class FrameRef:
    """A position in one frame stream. ``timestamp_s`` is derived, never stored."""

    index: int
    rate: float

    def __post_init__(self):
        if self.index < 0:
            raise ValidationError("frame index must be >= 0")
        if self.rate <= 0:
            raise ValidationError("stream rate must be > 0")

    @property
    def timestamp_s(self) -> float:
        return self.index / self.rate

    @classmethod
    def at_time(cls, timestamp_s: float, rate: float) -> "FrameRef":
        """Nearest frame to a timestamp; inverse of ``timestamp_s`` to one frame period."""
        return cls(int(round(timestamp_s * rate)), rate)


@dataclass(frozen=True)
class SegmentRef:
    """A contiguous, half-open frame interval [start, end) within one stream."""

    start: FrameRef
    end: FrameRef

    def __post_init__(self):
        if self.start.rate != self.end.rate:
            raise ValidationError("segment endpoints must share a stream rate")
        if self.start.index >= self.end.index:
            raise ValidationError("segment start must precede end")

    @property
    def rate(self) -> float:
        return self.start.rate

    @property
    def frame_count(self) -> int:
        return self.end.index - self.start.index

    @property
    def duration_s(self) -> float:
        return self.frame_count / self.rate

    @property
    def start_s(self) -> float:
        return self.start.timestamp_s

    @property
    def end_s(self) -> float:
        return self.end.timestamp_s

    @classmethod
    def from_indices(cls, start: int, end: int, rate: float) -> "SegmentRef":
        return cls(FrameRef(start, rate), FrameRef(end, rate))


@dataclass(frozen=True)
class ScoredSegment:
    """A segment plus its aggregate relevance; the unit of knapsack/top-k selection."""

    segment: SegmentRef
    score: float

    @property
    def duration_s(self) -> float:
        return self.segment.duration_s


@dataclass(frozen=True)
class PipelineConfig:
    """Every pipeline parameter in one place, defaulted to the standard setup.

    generic_fps / query_fps      frame rates of the two streams
    segment_len_d_s              fixed query-segment length (seconds)
    min_seg_dur_D_s              minimum duration of a change-point segment
    pca_dims_L                   retained principal components
    diversity_delta              similarity threshold for storyboard greedy
    generic_board_M / query_board_m   storyboard size caps
    knapsack_budget_K_pct        generic skim budget as % of source duration
    topk_k                       segments per query skim
    caption_frame_cap            max frames handed to the captioner
    caption_length_penalty       captioner length-penalty knob (passed through)
    kts_penalty_c                weight of the change-point count penalty
    generic_prompt               captioner prompt for query-free summaries
    """

    generic_fps: float = 15.0
    query_fps: float = 1.0
    segment_len_d_s: float = 8.0
    min_seg_dur_D_s: float = 1.0
    pca_dims_L: int = 100
    diversity_delta: float = 0.5
    generic_board_M: int = 24
    query_board_m: int = 4
    knapsack_budget_K_pct: float = 15.0
    topk_k: int = 6
    caption_frame_cap: int = 100
    caption_length_penalty: float = 1.0
    kts_penalty_c: float = 1.0
    knapsack_resolution_s: float = 1.0
    generic_prompt: str = (
        "This video is the onboard front-camera recording of a mobile robot "
        "operating autonomously. Describe in detail what the robot did and "
        "what it encountered."
    )

    def violations(self) -> list[str]:
        out = []
        if self.generic_fps <= 0:
            out.append("generic_fps: must be > 0")
        if self.query_fps <= 0:
            out.append("query_fps: must be > 0")
        if self.segment_len_d_s <= 0:
            out.append("segment_len_d_s: must be > 0")
        if self.min_seg_dur_D_s <= 0:
            out.append("min_seg_dur_D_s: must be > 0")
        if self.segment_len_d_s < self.min_seg_dur_D_s:
            out.append("segment_len_d_s: must be >= min_seg_dur_D_s")
        for name in ("pca_dims_L", "generic_board_M", "query_board_m", "topk_k",
                     "caption_frame_cap"):
            if getattr(self, name) < 1:
                out.append(f"{name}: must be >= 1")
        if not 0.0 <= self.diversity_delta <= 1.0:
            out.append("diversity_delta: must be in [0, 1]")
        if not 0.0 < self.knapsack_budget_K_pct < 100.0:
            out.append("knapsack_budget_K_pct: must satisfy 0 < K < 100")
        if self.kts_penalty_c <= 0:
            out.append("kts_penalty_c: must be > 0")
        if self.knapsack_resolution_s <= 0:
            out.append("knapsack_resolution_s: must be > 0")
        if not self.generic_prompt.strip():
            out.append("generic_prompt: must be non-empty")
        return out

    def hash(self) -> str:
        """Stable short hash of the full parameterization; keys artifact caches."""
        canon = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def validate_config(cfg: PipelineConfig) -> PipelineConfig:
    """Return ``cfg`` unchanged iff every invariant holds; raise ConfigError otherwise."""
    bad = cfg.violations()
    if bad:
        raise ConfigError(bad)
    return cfg


def config_from_mapping(values: dict) -> PipelineConfig:
    """Build and validate a config from a plain dict (manifest files, CLI flags)."""
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError([f"{k}: unknown config field" for k in sorted(unknown)])
    return validate_config(PipelineConfig(**values))


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Row-per-frame (or per-segment) feature vectors tied to an embedding space.

    ``space`` identifies provider name + version so vectors from different
    embedding spaces can never be compared by accident.
    """

    values: np.ndarray
    space: str

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise ValidationError(f"embedding matrix must be 2-D, got shape {v.shape}")
        if v.size and not np.isfinite(v).all():
            raise ValidationError("embedding matrix contains non-finite entries")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ImportanceCurve:
    """Per-frame scalar relevance aligned with the generic-rate stream."""

    scores: np.ndarray

    def __post_init__(self):
        s = self.scores
        if s.ndim != 1:
            raise ValidationError("importance curve must be 1-D")
        if s.size and not np.isfinite(s).all():
            raise ValidationError("importance curve contains non-finite scores")

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class StoryboardEntry:
    frame: FrameRef
    image_locator: str

    @property
    def timestamp_s(self) -> float:
        return self.frame.timestamp_s


@dataclass(frozen=True)
class StoryboardManifest:
    """Chronological key frames with timestamps. Relevance scores are never included."""

    entries: tuple[StoryboardEntry, ...]
    max_entries: int

    def __post_init__(self):
        ts = [e.timestamp_s for e in self.entries]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValidationError("storyboard timestamps must be strictly increasing")
        if len(self.entries) > self.max_entries:
            raise ValidationError(
                f"storyboard holds {len(self.entries)} entries, cap is {self.max_entries}"
            )

    def to_document(self) -> dict:
        return {
            "kind": "storyboard",
            "entries": [
                {
                    "frame_index": e.frame.index,
                    "timestamp_s": e.timestamp_s,
                    "image_locator": e.image_locator,
                }
                for e in self.entries
            ],
        }


@dataclass(frozen=True)
class SkimEditList:
    """Disjoint chronological (start_s, end_s) intervals into the source video."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        prev_end = -math.inf
        for start, end in self.intervals:
            if end <= start:
                raise ValidationError(f"empty or inverted interval ({start}, {end})")
            if start < prev_end:
                raise ValidationError("skim intervals must be disjoint and chronological")
            prev_end = end

    @property
    def total_s(self) -> float:
        return sum(end - start for start, end in self.intervals)

    def check_within(self, duration_s: float, budget_s: Optional[float] = None) -> None:
        if self.intervals and self.intervals[-1][1] > duration_s + 1e-9:
            raise ValidationError("skim interval exceeds video duration")
        if budget_s is not None and self.total_s > budget_s + 1e-9:
            raise ValidationError(f"skim total {self.total_s}s exceeds budget {budget_s}s")

    def to_document(self) -> dict:
        return {
            "kind": "skim",
            "intervals": [{"start_s": s, "end_s": e} for s, e in self.intervals],
            "total_s": self.total_s,
        }


@dataclass(frozen=True)
class TextSummary:
    """Caption text plus the skim it was derived from. Never built from the raw video."""

    text: str
    source_skim: SkimEditList
    query: Optional[str]
    provider_meta: dict = field(default_factory=dict)

    def to_document(self) -> dict:
        return {
            "kind": "text",
            "text": self.text,
            "query": self.query,
            "source_skim": self.source_skim.to_document(),
            "provider_meta": dict(sorted(self.provider_meta.items())),
        }
