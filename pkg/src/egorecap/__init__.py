"""Summarization engine for long egocentric robot video.

Turns hours of footage into three summary modalities — storyboards, video
skims (edit lists), and short text — either query-free from learned frame
importance or driven by a free-text query through a joint text/video
embedding space. Learned models stay out of process behind a provider
protocol; everything in here is deterministic given the provider outputs.
"""

from .changepoint import KtsResult, kts_segment, segment_scores
from .errors import (
    ArchiveError,
    ConfigError,
    ContractViolation,
    EngineError,
    IngestError,
    PipelineError,
    ProviderError,
    ValidationError,
)
from .ingest import Session, fixed_segmentation, ingest_video, list_sessions
from .model import (
    EmbeddingMatrix,
    FrameRef,
    ImportanceCurve,
    PipelineConfig,
    ScoredSegment,
    SegmentRef,
    SkimEditList,
    StoryboardEntry,
    StoryboardManifest,
    TextSummary,
    VideoMeta,
    config_from_mapping,
    validate_config,
)
from .pipeline import (
    GenericResult,
    QueryResult,
    latency_report,
    query_artifact_key,
    run_generic,
    run_query,
)
from .providers.base import ProviderSet
from .select import greedy_diverse, knapsack_select, topk_chrono
from .service import create_app

__version__ = "1.0.0"

__all__ = [
    "ArchiveError",
    "ConfigError",
    "ContractViolation",
    "EmbeddingMatrix",
    "EngineError",
    "FrameRef",
    "GenericResult",
    "ImportanceCurve",
    "IngestError",
    "KtsResult",
    "PipelineConfig",
    "PipelineError",
    "ProviderError",
    "ProviderSet",
    "QueryResult",
    "ScoredSegment",
    "SegmentRef",
    "Session",
    "SkimEditList",
    "StoryboardEntry",
    "StoryboardManifest",
    "TextSummary",
    "ValidationError",
    "VideoMeta",
    "config_from_mapping",
    "create_app",
    "fixed_segmentation",
    "greedy_diverse",
    "ingest_video",
    "knapsack_select",
    "kts_segment",
    "latency_report",
    "list_sessions",
    "query_artifact_key",
    "run_generic",
    "run_query",
    "segment_scores",
    "topk_chrono",
    "validate_config",
]
