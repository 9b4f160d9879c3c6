"""Model providers: role contracts, deterministic fixtures, wire transports."""

from .base import (
    DEFAULT_CAPTION_FRAME_CAP,
    DEFAULT_ROLE_DIMS,
    ROLE_CAPTIONER,
    ROLE_FRAME_FEATURES,
    ROLE_IMPORTANCE,
    ROLE_JOINT_EMBEDDING,
    ROLES,
    CaptionRequest,
    FrameHandle,
    ProviderDescriptor,
    ProviderSet,
    SegmentHandle,
    caption,
    embed_frames,
    embed_segments,
    embed_text,
    score_importance,
    uniform_subsample,
)
from .conformance import CheckResult, assert_conformant, run_conformance
from .fixtures import (
    FixtureCaptionProvider,
    FixtureFrameFeatureProvider,
    FixtureImportanceProvider,
    FixtureJointProvider,
    HashFrameFeatureProvider,
    HashImportanceProvider,
    HashJointProvider,
    hash_provider_set,
)
from .wire import (
    HttpTransport,
    RemoteProvider,
    StdioTransport,
    build_provider_app,
    connect_http,
    connect_stdio,
    decode_matrix,
    dispatch,
    encode_matrix,
    http_provider_set,
    serve_stdio,
)

__all__ = [
    "DEFAULT_CAPTION_FRAME_CAP",
    "DEFAULT_ROLE_DIMS",
    "ROLE_CAPTIONER",
    "ROLE_FRAME_FEATURES",
    "ROLE_IMPORTANCE",
    "ROLE_JOINT_EMBEDDING",
    "ROLES",
    "CaptionRequest",
    "CheckResult",
    "FixtureCaptionProvider",
    "FixtureFrameFeatureProvider",
    "FixtureImportanceProvider",
    "FixtureJointProvider",
    "FrameHandle",
    "HashFrameFeatureProvider",
    "HashImportanceProvider",
    "HashJointProvider",
    "HttpTransport",
    "ProviderDescriptor",
    "ProviderSet",
    "RemoteProvider",
    "SegmentHandle",
    "StdioTransport",
    "assert_conformant",
    "build_provider_app",
    "caption",
    "connect_http",
    "connect_stdio",
    "decode_matrix",
    "dispatch",
    "embed_frames",
    "embed_segments",
    "embed_text",
    "encode_matrix",
    "hash_provider_set",
    "http_provider_set",
    "run_conformance",
    "score_importance",
    "serve_stdio",
    "uniform_subsample",
]
