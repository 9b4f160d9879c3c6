"""Out-of-process model backends speaking the engine's provider protocol."""

from .backends import (
    StubCaptioner,
    StubFrameFeatures,
    StubImportance,
    StubJointEmbedding,
    stub_backends,
)
from .protocol import PROTOCOL_VERSION, ROLES
from .service import build_app, dispatch

__all__ = [
    "PROTOCOL_VERSION",
    "ROLES",
    "StubCaptioner",
    "StubFrameFeatures",
    "StubImportance",
    "StubJointEmbedding",
    "build_app",
    "dispatch",
    "stub_backends",
]
