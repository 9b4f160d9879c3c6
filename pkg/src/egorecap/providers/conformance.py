"""Black-box conformance checks for a provider set.

The suite drives each role through the same engine-side operations the
pipeline uses, so it exercises the full boundary: shapes, dimensions,
finiteness, determinism of repeated calls, and rejection of malformed
requests. It is transport-agnostic — pass in-process fixtures, stdio
clients, or HTTP clients alike.

Default sample inputs use frame indices 0..2 and the first fixed segment,
so a replay-style provider must be seeded with at least three frames and
one segment. Callers with real models can pass handles that point at real
images instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import ProviderError, ValidationError
from . import base
from .base import (
    ROLES,
    CaptionRequest,
    FrameHandle,
    ProviderSet,
    SegmentHandle,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self):
        mark = "ok" if self.passed else "FAIL"
        suffix = f" ({self.detail})" if self.detail else ""
        return f"[{mark}] {self.name}{suffix}"


def run_conformance(
    providers: ProviderSet,
    sample_frames: Optional[list[FrameHandle]] = None,
    sample_segments: Optional[list[SegmentHandle]] = None,
    segment_len_s: float = 8.0,
    require_all: bool = True,
) -> list[CheckResult]:
    frames = sample_frames or [FrameHandle(i, 1.0) for i in range(3)]
    segments = sample_segments or [SegmentHandle(0, int(segment_len_s), 1.0)]
    results: list[CheckResult] = []

    def check(name: str, fn: Callable[[], None]):
        try:
            fn()
        except Exception as exc:  # report, never abort the suite
            results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
        else:
            results.append(CheckResult(name, True))

    if require_all:
        def roles_present():
            missing = [r for r in ROLES if providers.get(r) is None]
            assert not missing, f"missing roles: {missing}"
        check("roles: all four present", roles_present)

    ff = providers.frame_features
    if ff is not None:
        def ff_shape():
            out = base.embed_frames(ff, frames)
            assert out.rows == len(frames), f"{out.rows} rows for {len(frames)} frames"
        check("frame_features: one row per frame, declared dim, finite", ff_shape)

        def ff_deterministic():
            a = base.embed_frames(ff, frames).values
            b = base.embed_frames(ff, frames).values
            assert a.tobytes() == b.tobytes(), "repeated call changed bytes"
        check("frame_features: repeated call is byte-identical", ff_deterministic)

        def ff_empty():
            out = base.embed_frames(ff, [])
            assert out.rows == 0
        check("frame_features: empty request yields zero rows", ff_empty)

    imp = providers.importance
    if imp is not None:
        dim = (ff.descriptor.dim if ff is not None else None) or 512
        sample = np.linspace(0.0, 1.0, len(frames) * dim, dtype=np.float32)
        sample = base.EmbeddingMatrix(sample.reshape(len(frames), dim), space="conformance")

        def imp_shape():
            curve = base.score_importance(imp, sample)
            assert len(curve) == sample.rows
        check("importance: one finite score per frame", imp_shape)

        def imp_deterministic():
            a = base.score_importance(imp, sample).scores
            b = base.score_importance(imp, sample).scores
            assert a.tobytes() == b.tobytes(), "repeated call changed bytes"
        check("importance: repeated call is byte-identical", imp_deterministic)

    joint = providers.joint_embedding
    if joint is not None:
        def joint_frames():
            out = base.embed_frames(joint, frames)
            assert out.rows == len(frames)
        check("joint_embedding: frame rows in declared dim", joint_frames)

        def joint_segments():
            out = base.embed_segments(joint, segments, segment_len_s)
            assert out.rows == len(segments)
        check("joint_embedding: segment rows in declared dim", joint_segments)

        def joint_bad_segment():
            crooked = SegmentHandle(0, max(1, int(segment_len_s) - 1), 1.0)
            try:
                base.embed_segments(joint, [crooked], segment_len_s)
            except base.ContractViolation:
                return
            raise AssertionError("off-length segment was accepted")
        check("joint_embedding: off-length segment is rejected", joint_bad_segment)

        def joint_text():
            a = base.embed_text(joint, "where is the mug")
            b = base.embed_text(joint, "where is the mug")
            assert a.tobytes() == b.tobytes(), "repeated call changed bytes"
            c = base.embed_text(joint, "a different query")
            assert a.shape == c.shape
        check("joint_embedding: text vector, deterministic per query", joint_text)

        def joint_empty_text():
            try:
                base.embed_text(joint, "   ")
            except ValidationError:
                return
            raise AssertionError("blank query was accepted")
        check("joint_embedding: blank query is rejected", joint_empty_text)

        def joint_spaces_agree():
            f = base.embed_frames(joint, frames[:1])
            t = base.embed_text(joint, "probe")
            assert f.dim == t.shape[0], f"frames dim {f.dim} vs text dim {t.shape[0]}"
        check("joint_embedding: frames and text share one space", joint_spaces_agree)

    cap = providers.captioner
    if cap is not None:
        request = CaptionRequest(
            frames=tuple(frames),
            prompt="Describe what happens.",
            length_penalty=1.0,
        )

        def cap_text():
            text, meta = base.caption(cap, request)
            assert text.strip(), "empty caption"
            assert meta["frames_sent"] == len(frames)
        check("captioner: non-empty text for a valid request", cap_text)

        def cap_deterministic():
            a, _ = base.caption(cap, request)
            b, _ = base.caption(cap, request)
            assert a == b, "repeated call changed text"
        check("captioner: repeated call returns identical text", cap_deterministic)

        def cap_overflow():
            too_many = tuple(
                FrameHandle(i, 1.0) for i in range(request.frame_cap + 1)
            )
            try:
                CaptionRequest(
                    frames=too_many, prompt="x", length_penalty=1.0,
                    frame_cap=request.frame_cap,
                )
            except ValidationError:
                return
            raise AssertionError("over-cap frame list was accepted")
        check("captioner: requests beyond the frame cap cannot be built", cap_overflow)

    return results


def assert_conformant(providers: ProviderSet, **kwargs):
    """Raise with every failing check spelled out; silent on full pass."""
    results = run_conformance(providers, **kwargs)
    failures = [str(r) for r in results if not r.passed]
    if failures:
        raise ProviderError(
            "provider set failed conformance:\n" + "\n".join(failures)
        )
