"""The engine's own protocol conformance suite, pointed at this sidecar.

These tests need the engine installed (it is a test-only dependency: the
sidecar itself never imports it). They are the substitutability proof — the
same checks the engine runs against its in-process fixture providers must
pass against a sidecar reached over HTTP.
"""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from egorecap_sidecar import build_app, stub_backends

egorecap = pytest.importorskip("egorecap")

from egorecap.errors import ContractViolation, ProviderError  # noqa: E402
from egorecap.providers import base, wire  # noqa: E402
from egorecap.providers.base import ProviderSet  # noqa: E402
from egorecap.providers.conformance import assert_conformant, run_conformance  # noqa: E402


def _provider_set(app) -> ProviderSet:
    transport = wire.HttpTransport("http://sidecar.test", client=TestClient(app))
    return ProviderSet(
        **{role: wire.RemoteProvider(transport, role) for role in wire.ROLES}
    )


def test_stub_sidecar_passes_the_engine_conformance_suite():
    providers = _provider_set(build_app(stub_backends()))
    results = run_conformance(providers)
    failed = [r for r in results if not r.passed]
    assert not failed, failed
    assert_conformant(providers)


def test_descriptors_reflect_the_remote_capabilities():
    providers = _provider_set(build_app(stub_backends()))
    assert providers.frame_features.descriptor.dim == 512
    assert providers.joint_embedding.descriptor.dim == 768
    assert providers.captioner.descriptor.version == "sidecar-stub-captioner/1"
    assert providers.importance.descriptor.max_inflight == 4


def test_an_eight_second_clip_embeds_to_one_joint_vector():
    providers = _provider_set(build_app(stub_backends()))
    segment = base.SegmentHandle(0, 8, 1.0)
    out = base.embed_segments(providers.joint_embedding, [segment], 8.0)
    assert out.values.shape == (1, 768)
    vector = base.embed_text(providers.joint_embedding, "what happened at the bench")
    assert vector.shape == (768,)


def test_a_hundred_frame_query_caption_is_one_sentence():
    providers = _provider_set(build_app(stub_backends()))
    request = base.CaptionRequest(
        frames=tuple(base.FrameHandle(i, 1.0) for i in range(100)),
        prompt="Answer the question from the frames.",
        length_penalty=2.0,
        query="who opened the drawer",
    )
    text, meta = base.caption(providers.captioner, request)
    assert meta["frames_sent"] == 100
    assert text.endswith(".")
    assert text.count(".") == 1
    assert "who opened the drawer" in text


def test_remote_errors_surface_as_engine_exceptions():
    backends = stub_backends()
    providers = _provider_set(build_app(backends))

    with pytest.raises(ContractViolation):
        providers.joint_embedding.embed_segments([base.SegmentHandle(0, 3, 1.0)])

    def explode(text):
        raise MemoryError("no room")

    backends["joint_embedding"].embed_text = explode
    with pytest.raises(ProviderError) as caught:
        providers.joint_embedding.embed_text("probe")
    assert caught.value.retryable


def test_two_fresh_sidecars_answer_byte_identically():
    frames = [base.FrameHandle(i, 1.0) for i in range(6)]

    def snapshot():
        providers = _provider_set(build_app(stub_backends()))
        return (
            base.embed_frames(providers.frame_features, frames).values.tobytes(),
            base.embed_text(providers.joint_embedding, "probe").tobytes(),
        )

    assert snapshot() == snapshot()


def test_importance_round_trip_matches_local_arithmetic():
    backends = stub_backends()
    providers = _provider_set(build_app(backends))
    features = np.linspace(-1.0, 1.0, 3 * 512, dtype=np.float32).reshape(3, 512)
    sample = base.EmbeddingMatrix(values=features, space="test")
    remote = base.score_importance(providers.importance, sample).scores
    local = backends["importance"].score_importance(features)
    # the curve crosses the wire as float32, so compare at that precision
    np.testing.assert_allclose(remote, local.astype(np.float32), rtol=1e-6)
