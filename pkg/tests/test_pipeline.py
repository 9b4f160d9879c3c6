"""End-to-end pipeline behavior on replayable micro sessions.

Expected storyboard indices and skim intervals below are frozen values,
cross-checked in-test by composing the public building blocks (PCA, greedy,
change points, scoring, knapsack) the same way the pipeline does.
"""

from __future__ import annotations

import numpy as np
import pytest

from conftest import (
    CANNED_CAPTIONS,
    MICRO_CFG,
    QUERY_DOCK,
    QUERY_DOOR,
    make_session,
    micro_curve,
    micro_generic_features,
    micro_provider_set,
)
from egorecap.changepoint import segment_scores
from egorecap.errors import ContractViolation, PipelineError, ValidationError
from egorecap.model import ImportanceCurve, PipelineConfig, SegmentRef
from egorecap.numerics import pca_fit, pca_project
from egorecap.pipeline import (
    GENERIC_KEYS,
    QUERY_PROMPT_TEMPLATE,
    change_point_segments,
    latency_report,
    query_artifact_key,
    run_generic,
    run_query,
)
from egorecap.providers.base import ProviderSet
from egorecap.providers.fixtures import (
    FixtureCaptionProvider,
    FixtureFrameFeatureProvider,
    FixtureImportanceProvider,
    FixtureJointProvider,
)
from egorecap.select import greedy_diverse, knapsack_select

MICRO_BUDGET_S = 48.0 * MICRO_CFG.knapsack_budget_K_pct / 100.0  # 12 s


def _board_indices(board):
    return [e.frame.index for e in board.entries]


def _mirror_split(segments, budget_s, block_s, rate):
    # restates the documented rule: segments longer than the whole budget are
    # re-split at the minimum duration so the knapsack can fill it
    block = int(round(block_s * rate))
    out = []
    for seg in segments:
        if seg.duration_s <= budget_s:
            out.append(seg)
            continue
        a = seg.start.index
        while a < seg.end.index:
            b = min(a + block, seg.end.index)
            out.append(SegmentRef.from_indices(a, b, rate))
            a = b
    return out


def _mirror_merge(chosen):
    intervals: list[list[float]] = []
    for item in chosen:
        s, e = item.segment.start_s, item.segment.end_s
        if intervals and intervals[-1][1] == s:
            intervals[-1][1] = e
        else:
            intervals.append([s, e])
    return tuple((a, b) for a, b in intervals)


# -------------------------------------------------------------- generic run


def test_change_point_segments_coarsens_and_absorbs_the_tail():
    from conftest import block_rows

    X = block_rows(50, 4, (24,), seed=21)
    segs = change_point_segments(X, rate=1.0, min_seg_dur_s=8.0, penalty_c=1.0)
    edges = [segs[0].start.index] + [s.end.index for s in segs]
    assert edges == [0, 24, 50]  # 50 is not a block multiple: tail absorbed

    short = change_point_segments(np.ones((5, 2)), 1.0, 8.0, 1.0)
    assert [(short[0].start.index, short[0].end.index)] == [(0, 5)]


def test_run_generic_micro_session(tmp_path):
    session = make_session(tmp_path)
    result = run_generic(session, micro_provider_set())

    assert not result.cached
    assert _board_indices(result.storyboard) == [15, 27, 47]
    assert result.skim.intervals == ((20.0, 28.0), (44.0, 48.0))
    assert result.skim.total_s == MICRO_BUDGET_S
    assert result.text is not None and result.text_error == ""
    assert result.text.text == CANNED_CAPTIONS[None]
    assert result.text.query is None
    assert result.text.source_skim == result.skim

    meta = result.text.provider_meta
    assert meta["requested_sentences"] == 6
    assert meta["frames_sent"] <= MICRO_CFG.caption_frame_cap
    assert "caption_seconds" not in meta

    for key in GENERIC_KEYS.values():
        assert session.has_artifact(key)
    board_doc, board_meta = session.load_artifact(GENERIC_KEYS["storyboard"])
    assert [set(e) for e in board_doc["entries"]] == [
        {"frame_index", "timestamp_s", "image_locator"}
    ] * 3
    assert board_doc["entries"][0]["image_locator"] == "frames/generic/15"
    assert board_doc["provenance"] == {
        "pipeline": "generic",
        "session": "sess",
        "config_hash": MICRO_CFG.hash(),
        "providers": {
            "frame_features": "fixture-frame-features/1",
            "importance": "fixture-importance/1",
        },
    }
    accepted = [e["item"] for e in board_meta["selection_trace"]["considered"]
                if e["accepted"]]
    assert sorted(accepted) == [15, 27, 47]

    record = session.latency_records()[-1]
    assert record["pipeline"] == "generic" and not record["cached"]
    assert set(record["stages"]) == {
        "embed_frames", "score_importance", "storyboard_select",
        "skim_select", "caption",
    }

    again = run_generic(session, ProviderSet())  # cache needs no providers
    assert again.cached
    assert _board_indices(again.storyboard) == [15, 27, 47]
    assert again.skim == result.skim
    assert again.text == result.text


def test_run_generic_equals_module_composition(tmp_path):
    session = make_session(tmp_path)
    result = run_generic(session, micro_provider_set())

    features = micro_generic_features()
    # the engine reads the curve back at archived (f32) precision
    curve = micro_curve().astype(np.float32).astype(np.float64)

    keep = min(MICRO_CFG.pca_dims_L, features.shape[0] - 1, features.shape[1])
    compressed = pca_project(pca_fit(features, keep), features)
    picked, _ = greedy_diverse(curve, compressed, MICRO_CFG.diversity_delta,
                               MICRO_CFG.generic_board_M)
    assert _board_indices(result.storyboard) == picked

    segments = change_point_segments(
        features, 1.0, MICRO_CFG.min_seg_dur_D_s, MICRO_CFG.kts_penalty_c
    )
    assert [(s.start.index, s.end.index) for s in segments] == [
        (0, 16), (16, 32), (32, 48)
    ]
    candidates = _mirror_split(segments, MICRO_BUDGET_S,
                               MICRO_CFG.min_seg_dur_D_s, 1.0)
    assert len(candidates) == 24
    scored = segment_scores(candidates, ImportanceCurve(scores=curve))
    chosen = knapsack_select(scored, MICRO_BUDGET_S,
                             MICRO_CFG.knapsack_resolution_s)
    assert _mirror_merge(chosen) == result.skim.intervals


def test_force_rerun_is_byte_identical(tmp_path):
    session = make_session(tmp_path)
    providers = micro_provider_set()
    run_generic(session, providers)
    before = {
        key: session.artifact_path(key).read_bytes()
        for key in GENERIC_KEYS.values()
    }
    forced = run_generic(session, providers, force=True)
    assert not forced.cached
    for key, blob in before.items():
        assert session.artifact_path(key).read_bytes() == blob


def test_caption_failure_degrades_to_unavailable_text(tmp_path):
    class _Down:
        def __init__(self):
            self.descriptor = FixtureCaptionProvider().descriptor

        def caption(self, request):
            from egorecap.errors import ProviderError
            raise ProviderError("caption backend down", role="captioner")

    session = make_session(tmp_path)
    providers = micro_provider_set()
    providers.captioner = _Down()
    result = run_generic(session, providers)
    assert result.text is None
    assert "down" in result.text_error
    assert _board_indices(result.storyboard) == [15, 27, 47]
    assert result.skim.intervals == ((20.0, 28.0), (44.0, 48.0))

    doc, _ = session.load_artifact(GENERIC_KEYS["text"])
    assert doc["available"] is False
    assert "down" in doc["reason"]
    assert doc["source_skim"]["intervals"][0] == {"start_s": 20.0, "end_s": 28.0}

    # a later forced run with a working captioner fills the text in
    healed = run_generic(session, micro_provider_set(), force=True)
    assert healed.text is not None and healed.text.text == CANNED_CAPTIONS[None]


def test_missing_captioner_degrades_too(tmp_path):
    session = make_session(tmp_path)
    providers = micro_provider_set()
    providers.captioner = None
    result = run_generic(session, providers)
    assert result.text is None and "captioner" in result.text_error


def test_missing_providers_fail_with_the_role_named(tmp_path):
    session = make_session(tmp_path)
    with pytest.raises(PipelineError) as err:
        run_generic(session, ProviderSet())
    assert err.value.role == "frame_features"
    with pytest.raises(PipelineError) as err:
        run_query(session, "where", "skim", ProviderSet())
    assert err.value.role == "joint_embedding"


def test_archived_embeddings_replace_providers(tmp_path):
    from egorecap import archive

    live = make_session(tmp_path / "a")
    run_generic(live, micro_provider_set())

    # a twin session fed only archives must reproduce the documents exactly
    twin = make_session(tmp_path / "b")
    twin.attach_archive(archive.ROLE_GENERIC_FEATURES, micro_generic_features(),
                        scale=1.0, provider="fixture-frame-features/1")
    twin.attach_archive(archive.ROLE_IMPORTANCE, micro_curve().reshape(-1, 1),
                        scale=1.0, provider="fixture-importance/1")
    caption_only = ProviderSet(
        captioner=FixtureCaptionProvider(canned=dict(CANNED_CAPTIONS))
    )
    result = run_generic(twin, caption_only)
    assert _board_indices(result.storyboard) == [15, 27, 47]
    assert result.skim.intervals == ((20.0, 28.0), (44.0, 48.0))
    for key in GENERIC_KEYS.values():
        assert twin.artifact_path(key).read_bytes() \
            == live.artifact_path(key).read_bytes()


def test_caption_sees_only_skim_frames(tmp_path):
    session = make_session(tmp_path)
    captioner = FixtureCaptionProvider(canned=dict(CANNED_CAPTIONS))
    run_generic(session, micro_provider_set(captioner=captioner))

    sent = captioner.last_request
    assert sent.query is None
    assert sent.prompt == MICRO_CFG.generic_prompt
    assert sent.frame_cap == MICRO_CFG.caption_frame_cap
    assert len(sent.frames) == MICRO_CFG.caption_frame_cap  # 12 in-skim frames
    for frame in sent.frames:
        t = frame.timestamp_s
        assert 20.0 <= t < 28.0 or 44.0 <= t < 48.0


def test_constant_video_still_summarizes(tmp_path):
    cfg = PipelineConfig(generic_fps=1.0, query_fps=1.0, min_seg_dur_D_s=8.0)
    session = make_session(tmp_path, duration_s=2400.0, cfg=cfg)
    captioner = FixtureCaptionProvider()
    providers = ProviderSet(
        frame_features=FixtureFrameFeatureProvider(np.ones((2400, 4))),
        importance=FixtureImportanceProvider(np.full(2400, 0.5)),
        captioner=captioner,
    )
    result = run_generic(session, providers)
    # indistinguishable frames: one storyboard entry, budget filled from t=0
    assert _board_indices(result.storyboard) == [0]
    assert result.skim.intervals == ((0.0, 360.0),)
    assert len(captioner.last_request.frames) == cfg.caption_frame_cap
    assert "100 sampled frames" in result.text.text


# ---------------------------------------------------------------- query run


def test_query_storyboard_frozen(tmp_path):
    session = make_session(tmp_path)
    result = run_query(session, QUERY_DOCK, "storyboard", micro_provider_set())

    assert not result.cached
    assert result.key == query_artifact_key("storyboard", QUERY_DOCK, MICRO_CFG)
    assert _board_indices(result.storyboard) == [20, 24]
    assert result.document["query"] == QUERY_DOCK
    assert result.document["entries"][0]["image_locator"] == "frames/query/20"
    assert result.document["provenance"]["providers"] == {
        "joint_embedding": "fixture-joint/1"
    }
    assert set(result.latency["stages"]) == {
        "embed_text", "embed_frames", "relevance", "select",
    }

    hit = run_query(session, QUERY_DOCK, "storyboard", ProviderSet())
    assert hit.cached
    assert hit.document == result.document
    assert hit.latency["stages"] == {} and hit.latency["total_s"] == 0.0


def test_query_skims_frozen(tmp_path):
    session = make_session(tmp_path)
    providers = micro_provider_set()

    dock = run_query(session, QUERY_DOCK, "skim", providers)
    assert dock.skim.intervals == ((20.0, 28.0),)  # adjacent top-2 merged
    door = run_query(session, QUERY_DOOR, "skim", providers)
    assert door.skim.intervals == ((8.0, 12.0), (36.0, 40.0))
    for result in (dock, door):
        assert result.skim.total_s \
            == MICRO_CFG.topk_k * MICRO_CFG.segment_len_d_s


def test_query_text_captions_its_own_skim(tmp_path):
    session = make_session(tmp_path)
    captioner = FixtureCaptionProvider(canned=dict(CANNED_CAPTIONS))
    result = run_query(session, QUERY_DOCK, "text",
                       micro_provider_set(captioner=captioner))

    assert result.text.text == CANNED_CAPTIONS[QUERY_DOCK]
    assert result.text.source_skim.intervals == ((20.0, 28.0),)
    assert result.text.provider_meta["requested_sentences"] == 1
    assert captioner.last_request.query == QUERY_DOCK
    assert captioner.last_request.prompt \
        == QUERY_PROMPT_TEMPLATE.format(query=QUERY_DOCK)
    for frame in captioner.last_request.frames:
        assert 20.0 <= frame.timestamp_s < 28.0
    assert set(result.latency["stages"]) == {
        "embed_text", "embed_segments", "relevance", "select", "caption",
    }

    # the intermediate skim was cached under its own key, marked derived
    skim_key = query_artifact_key("skim", QUERY_DOCK, MICRO_CFG)
    skim_doc, skim_meta = session.load_artifact(skim_key)
    assert skim_meta["derived_from"] == "text"
    hit = run_query(session, QUERY_DOCK, "skim", ProviderSet())
    assert hit.cached and hit.document == skim_doc


def test_query_text_degrades_without_captioner(tmp_path):
    session = make_session(tmp_path)
    providers = micro_provider_set()
    providers.captioner = None
    result = run_query(session, QUERY_DOOR, "text", providers)
    assert result.text is None
    assert result.document["available"] is False
    assert "captioner" in result.document["reason"]
    assert result.document["source_skim"]["total_s"] == 8.0


def test_query_cache_skips_provider_calls(tmp_path):
    class _Counting:
        def __init__(self, inner):
            self.inner = inner
            self.descriptor = inner.descriptor
            self.calls = 0

        def embed_frames(self, frames):
            self.calls += 1
            return self.inner.embed_frames(frames)

        def embed_segments(self, segments):
            self.calls += 1
            return self.inner.embed_segments(segments)

        def embed_text(self, text):
            self.calls += 1
            return self.inner.embed_text(text)

    session = make_session(tmp_path)
    providers = micro_provider_set()
    counter = _Counting(providers.joint_embedding)
    providers.joint_embedding = counter

    run_query(session, QUERY_DOCK, "storyboard", providers)
    assert counter.calls == 2  # text + frames
    run_query(session, QUERY_DOCK, "storyboard", providers)
    assert counter.calls == 2

    records = session.latency_records()
    assert [r["cached"] for r in records] == [False, True]


def test_query_validation_and_keys(tmp_path):
    session = make_session(tmp_path)
    with pytest.raises(ValidationError):
        run_query(session, "   ", "skim", micro_provider_set())
    with pytest.raises(ValidationError):
        run_query(session, "fine", "collage", micro_provider_set())

    assert query_artifact_key("storyboard", "q", PipelineConfig()) \
        == "query-storyboard-ef298407900bd159"
    keys = {
        query_artifact_key(m, q, cfg)
        for m in ("storyboard", "skim", "text")
        for q in ("q", "q2")
        for cfg in (PipelineConfig(), MICRO_CFG)
    }
    assert len(keys) == 12
    with pytest.raises(ValidationError):
        query_artifact_key("collage", "q", MICRO_CFG)


def test_archive_space_must_match_the_provider(tmp_path):
    session = make_session(tmp_path)
    v1 = micro_provider_set()
    run_query(session, QUERY_DOCK, "storyboard", v1)
    run_query(session, QUERY_DOCK, "skim", v1)

    v2 = micro_provider_set(joint_version="fixture-joint/2")
    for modality in ("storyboard", "skim"):
        with pytest.raises(ContractViolation, match="fixture-joint/1") as err:
            run_query(session, QUERY_DOOR, modality, v2)
        assert err.value.role == "joint_embedding"


def test_short_session_yields_partial_skim(tmp_path):
    rng = np.random.default_rng(6)
    session = make_session(tmp_path, duration_s=4.0)  # one 4 s segment < k=2
    providers = ProviderSet(
        joint_embedding=FixtureJointProvider(
            rng.standard_normal((4, 12)).astype(np.float32),
            rng.standard_normal((1, 12)).astype(np.float32),
            segment_len_s=MICRO_CFG.segment_len_d_s,
        )
    )
    result = run_query(session, "anything at all", "skim", providers)
    assert result.skim.intervals == ((0.0, 4.0),)


def test_latency_report_covers_only_fresh_queries(tmp_path):
    session = make_session(tmp_path)
    providers = micro_provider_set()
    run_generic(session, providers)
    run_query(session, QUERY_DOCK, "storyboard", providers)
    run_query(session, QUERY_DOCK, "storyboard", providers)  # cached
    run_query(session, QUERY_DOOR, "text", providers)

    report = latency_report(session)
    assert set(report) == {"storyboard", "text"}  # skim never queried directly
    assert report["storyboard"]["count"] == 1  # the cache hit is excluded
    assert report["text"]["count"] == 1
    # text pays for the skim stages before it can caption
    assert {"embed_segments", "relevance", "select", "caption"} \
        <= set(report["text"]["stages"])
    for row in report.values():
        assert row["total"]["mean_s"] >= 0.0
        assert row["total"]["std_s"] == 0.0  # single sample

    assert latency_report(make_session(tmp_path, session_id="idle")) == {}
