"""End-to-end summarization: the query-free and query-driven pipelines.

Both runs walk the same four steps — preprocess, embed, score relevance,
select — and differ only in where relevance comes from: a learned per-frame
importance curve for the query-free summary, dot products against a text
embedding for queries. Text output always captions the skim, never the raw
video, so every modality of one run describes the same selected content.

Results are cached on the session as JSON documents that contain no
wall-clock values, which makes repeated runs byte-identical; per-stage timing
goes to the artifact's side metadata and the session latency log.
"""

from __future__ import annotations

import hashlib
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import archive
from .changepoint import kts_segment, segment_scores
from .errors import ContractViolation, PipelineError, ProviderError, ValidationError
from .ingest import Session, fixed_segmentation
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
)
from .numerics import pca_fit, pca_project
from .providers import base as provider_ops
from .providers.base import (
    CaptionRequest,
    FrameHandle,
    ProviderSet,
    SegmentHandle,
    uniform_subsample,
)
from .select import greedy_diverse, knapsack_select, topk_chrono

MODALITIES = ("storyboard", "skim", "text")

GENERIC_KEYS = {
    "storyboard": "generic-storyboard",
    "skim": "generic-skim",
    "text": "generic-text",
}

# The captioner length penalty is a pass-through knob; these record what the
# engine asked for so requested vs. realized lengths can be compared later.
GENERIC_SENTENCE_TARGET = 6
QUERY_SENTENCE_TARGET = 1

QUERY_PROMPT_TEMPLATE = (
    "These clips were selected from the robot's recording as most relevant "
    "to the question. Answer it in one sentence: {query}"
)

_EMBED_CHUNK = 4096

_GENERIC_LOCKS: dict[str, threading.Lock] = {}
_LOCKS_GUARD = threading.Lock()


def _generic_guard(session: Session) -> threading.Lock:
    key = str(Path(session.root).resolve())
    with _LOCKS_GUARD:
        return _GENERIC_LOCKS.setdefault(key, threading.Lock())


class StageClock:
    """Accumulates wall-clock seconds per named stage."""

    def __init__(self):
        self.stages: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        started = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - started
            self.stages[name] = self.stages.get(name, 0.0) + elapsed

    @property
    def total_s(self) -> float:
        return sum(self.stages.values())


def query_artifact_key(modality: str, query: str, cfg: PipelineConfig) -> str:
    """Cache key over (modality, query text, full configuration)."""
    if modality not in MODALITIES:
        raise ValidationError(f"unknown modality {modality!r}")
    digest = hashlib.sha256(
        f"{modality}\x00{query}\x00{cfg.hash()}".encode("utf-8")
    ).hexdigest()[:16]
    return f"query-{modality}-{digest}"


# ---------------------------------------------------------------- inputs

def _require(provider, role: str, what: str):
    if provider is None:
        raise PipelineError(
            f"{what} needs the {role!r} provider: the session has no archive "
            "for it and none was supplied",
            role=role,
        )
    return provider


def _frame_handle(session: Session, stream: str, index: int) -> FrameHandle:
    info = session.stream(stream)
    image = None
    if info.directory is not None:
        image = str(session.frame_path(stream, index))
    return FrameHandle(index=index, rate=info.rate, image=image)


def _segment_handle(session: Session, stream: str, seg: SegmentRef) -> SegmentHandle:
    info = session.stream(stream)
    images = None
    if info.directory is not None:
        images = tuple(
            str(session.frame_path(stream, i))
            for i in range(seg.start.index, seg.end.index)
        )
    return SegmentHandle(start=seg.start.index, end=seg.end.index,
                         rate=info.rate, images=images)


def _embed_stream_frames(provider, session: Session, stream: str) -> EmbeddingMatrix:
    info = session.stream(stream)
    parts = []
    for start in range(0, info.count, _EMBED_CHUNK):
        chunk = [
            _frame_handle(session, stream, i)
            for i in range(start, min(start + _EMBED_CHUNK, info.count))
        ]
        parts.append(provider_ops.embed_frames(provider, chunk).values)
    return EmbeddingMatrix(values=np.vstack(parts), space=provider.descriptor.version)


def generic_features(session: Session, providers: ProviderSet) -> EmbeddingMatrix:
    """Per-frame visual features at the generic rate, archived on first use."""
    if session.has_archive(archive.ROLE_GENERIC_FEATURES):
        _, mat = session.load_archive(archive.ROLE_GENERIC_FEATURES)
        return mat
    provider = _require(providers.frame_features, "frame_features",
                        "generic summarization")
    mat = _embed_stream_frames(provider, session, "generic")
    session.attach_archive(archive.ROLE_GENERIC_FEATURES, mat.values,
                           scale=session.stream("generic").rate, provider=mat.space)
    return mat


def importance_curve(
    session: Session,
    providers: ProviderSet,
    features: Optional[EmbeddingMatrix] = None,
) -> tuple[ImportanceCurve, str]:
    """The frame-importance curve and the version string of its source."""
    if session.has_archive(archive.ROLE_IMPORTANCE):
        header, curve = session.load_archive(archive.ROLE_IMPORTANCE)
        return curve, header.provider
    provider = _require(providers.importance, "importance", "generic summarization")
    feats = features if features is not None else generic_features(session, providers)
    curve = provider_ops.score_importance(provider, feats)
    version = provider.descriptor.version
    session.attach_archive(archive.ROLE_IMPORTANCE, curve.scores.reshape(-1, 1),
                           scale=session.stream("generic").rate, provider=version)
    # hand back the archived precision, so results never depend on whether the
    # curve came from the provider or from disk
    rounded = curve.scores.astype(np.float32).astype(np.float64)
    return ImportanceCurve(scores=rounded), version


def query_frame_embeddings(session: Session, providers: ProviderSet) -> EmbeddingMatrix:
    """Joint-space rows for the low-rate stream's frames, archived on first use."""
    if session.has_archive(archive.ROLE_QUERY_FRAME_EMB):
        _, mat = session.load_archive(archive.ROLE_QUERY_FRAME_EMB)
        return mat
    provider = _require(providers.joint_embedding, "joint_embedding",
                        "query summarization")
    mat = _embed_stream_frames(provider, session, "query")
    session.attach_archive(archive.ROLE_QUERY_FRAME_EMB, mat.values,
                           scale=session.stream("query").rate, provider=mat.space)
    return mat


def query_segment_embeddings(
    session: Session,
    providers: ProviderSet,
) -> tuple[list[SegmentRef], EmbeddingMatrix]:
    """The fixed segmentation of the low-rate stream plus one joint row each."""
    info = session.stream("query")
    segments = fixed_segmentation(info.count, info.rate, session.cfg.segment_len_d_s)
    if session.has_archive(archive.ROLE_QUERY_SEGMENT_EMB):
        _, mat = session.load_archive(archive.ROLE_QUERY_SEGMENT_EMB)
        return segments, mat
    provider = _require(providers.joint_embedding, "joint_embedding",
                        "query summarization")
    handles = [_segment_handle(session, "query", seg) for seg in segments]
    mat = provider_ops.embed_segments(provider, handles, session.cfg.segment_len_d_s)
    session.attach_archive(archive.ROLE_QUERY_SEGMENT_EMB, mat.values,
                           scale=session.cfg.segment_len_d_s, provider=mat.space)
    return segments, mat


def _check_joint_space(archived_space: str, provider) -> None:
    version = provider.descriptor.version
    if archived_space != version:
        raise ContractViolation(
            f"session embeddings live in space {archived_space!r} but the "
            f"attached provider is {version!r}; re-embed or swap the provider",
            role="joint_embedding",
        )


# ---------------------------------------------------------------- selection

def _pca_compress(values: np.ndarray, n_components: int) -> np.ndarray:
    """Project features onto the leading components; pass through when the
    stream is too short to fit a basis."""
    n, dim = values.shape
    keep = min(n_components, n - 1, dim)
    if keep < 1:
        return np.asarray(values, dtype=np.float64)
    model = pca_fit(values, keep)
    return pca_project(model, values)


def change_point_segments(
    features: np.ndarray,
    rate: float,
    min_seg_dur_s: float,
    penalty_c: float,
) -> list[SegmentRef]:
    """Variable-length segments from change-point detection, at any length.

    The exact detector holds an O(n^2) scatter table, which a full-rate
    40-minute stream (36000 frames) would blow past. Frames are first
    averaged into minimum-duration blocks and change points found between
    blocks — at default rates that is 2400 points — then block cuts map back
    to frame indices. Cuts are thereby restricted to the block grid, which is
    exactly the spacing the minimum segment duration enforces anyway.
    """
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    block_len = max(1, int(round(min_seg_dur_s * rate)))
    if n <= block_len:
        return [SegmentRef.from_indices(0, n, rate)]
    n_blocks = n // block_len
    used = n_blocks * block_len
    blocks = features[:used].reshape(n_blocks, block_len, -1).mean(axis=1)

    result = kts_segment(blocks, rate=1.0 / min_seg_dur_s,
                         min_seg_dur_s=min_seg_dur_s, penalty_c=penalty_c)
    out = []
    for seg in result.segments:
        a = seg.start.index * block_len
        b = n if seg.end.index == n_blocks else seg.end.index * block_len
        out.append(SegmentRef.from_indices(a, b, rate))
    return out


def _split_over_budget(
    segments: list[SegmentRef],
    budget_s: float,
    min_seg_dur_s: float,
    rate: float,
) -> list[SegmentRef]:
    """Re-split any segment longer than the whole budget at the minimum
    duration, so a near-constant video (one giant segment) still yields a
    skim instead of an unfillable knapsack."""
    block = max(1, int(round(min_seg_dur_s * rate)))
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


def _edit_list(chosen: list[ScoredSegment]) -> SkimEditList:
    """Chronological edit list; touching intervals merge into one."""
    intervals: list[tuple[float, float]] = []
    for item in chosen:
        start, end = item.segment.start_s, item.segment.end_s
        if intervals and abs(intervals[-1][1] - start) < 1e-9:
            intervals[-1] = (intervals[-1][0], end)
        else:
            intervals.append((start, end))
    return SkimEditList(intervals=tuple(intervals))


def _storyboard(
    session: Session, stream: str, indices: list[int], cap: int
) -> StoryboardManifest:
    info = session.stream(stream)
    entries = tuple(
        StoryboardEntry(frame=FrameRef(i, info.rate),
                        image_locator=Session.frame_locator(stream, i))
        for i in indices
    )
    return StoryboardManifest(entries=entries, max_entries=cap)


# ---------------------------------------------------------------- caption

def _caption_skim(
    session: Session,
    providers: ProviderSet,
    skim: SkimEditList,
    stream: str,
    prompt: str,
    query: Optional[str],
    sentence_target: int,
) -> TextSummary:
    """Caption the skim content, never the raw video: frames are drawn only
    from inside the edit-list intervals, then capped by uniform subsampling."""
    provider = _require(providers.captioner, "captioner", "text summarization")
    info = session.stream(stream)
    indices: list[int] = []
    for start_s, end_s in skim.intervals:
        first = int(round(start_s * info.rate))
        last = min(int(round(end_s * info.rate)), info.count)
        indices.extend(range(first, last))
    if not indices:
        raise PipelineError("cannot caption an empty skim", role="captioner")
    sampled = [indices[i] for i in uniform_subsample(len(indices),
                                                     session.cfg.caption_frame_cap)]
    request = CaptionRequest(
        frames=tuple(_frame_handle(session, stream, i) for i in sampled),
        prompt=prompt,
        length_penalty=session.cfg.caption_length_penalty,
        query=query,
        frame_cap=session.cfg.caption_frame_cap,
    )
    text, meta = provider_ops.caption(provider, request)
    meta.pop("caption_seconds", None)  # wall-clock stays out of documents
    meta["requested_sentences"] = sentence_target
    return TextSummary(text=text, source_skim=skim, query=query, provider_meta=meta)


def _unavailable_text_doc(skim: SkimEditList, query: Optional[str], reason: str) -> dict:
    return {
        "kind": "text",
        "available": False,
        "reason": reason,
        "text": "",
        "query": query,
        "source_skim": skim.to_document(),
        "provider_meta": {},
    }


def _provenance(session: Session, pipeline: str, spaces: dict[str, str]) -> dict:
    return {
        "pipeline": pipeline,
        "session": session.id,
        "config_hash": session.cfg.hash(),
        "providers": dict(sorted(spaces.items())),
    }


# ---------------------------------------------------------------- generic run

@dataclass(frozen=True)
class GenericResult:
    storyboard: StoryboardManifest
    skim: SkimEditList
    text: Optional[TextSummary]
    text_error: str = ""
    cached: bool = False


def run_generic(
    session: Session,
    providers: Optional[ProviderSet] = None,
    force: bool = False,
) -> GenericResult:
    """Produce (and cache) the query-free storyboard, skim, and text summary.

    Runs at most once per session unless forced; concurrent callers block on
    a per-session guard and then see the cached artifacts. A captioner
    failure degrades the run: storyboard and skim are kept, the text artifact
    records why it is unavailable.
    """
    providers = providers or ProviderSet()
    cfg = session.cfg
    with _generic_guard(session):
        if not force and all(session.has_artifact(k) for k in GENERIC_KEYS.values()):
            return load_generic_result(session, cached=True)

        clock = StageClock()
        with clock.stage("embed_frames"):
            features = generic_features(session, providers)
        with clock.stage("score_importance"):
            curve, importance_space = importance_curve(session, providers, features)

        with clock.stage("storyboard_select"):
            compressed = _pca_compress(features.values, cfg.pca_dims_L)
            picked, trace = greedy_diverse(
                curve.scores, compressed, cfg.diversity_delta, cfg.generic_board_M
            )
            storyboard = _storyboard(session, "generic", picked, cfg.generic_board_M)

        rate = session.stream("generic").rate
        budget_s = session.meta.duration_s * cfg.knapsack_budget_K_pct / 100.0
        with clock.stage("skim_select"):
            segments = change_point_segments(
                features.values, rate, cfg.min_seg_dur_D_s, cfg.kts_penalty_c
            )
            candidates = _split_over_budget(segments, budget_s,
                                            cfg.min_seg_dur_D_s, rate)
            scored = segment_scores(candidates, curve)
            chosen = knapsack_select(scored, budget_s, cfg.knapsack_resolution_s)
            skim = _edit_list(chosen)
            skim.check_within(session.meta.duration_s, budget_s)

        spaces = {"frame_features": features.space, "importance": importance_space}
        text: Optional[TextSummary] = None
        text_error = ""
        with clock.stage("caption"):
            try:
                text = _caption_skim(
                    session, providers, skim, stream="generic",
                    prompt=cfg.generic_prompt, query=None,
                    sentence_target=GENERIC_SENTENCE_TARGET,
                )
            except (PipelineError, ProviderError) as exc:
                text_error = str(exc) or "captioner unavailable"

        latency = {
            "pipeline": "generic",
            "modality": "all",
            "cached": False,
            "stages": dict(clock.stages),
            "total_s": clock.total_s,
        }
        meta = {"latency": latency}
        prov = _provenance(session, "generic", spaces)

        session.store_artifact(
            GENERIC_KEYS["storyboard"],
            {**storyboard.to_document(), "provenance": prov},
            {**meta, "selection_trace": trace.to_document()},
        )
        session.store_artifact(
            GENERIC_KEYS["skim"],
            {**skim.to_document(), "provenance": prov},
            meta,
        )
        if text is not None:
            text_doc = {
                **text.to_document(),
                "available": True,
                "provenance": _provenance(
                    session, "generic",
                    {**spaces, "captioner": text.provider_meta.get("provider", "")},
                ),
            }
        else:
            text_doc = {**_unavailable_text_doc(skim, None, text_error),
                        "provenance": prov}
        session.store_artifact(GENERIC_KEYS["text"], text_doc, meta)
        session.append_latency(latency)

        return GenericResult(storyboard=storyboard, skim=skim, text=text,
                             text_error=text_error, cached=False)


def storyboard_from_document(doc: dict, rate: float, cap: int) -> StoryboardManifest:
    entries = tuple(
        StoryboardEntry(frame=FrameRef(e["frame_index"], rate),
                        image_locator=e["image_locator"])
        for e in doc["entries"]
    )
    return StoryboardManifest(entries=entries, max_entries=cap)


def skim_from_document(doc: dict) -> SkimEditList:
    return SkimEditList(
        intervals=tuple((iv["start_s"], iv["end_s"]) for iv in doc["intervals"])
    )


def text_from_document(doc: dict) -> tuple[Optional[TextSummary], str]:
    if not doc.get("available", True):
        return None, doc.get("reason", "text unavailable")
    summary = TextSummary(
        text=doc["text"],
        source_skim=skim_from_document(doc["source_skim"]),
        query=doc.get("query"),
        provider_meta=doc.get("provider_meta", {}),
    )
    return summary, ""


def load_generic_result(session: Session, cached: bool = True) -> GenericResult:
    board_doc, _ = session.load_artifact(GENERIC_KEYS["storyboard"])
    skim_doc, _ = session.load_artifact(GENERIC_KEYS["skim"])
    text_doc, _ = session.load_artifact(GENERIC_KEYS["text"])
    storyboard = storyboard_from_document(
        board_doc, session.stream("generic").rate, session.cfg.generic_board_M
    )
    text, text_error = text_from_document(text_doc)
    return GenericResult(
        storyboard=storyboard,
        skim=skim_from_document(skim_doc),
        text=text,
        text_error=text_error,
        cached=cached,
    )


# ---------------------------------------------------------------- query run

@dataclass(frozen=True)
class QueryResult:
    modality: str
    query: str
    key: str
    document: dict
    latency: dict
    cached: bool
    storyboard: Optional[StoryboardManifest] = None
    skim: Optional[SkimEditList] = None
    text: Optional[TextSummary] = None


def run_query(
    session: Session,
    query: str,
    modality: str,
    providers: Optional[ProviderSet] = None,
) -> QueryResult:
    """Answer one query in one modality; identical queries hit the cache.

    Storyboard: diverse high-relevance frames from the low-rate stream.
    Skim: the k most relevant fixed segments, chronologically. Text: the skim
    is generated first (and cached under its own key), then captioned with
    the query.
    """
    if not query or not query.strip():
        raise ValidationError("query must be non-empty")
    if modality not in MODALITIES:
        raise ValidationError(f"unknown modality {modality!r}")
    providers = providers or ProviderSet()
    cfg = session.cfg
    key = query_artifact_key(modality, query, cfg)

    if session.has_artifact(key):
        document, meta = session.load_artifact(key)
        latency = {
            "pipeline": "query", "modality": modality, "cached": True,
            "stages": {}, "total_s": 0.0,
        }
        session.append_latency(latency)
        return _query_result(session, query, modality, key, document, latency,
                             cached=True)

    provider = _require(providers.joint_embedding, "joint_embedding",
                        "query summarization")
    clock = StageClock()
    with clock.stage("embed_text"):
        q = provider_ops.embed_text(provider, query)

    trace_doc = None
    if modality == "storyboard":
        with clock.stage("embed_frames"):
            frame_mat = query_frame_embeddings(session, providers)
        _check_joint_space(frame_mat.space, provider)
        with clock.stage("relevance"):
            scores = frame_mat.values.astype(np.float64) @ q.astype(np.float64)
        with clock.stage("select"):
            picked, trace = greedy_diverse(
                scores, frame_mat.values, cfg.diversity_delta, cfg.query_board_m
            )
            board = _storyboard(session, "query", picked, cfg.query_board_m)
        trace_doc = trace.to_document()
        document = {
            **board.to_document(),
            "query": query,
            "provenance": _provenance(session, "query",
                                      {"joint_embedding": frame_mat.space}),
        }
    elif modality == "skim":
        skim, space = _query_skim(session, providers, provider, q, clock)
        document = {
            **skim.to_document(),
            "query": query,
            "provenance": _provenance(session, "query", {"joint_embedding": space}),
        }
    else:  # text
        skim, space = _query_skim(session, providers, provider, q, clock)
        skim_key = query_artifact_key("skim", query, cfg)
        if not session.has_artifact(skim_key):
            session.store_artifact(
                skim_key,
                {
                    **skim.to_document(),
                    "query": query,
                    "provenance": _provenance(session, "query",
                                              {"joint_embedding": space}),
                },
                {"latency": {"pipeline": "query", "modality": "skim",
                             "cached": False, "stages": dict(clock.stages),
                             "total_s": clock.total_s},
                 "derived_from": "text"},
            )
        spaces = {"joint_embedding": space}
        with clock.stage("caption"):
            try:
                summary = _caption_skim(
                    session, providers, skim, stream="query",
                    prompt=QUERY_PROMPT_TEMPLATE.format(query=query), query=query,
                    sentence_target=QUERY_SENTENCE_TARGET,
                )
            except (PipelineError, ProviderError) as exc:
                summary = None
                reason = str(exc) or "captioner unavailable"
        if summary is not None:
            document = {
                **summary.to_document(),
                "available": True,
                "provenance": _provenance(
                    session, "query",
                    {**spaces,
                     "captioner": summary.provider_meta.get("provider", "")},
                ),
            }
        else:
            document = {
                **_unavailable_text_doc(skim, query, reason),
                "provenance": _provenance(session, "query", spaces),
            }

    latency = {
        "pipeline": "query", "modality": modality, "cached": False,
        "stages": dict(clock.stages), "total_s": clock.total_s,
    }
    meta = {"latency": latency}
    if trace_doc is not None:
        meta["selection_trace"] = trace_doc
    session.store_artifact(key, document, meta)
    session.append_latency(latency)
    return _query_result(session, query, modality, key, document, latency,
                         cached=False)


def _query_skim(
    session: Session,
    providers: ProviderSet,
    provider,
    q: np.ndarray,
    clock: StageClock,
) -> tuple[SkimEditList, str]:
    cfg = session.cfg
    with clock.stage("embed_segments"):
        segments, seg_mat = query_segment_embeddings(session, providers)
    _check_joint_space(seg_mat.space, provider)
    with clock.stage("relevance"):
        seg_scores = seg_mat.values.astype(np.float64) @ q.astype(np.float64)
        scored = [
            ScoredSegment(segment=seg, score=float(s))
            for seg, s in zip(segments, seg_scores)
        ]
    with clock.stage("select"):
        picked, _partial = topk_chrono(scored, cfg.topk_k)
        skim = _edit_list(picked)
    return skim, seg_mat.space


def _query_result(
    session: Session,
    query: str,
    modality: str,
    key: str,
    document: dict,
    latency: dict,
    cached: bool,
) -> QueryResult:
    storyboard = skim = text = None
    if modality == "storyboard":
        storyboard = storyboard_from_document(
            document, session.stream("query").rate, session.cfg.query_board_m
        )
    elif modality == "skim":
        skim = skim_from_document(document)
    else:
        text, _ = text_from_document(document)
    return QueryResult(
        modality=modality, query=query, key=key, document=document,
        latency=latency, cached=cached,
        storyboard=storyboard, skim=skim, text=text,
    )


# ---------------------------------------------------------------- reporting

def latency_report(session: Session) -> dict:
    """Mean/std of per-stage and total seconds per query modality.

    Cache hits are excluded — they measure the cache, not generation. The
    report is empty until a query has run; modalities never queried have no
    row. For text rows the stage breakdown contains the skim stages plus
    caption, since the skim must exist before it can be captioned.
    """
    fresh = [
        r for r in session.latency_records()
        if r.get("pipeline") == "query" and not r.get("cached")
    ]
    report: dict[str, dict] = {}
    for modality in MODALITIES:
        records = [r for r in fresh if r.get("modality") == modality]
        if not records:
            continue
        stage_names = sorted({name for r in records for name in r["stages"]})
        stages = {}
        for name in stage_names:
            values = [r["stages"].get(name, 0.0) for r in records]
            stages[name] = {
                "mean_s": float(np.mean(values)),
                "std_s": float(np.std(values)),
            }
        totals = [r["total_s"] for r in records]
        report[modality] = {
            "count": len(records),
            "stages": stages,
            "total": {"mean_s": float(np.mean(totals)),
                      "std_s": float(np.std(totals))},
        }
    return report
