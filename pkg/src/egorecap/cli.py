"""Batch command line over the engine: ingest, embed, summarize, query, export.

Every command prints human-readable progress on stdout and, on any engine
error, a single structured JSON object on stderr with a nonzero exit code,
so shell scripts can branch on failures without scraping prose.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import subprocess
import sys
from dataclasses import replace
from pathlib import Path

from . import pipeline, service
from .errors import EngineError, IngestError, ValidationError
from .ingest import Session, ingest_video, list_sessions
from .model import PipelineConfig, config_from_mapping, validate_config
from .providers.base import ProviderSet
from .providers.fixtures import hash_provider_set
from .providers.wire import http_provider_set

ASSEMBLER_ENV = "EGORECAP_ASSEMBLER"
DEFAULT_ASSEMBLER = (
    'ffmpeg -hide_banner -loglevel error -i {input} -vf "{filter}" -an {output}'
)

# (option strings, config field, type) — one flag per PipelineConfig field
_CONFIG_FLAGS = [
    (("--generic-fps",), "generic_fps", float),
    (("--query-fps",), "query_fps", float),
    (("--segment-len-d-s",), "segment_len_d_s", float),
    (("--min-seg-dur-d-s",), "min_seg_dur_D_s", float),
    (("--pca-dims-l",), "pca_dims_L", int),
    (("--diversity-delta", "--delta"), "diversity_delta", float),
    (("--generic-board-m",), "generic_board_M", int),
    (("--query-board-m",), "query_board_m", int),
    (("--k-pct", "--knapsack-budget-k-pct"), "knapsack_budget_K_pct", float),
    (("--topk-k",), "topk_k", int),
    (("--caption-frame-cap",), "caption_frame_cap", int),
    (("--caption-length-penalty",), "caption_length_penalty", float),
    (("--kts-penalty-c",), "kts_penalty_c", float),
    (("--knapsack-resolution-s",), "knapsack_resolution_s", float),
    (("--generic-prompt",), "generic_prompt", str),
]


def _add_config_flags(ap: argparse.ArgumentParser):
    defaults = PipelineConfig()
    group = ap.add_argument_group("pipeline configuration")
    for flags, dest, typ in _CONFIG_FLAGS:
        group.add_argument(
            *flags, dest=dest, type=typ, default=None,
            help=f"default {getattr(defaults, dest)!r}",
        )


def _config_overrides(args) -> dict:
    return {
        dest: getattr(args, dest)
        for _flags, dest, _typ in _CONFIG_FLAGS
        if getattr(args, dest, None) is not None
    }


def _add_provider_flags(ap: argparse.ArgumentParser):
    ap.add_argument(
        "--providers",
        default=os.getenv(service.PROVIDER_ENDPOINT_ENV),
        help="HTTP endpoint serving the provider roles",
    )
    ap.add_argument(
        "--hash-providers", action="store_true",
        help="use deterministic stand-in providers (no model weights)",
    )


def _provider_set(args) -> ProviderSet:
    if getattr(args, "hash_providers", False):
        return hash_provider_set()
    if getattr(args, "providers", None):
        return http_provider_set(args.providers)
    return ProviderSet()


def _load_session(args) -> Session:
    return Session.load(Path(args.root) / args.session)


def _apply_overrides(session: Session, args):
    overrides = _config_overrides(args)
    if overrides:
        session.cfg = validate_config(replace(session.cfg, **overrides))
        session.save()


def _fail(exc: EngineError) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("role", "violations", "diagnostics"):
        value = getattr(exc, attr, None)
        if value:
            payload[attr] = value
    print(json.dumps(payload), file=sys.stderr)
    return 1


# ------------------------------------------------------------------ commands

def cmd_ingest(args) -> int:
    cfg = config_from_mapping(_config_overrides(args))
    session = ingest_video(
        args.root, args.session, args.source,
        native_fps=args.native_fps, cfg=cfg, template=args.extractor,
    )
    print(f"session {session.id}: {session.meta.duration_s:.1f}s "
          f"({session.meta.frame_count} frames at {session.meta.native_fps:g} fps)")
    for name, info in sorted(session.streams.items()):
        print(f"  stream {name}: {info.count} frames at {info.rate:g} fps")
    for warning in session.warnings:
        print(f"  warning: {warning}")
    return 0


def cmd_embed(args) -> int:
    session = _load_session(args)
    providers = _provider_set(args)
    roles = args.roles or ["generic_features", "importance",
                           "query_frame_emb", "query_segment_emb"]
    if "generic_features" in roles:
        mat = pipeline.generic_features(session, providers)
        print(f"  generic_features: {mat.rows}x{mat.dim} [{mat.space}]")
    if "importance" in roles:
        curve, space = pipeline.importance_curve(session, providers)
        print(f"  importance: {len(curve)} scores [{space}]")
    if "query_frame_emb" in roles:
        mat = pipeline.query_frame_embeddings(session, providers)
        print(f"  query_frame_emb: {mat.rows}x{mat.dim} [{mat.space}]")
    if "query_segment_emb" in roles:
        segments, mat = pipeline.query_segment_embeddings(session, providers)
        print(f"  query_segment_emb: {mat.rows}x{mat.dim} over "
              f"{len(segments)} segments [{mat.space}]")
    return 0


def cmd_summarize_generic(args) -> int:
    session = _load_session(args)
    _apply_overrides(session, args)
    result = pipeline.run_generic(session, _provider_set(args), force=args.force)
    print(f"skim: {result.skim.total_s:.1f}s in {len(result.skim.intervals)} "
          f"intervals (budget "
          f"{session.meta.duration_s * session.cfg.knapsack_budget_K_pct / 100:.1f}s)")
    print(f"storyboard: {len(result.storyboard.entries)} frames")
    if result.text is not None:
        print(f"text: {result.text.text}")
    else:
        print(f"text unavailable: {result.text_error}")
    if result.cached:
        print("(served from cache; use --force to regenerate)")
    return 0


def cmd_query(args) -> int:
    session = _load_session(args)
    result = pipeline.run_query(session, args.text, args.modality,
                                _provider_set(args))
    if args.json:
        print(json.dumps({"key": result.key, "cached": result.cached,
                          "document": result.document}, indent=2, sort_keys=True))
        return 0
    if result.storyboard is not None:
        for entry in result.storyboard.entries:
            print(f"  {entry.timestamp_s:8.1f}s  {entry.image_locator}")
    elif result.skim is not None:
        for start_s, end_s in result.skim.intervals:
            print(f"  {start_s:8.1f}s .. {end_s:.1f}s")
        print(f"  total {result.skim.total_s:.1f}s")
    elif result.text is not None:
        print(result.text.text)
        print("from skim:", ", ".join(
            f"{s:g}-{e:g}s" for s, e in result.text.source_skim.intervals))
    else:
        print(f"text unavailable: {result.document.get('reason', '')}")
    if result.cached:
        print("(cached)")
    return 0


def _ffmpeg_filter(intervals) -> str:
    expr = "+".join(f"between(t,{s:g},{e:g})" for s, e in intervals)
    return f"select='{expr}',setpts=N/FRAME_RATE/TB"


def cmd_export_skim(args) -> int:
    session = _load_session(args)
    key = args.key
    if args.query:
        key = pipeline.query_artifact_key("skim", args.query, session.cfg)
    document, _meta = session.load_artifact(key)
    if document.get("kind") != "skim":
        raise ValidationError(f"artifact {key!r} is not a skim")
    intervals = [(iv["start_s"], iv["end_s"]) for iv in document["intervals"]]
    if not intervals:
        raise ValidationError(f"skim {key!r} has an empty edit list; nothing to export")

    edl_path = Path(args.output).with_suffix(".edl.json")
    edl_path.parent.mkdir(parents=True, exist_ok=True)
    edl_path.write_text(json.dumps(document, indent=2, sort_keys=True))

    template = args.assembler or os.getenv(ASSEMBLER_ENV) or DEFAULT_ASSEMBLER
    cmd = template.format(
        input=shlex.quote(session.meta.source_uri),
        output=shlex.quote(args.output),
        filter=_ffmpeg_filter(intervals),
        edl=shlex.quote(str(edl_path)),
    )
    proc = subprocess.run(cmd, shell=True, capture_output=True, text=True)
    if proc.returncode != 0:
        raise IngestError(
            f"assembler exited {proc.returncode}",
            diagnostics=(proc.stderr or proc.stdout).strip(),
        )
    total = sum(e - s for s, e in intervals)
    print(f"wrote {args.output} ({total:.1f}s from {len(intervals)} intervals; "
          f"edit list at {edl_path})")
    return 0


def cmd_report(args) -> int:
    session = _load_session(args)
    report = pipeline.latency_report(session)
    traces = {}
    for key in session.artifact_keys():
        _doc, meta = session.load_artifact(key)
        if "selection_trace" in meta:
            traces[key] = meta["selection_trace"]
    if args.json:
        print(json.dumps({"latency": report, "traces": traces},
                         indent=2, sort_keys=True))
        return 0
    if not report:
        print("no query latency recorded yet")
    for modality, row in report.items():
        total = row["total"]
        print(f"{modality}: n={row['count']} "
              f"total {total['mean_s']:.3f}s ± {total['std_s']:.3f}s")
        for stage, stats in row["stages"].items():
            print(f"    {stage}: {stats['mean_s']:.3f}s ± {stats['std_s']:.3f}s")
    for key, trace in traces.items():
        considered = trace.get("considered", [])
        accepted = sum(1 for t in considered if t.get("accepted"))
        print(f"trace {key}: accepted {accepted}/{len(considered)} candidates")
    return 0


def cmd_serve(args) -> int:
    service.serve(args.root, host=args.host, port=args.port,
                  providers=_provider_set(args))
    return 0


def cmd_sessions(args) -> int:
    for sid in list_sessions(args.root):
        print(sid)
    return 0


# ------------------------------------------------------------------ wiring

def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="egorecap",
        description="Summarize long egocentric robot video: storyboards, "
                    "skims, and text, generic or query-driven.",
    )
    ap.add_argument("--root", default=os.getenv("EGORECAP_ROOT", "sessions"),
                    help="directory holding all sessions")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="extract frame streams from a source video")
    p.add_argument("--session", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--native-fps", type=float, default=None)
    p.add_argument("--extractor", default=None,
                   help="command template with {input} {rate} {outdir}")
    _add_config_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("embed", help="compute and archive embeddings")
    p.add_argument("--session", required=True)
    p.add_argument("--roles", nargs="*", default=None,
                   choices=["generic_features", "importance",
                            "query_frame_emb", "query_segment_emb"])
    _add_provider_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("summarize-generic",
                       help="produce the query-free storyboard, skim, and text")
    p.add_argument("--session", required=True)
    p.add_argument("--force", action="store_true")
    _add_provider_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_summarize_generic)

    p = sub.add_parser("query", help="answer one query in one modality")
    p.add_argument("--session", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--modality", default="storyboard",
                   choices=list(pipeline.MODALITIES))
    p.add_argument("--json", action="store_true")
    _add_provider_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("export-skim",
                       help="render a skim artifact to a video file")
    p.add_argument("--session", required=True)
    p.add_argument("--key", default="generic-skim")
    p.add_argument("--query", default=None,
                   help="export the skim cached for this query instead of --key")
    p.add_argument("--output", required=True)
    p.add_argument("--assembler", default=None,
                   help="command template with {input} {output} {filter} {edl}")
    p.set_defaults(func=cmd_export_skim)

    p = sub.add_parser("report", help="print latency stats and selection traces")
    p.add_argument("--session", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sessions", help="list sessions under the root")
    p.set_defaults(func=cmd_sessions)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    _add_provider_flags(p)
    p.set_defaults(func=cmd_serve)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
