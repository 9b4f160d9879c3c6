"""Command line behaviour: happy paths, JSON failure envelopes, export."""

from __future__ import annotations

import json
from dataclasses import replace

from conftest import (
    MICRO_CFG,
    QUERY_DOCK,
    make_session,
    write_assembler,
    write_extractor,
)
from egorecap.cli import main
from egorecap.ingest import Session


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _stderr_payload(err: str) -> dict:
    return json.loads(err.strip())


def test_ingest_command(tmp_path, capsys):
    template = write_extractor(tmp_path, duration_s=16.0)
    code, out, _err = _run(
        capsys, "--root", str(tmp_path / "root"), "ingest",
        "--session", "trip", "--source", "file:///v.mp4",
        "--extractor", template, "--generic-fps", "1", "--query-fps", "1",
    )
    assert code == 0
    assert "session trip: 16.0s" in out
    assert "stream generic: 16 frames at 1 fps" in out
    assert "stream query: 16 frames at 1 fps" in out

    code, _out, err = _run(
        capsys, "--root", str(tmp_path / "root"), "ingest",
        "--session", "trip", "--source", "file:///v.mp4",
        "--extractor", template,
    )
    assert code == 1
    payload = _stderr_payload(err)
    assert payload["error"] == "IngestError"
    assert "already exists" in payload["message"]


def test_ingest_rejects_bad_config(tmp_path, capsys):
    template = write_extractor(tmp_path, duration_s=4.0)
    code, _out, err = _run(
        capsys, "--root", str(tmp_path / "root"), "ingest",
        "--session", "bad", "--source", "file:///v.mp4",
        "--extractor", template, "--topk-k", "0",
    )
    assert code == 1
    payload = _stderr_payload(err)
    assert payload["error"] == "ConfigError"
    assert any("topk_k" in v for v in payload["violations"])


def test_embed_command_archives_roles(tmp_path, capsys):
    make_session(tmp_path)
    code, out, _err = _run(
        capsys, "--root", str(tmp_path), "embed", "--session", "sess",
        "--roles", "generic_features", "importance", "--hash-providers",
    )
    assert code == 0
    assert "generic_features: 48x512 [hash-frame-features/1]" in out
    assert "importance: 48 scores [hash-importance/1]" in out

    session = Session.load(tmp_path / "sess")
    assert set(session.archives) == {"generic_features", "importance"}


def test_embed_without_providers_fails_with_role(tmp_path, capsys):
    make_session(tmp_path)
    code, _out, err = _run(
        capsys, "--root", str(tmp_path), "embed", "--session", "sess",
        "--roles", "importance",
    )
    assert code == 1
    payload = _stderr_payload(err)
    assert payload["error"] == "PipelineError"
    assert payload["role"] == "importance"


def test_summarize_generic_command(tmp_path, capsys):
    make_session(tmp_path)
    code, out, _err = _run(
        capsys, "--root", str(tmp_path), "summarize-generic",
        "--session", "sess", "--hash-providers",
    )
    assert code == 0
    assert "(budget 12.0s)" in out
    assert "storyboard: " in out and "text: " in out
    assert "cache" not in out

    code, out, _err = _run(
        capsys, "--root", str(tmp_path), "summarize-generic",
        "--session", "sess", "--hash-providers",
    )
    assert code == 0
    assert "(served from cache; use --force to regenerate)" in out


def test_query_command_pretty_json_and_cache(tmp_path, capsys):
    make_session(tmp_path)
    root = str(tmp_path)

    code, out, _err = _run(
        capsys, "--root", root, "query", "--session", "sess",
        "--text", QUERY_DOCK, "--modality", "skim", "--hash-providers",
    )
    assert code == 0
    assert ".. " in out and "total 8.0s" in out
    assert "(cached)" not in out

    code, out, _err = _run(
        capsys, "--root", root, "query", "--session", "sess",
        "--text", QUERY_DOCK, "--modality", "skim", "--hash-providers", "--json",
    )
    assert code == 0
    body = json.loads(out)
    assert body["cached"] is True
    assert body["document"]["kind"] == "skim"
    assert body["key"].startswith("query-skim-")

    code, out, _err = _run(
        capsys, "--root", root, "query", "--session", "sess",
        "--text", QUERY_DOCK, "--modality", "text", "--hash-providers",
    )
    assert code == 0
    assert "from skim:" in out


def test_query_unknown_session(tmp_path, capsys):
    code, _out, err = _run(
        capsys, "--root", str(tmp_path), "query", "--session", "ghost",
        "--text", "hm", "--hash-providers",
    )
    assert code == 1
    payload = _stderr_payload(err)
    assert payload["error"] == "IngestError"
    assert "no session manifest" in payload["message"]


def test_export_skim_writes_edl_and_video(tmp_path, capsys):
    make_session(tmp_path)
    assembler = write_assembler(tmp_path)
    _run(capsys, "--root", str(tmp_path), "summarize-generic",
         "--session", "sess", "--hash-providers")

    output = tmp_path / "cut" / "skim.mp4"
    code, out, _err = _run(
        capsys, "--root", str(tmp_path), "export-skim", "--session", "sess",
        "--output", str(output), "--assembler", assembler,
    )
    assert code == 0
    assert "wrote" in out
    edl = json.loads((tmp_path / "cut" / "skim.edl.json").read_text())
    assert edl["kind"] == "skim"
    # the stub assembler copies the edit list into the output slot
    assert output.read_bytes() == (tmp_path / "cut" / "skim.edl.json").read_bytes()


def test_export_skim_by_query(tmp_path, capsys):
    make_session(tmp_path)
    assembler = write_assembler(tmp_path)
    _run(capsys, "--root", str(tmp_path), "query", "--session", "sess",
         "--text", QUERY_DOCK, "--modality", "skim", "--hash-providers")

    output = tmp_path / "dock.mp4"
    code, out, _err = _run(
        capsys, "--root", str(tmp_path), "export-skim", "--session", "sess",
        "--query", QUERY_DOCK, "--output", str(output), "--assembler", assembler,
    )
    assert code == 0
    assert json.loads(output.read_text())["total_s"] == 8.0


def test_export_refuses_non_skim_artifacts(tmp_path, capsys):
    make_session(tmp_path)
    _run(capsys, "--root", str(tmp_path), "summarize-generic",
         "--session", "sess", "--hash-providers")
    code, _out, err = _run(
        capsys, "--root", str(tmp_path), "export-skim", "--session", "sess",
        "--key", "generic-storyboard", "--output", str(tmp_path / "x.mp4"),
    )
    assert code == 1
    assert "is not a skim" in _stderr_payload(err)["message"]


def test_export_refuses_empty_edit_list(tmp_path, capsys):
    # 4s session with a 5% budget: below the knapsack resolution, so the
    # skim legitimately selects nothing
    cfg = replace(MICRO_CFG, knapsack_budget_K_pct=5.0)
    make_session(tmp_path, duration_s=4.0, cfg=cfg)
    _run(capsys, "--root", str(tmp_path), "summarize-generic",
         "--session", "sess", "--hash-providers")
    code, _out, err = _run(
        capsys, "--root", str(tmp_path), "export-skim", "--session", "sess",
        "--output", str(tmp_path / "x.mp4"),
    )
    assert code == 1
    assert "empty edit list" in _stderr_payload(err)["message"]


def test_export_surfaces_assembler_failure(tmp_path, capsys):
    make_session(tmp_path)
    assembler = write_assembler(tmp_path, exit_code=2)
    _run(capsys, "--root", str(tmp_path), "summarize-generic",
         "--session", "sess", "--hash-providers")
    code, _out, err = _run(
        capsys, "--root", str(tmp_path), "export-skim", "--session", "sess",
        "--output", str(tmp_path / "x.mp4"), "--assembler", assembler,
    )
    assert code == 1
    payload = _stderr_payload(err)
    assert payload["error"] == "IngestError"
    assert payload["message"].startswith("assembler exited 2")
    assert payload["diagnostics"] == "assembler cannot run"


def test_report_command(tmp_path, capsys):
    make_session(tmp_path)
    root = str(tmp_path)
    _run(capsys, "--root", root, "summarize-generic",
         "--session", "sess", "--hash-providers")
    _run(capsys, "--root", root, "query", "--session", "sess",
         "--text", QUERY_DOCK, "--modality", "storyboard", "--hash-providers")

    code, out, _err = _run(capsys, "--root", root, "report", "--session", "sess")
    assert code == 0
    assert "storyboard: n=1" in out
    assert "trace generic-storyboard: accepted" in out

    code, out, _err = _run(capsys, "--root", root, "report",
                           "--session", "sess", "--json")
    assert code == 0
    body = json.loads(out)
    assert body["latency"]["storyboard"]["count"] == 1
    assert "generic-storyboard" in body["traces"]


def test_report_with_nothing_recorded(tmp_path, capsys):
    make_session(tmp_path)
    code, out, _err = _run(capsys, "--root", str(tmp_path),
                           "report", "--session", "sess")
    assert code == 0
    assert "no query latency recorded yet" in out


def test_sessions_command(tmp_path, capsys):
    make_session(tmp_path, session_id="beta")
    make_session(tmp_path, session_id="alpha")
    code, out, _err = _run(capsys, "--root", str(tmp_path), "sessions")
    assert code == 0
    assert out.split() == ["alpha", "beta"]
