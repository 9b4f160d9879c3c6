"""Session assembly: frame extraction, fixed segmentation, and on-disk layout.

A session is a directory holding a manifest, the two frame streams, embedding
archives, cached summary artifacts, and a latency log. Frame extraction is
delegated to an external command template so the engine itself never decodes
video; sessions built from pre-computed arrays (no images at all) are equally
valid, which is how the test fixtures work.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import archive
from .errors import ArchiveError, IngestError, ValidationError
from .model import (
    ImportanceCurve,
    PipelineConfig,
    SegmentRef,
    VideoMeta,
    config_from_mapping,
    validate_config,
)

EXTRACTOR_ENV = "EGORECAP_EXTRACTOR"
DEFAULT_EXTRACTOR = (
    "ffmpeg -hide_banner -loglevel error -i {input} -vf fps={rate} "
    "-start_number 0 {outdir}/frame_%06d.jpg"
)
FRAME_PATTERN = "frame_{:06d}{ext}"
_IMAGE_EXTS = (".jpg", ".jpeg", ".png", ".ppm", ".bmp", ".webp")

MANIFEST_NAME = "manifest.json"


def extractor_template(override: Optional[str] = None) -> str:
    return override or os.environ.get(EXTRACTOR_ENV) or DEFAULT_EXTRACTOR


def extract_frames(
    source: str,
    rate: float,
    out_dir: Path | str,
    template: Optional[str] = None,
) -> dict:
    """Run the external extractor and index the produced frames.

    Returns the index {count, rate, source, ext}; reruns with the same
    source and rate are no-ops once the index exists and still matches the
    files on disk.
    """
    out_dir = Path(out_dir)
    index_path = out_dir / "index.json"
    if index_path.exists():
        index = json.loads(index_path.read_text())
        if index.get("source") == source and index.get("rate") == rate:
            have = _count_canonical(out_dir, index.get("ext", ".jpg"))
            if have == index.get("count"):
                return index

    out_dir.mkdir(parents=True, exist_ok=True)
    cmd = extractor_template(template).format(
        input=shlex.quote(source), rate=rate, outdir=shlex.quote(str(out_dir))
    )
    proc = subprocess.run(cmd, shell=True, capture_output=True, text=True)
    if proc.returncode != 0:
        raise IngestError(
            f"extractor exited {proc.returncode} for {source!r}",
            diagnostics=(proc.stderr or proc.stdout).strip(),
        )

    files = sorted(
        p for p in out_dir.iterdir()
        if p.suffix.lower() in _IMAGE_EXTS
    )
    if not files:
        raise IngestError(f"extractor produced no frames in {out_dir}")
    ext = files[0].suffix.lower()
    for i, path in enumerate(files):
        want = out_dir / FRAME_PATTERN.format(i, ext=ext)
        if path != want:
            path.rename(want)

    index = {"count": len(files), "rate": rate, "source": source, "ext": ext}
    index_path.write_text(json.dumps(index, indent=2, sort_keys=True))
    return index


def _count_canonical(out_dir: Path, ext: str) -> int:
    n = 0
    while (out_dir / FRAME_PATTERN.format(n, ext=ext)).exists():
        n += 1
    return n


def fixed_segmentation(stream_len: int, rate: float, d_s: float) -> list[SegmentRef]:
    """Consecutive disjoint segments of exactly ``d_s`` seconds; a partial tail
    is dropped so every segment has identical support."""
    if stream_len < 0:
        raise ValidationError("stream_len must be >= 0")
    frames = d_s * rate
    per_seg = int(round(frames))
    if per_seg < 1 or abs(frames - per_seg) > 1e-6:
        raise ValidationError(
            f"segment length {d_s}s at {rate} fps is not a whole number of frames"
        )
    count = stream_len // per_seg
    return [
        SegmentRef.from_indices(i * per_seg, (i + 1) * per_seg, rate)
        for i in range(count)
    ]


@dataclass(frozen=True)
class StreamInfo:
    rate: float
    count: int
    directory: Optional[str]  # session-relative; None when no images exist
    ext: str = ".jpg"


@dataclass
class Session:
    """One long video's streams, archives, and cached artifacts on disk."""

    root: Path
    id: str
    meta: VideoMeta
    cfg: PipelineConfig
    streams: dict[str, StreamInfo] = field(default_factory=dict)
    archives: dict[str, str] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    _write_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    # ---------------------------------------------------------------- setup

    @classmethod
    def create(
        cls,
        root: Path | str,
        session_id: str,
        meta: VideoMeta,
        cfg: Optional[PipelineConfig] = None,
    ) -> "Session":
        cfg = validate_config(cfg or PipelineConfig())
        root = Path(root) / session_id
        if (root / MANIFEST_NAME).exists():
            raise IngestError(f"session {session_id!r} already exists under {root.parent}")
        root.mkdir(parents=True, exist_ok=True)
        session = cls(root=root, id=session_id, meta=meta, cfg=cfg)
        session.save()
        return session

    @classmethod
    def load(cls, path: Path | str) -> "Session":
        path = Path(path)
        manifest_path = path / MANIFEST_NAME
        if not manifest_path.exists():
            raise IngestError(f"no session manifest at {manifest_path}")
        doc = json.loads(manifest_path.read_text())
        meta = VideoMeta(**doc["meta"])
        cfg = config_from_mapping(doc["config"])
        streams = {
            name: StreamInfo(**info) for name, info in doc.get("streams", {}).items()
        }
        return cls(
            root=path,
            id=doc["id"],
            meta=meta,
            cfg=cfg,
            streams=streams,
            archives=dict(doc.get("archives", {})),
            warnings=list(doc.get("warnings", [])),
        )

    def save(self) -> None:
        doc = {
            "id": self.id,
            "meta": {
                "source_uri": self.meta.source_uri,
                "native_fps": self.meta.native_fps,
                "frame_count": self.meta.frame_count,
                "duration_s": self.meta.duration_s,
            },
            "config": {
                k: getattr(self.cfg, k)
                for k in self.cfg.__dataclass_fields__
            },
            "streams": {
                name: {
                    "rate": s.rate,
                    "count": s.count,
                    "directory": s.directory,
                    "ext": s.ext,
                }
                for name, s in self.streams.items()
            },
            "archives": dict(sorted(self.archives.items())),
            "warnings": self.warnings,
        }
        (self.root / MANIFEST_NAME).write_text(json.dumps(doc, indent=2, sort_keys=True))

    # --------------------------------------------------------------- streams

    def extract_stream(
        self,
        name: str,
        rate: float,
        template: Optional[str] = None,
    ) -> StreamInfo:
        """Extract frames for one stream from the session's source video."""
        rel = f"frames/{name}"
        index = extract_frames(self.meta.source_uri, rate, self.root / rel, template)
        expected = self.meta.duration_s * rate
        if abs(index["count"] - expected) > 1.0 + 1e-9:
            self.warnings.append(
                f"stream {name!r}: extracted {index['count']} frames, expected "
                f"~{expected:.1f} at {rate} fps"
            )
        info = StreamInfo(rate=rate, count=index["count"], directory=rel,
                          ext=index["ext"])
        self.streams[name] = info
        self.save()
        return info

    def register_stream(
        self,
        name: str,
        rate: float,
        count: int,
        directory: Optional[str] = None,
        ext: str = ".jpg",
    ) -> StreamInfo:
        """Register a stream that already exists (or has no images at all)."""
        expected = self.meta.duration_s * rate
        if abs(count - expected) > 1.0 + 1e-9:
            self.warnings.append(
                f"stream {name!r}: registered {count} frames, expected "
                f"~{expected:.1f} at {rate} fps"
            )
        info = StreamInfo(rate=rate, count=count, directory=directory, ext=ext)
        self.streams[name] = info
        self.save()
        return info

    def stream(self, name: str) -> StreamInfo:
        if name not in self.streams:
            raise IngestError(f"session {self.id!r} has no stream {name!r}")
        return self.streams[name]

    def frame_path(self, stream: str, index: int) -> Optional[Path]:
        info = self.stream(stream)
        if info.directory is None:
            return None
        if not 0 <= index < info.count:
            raise ValidationError(f"frame {index} outside stream of {info.count}")
        return self.root / info.directory / FRAME_PATTERN.format(index, ext=info.ext)

    @staticmethod
    def frame_locator(stream: str, index: int) -> str:
        """Service-relative locator; also what storyboard manifests carry."""
        return f"frames/{stream}/{index}"

    # -------------------------------------------------------------- archives

    def attach_archive(
        self,
        role: str,
        values: np.ndarray,
        scale: float,
        provider: str,
    ) -> Path:
        rel = f"archives/{role}.emb"
        path = archive.write_archive(self.root / rel, role, values, scale, provider)
        self.archives[role] = rel
        self.save()
        return path

    def has_archive(self, role: str) -> bool:
        return role in self.archives

    def load_archive(self, role: str):
        if role not in self.archives:
            raise ArchiveError(f"session {self.id!r} has no {role!r} archive")
        header, payload = archive.read_archive(self.root / self.archives[role])
        self._check_archive_rows(role, header.rows)
        return header, payload

    def _check_archive_rows(self, role: str, rows: int) -> None:
        if role in (archive.ROLE_GENERIC_FEATURES, archive.ROLE_IMPORTANCE):
            expected = self.stream("generic").count
        elif role == archive.ROLE_QUERY_FRAME_EMB:
            expected = self.stream("query").count
        else:
            expected = len(
                fixed_segmentation(
                    self.stream("query").count,
                    self.stream("query").rate,
                    self.cfg.segment_len_d_s,
                )
            )
        if rows != expected:
            raise ArchiveError(
                f"{role} archive holds {rows} rows, stream implies {expected}"
            )

    # -------------------------------------------------------------- artifacts

    @property
    def artifact_dir(self) -> Path:
        return self.root / "artifacts"

    def artifact_path(self, key: str) -> Path:
        return self.artifact_dir / f"{key}.json"

    def has_artifact(self, key: str) -> bool:
        return self.artifact_path(key).exists()

    def store_artifact(self, key: str, document: dict, meta: dict) -> Path:
        """Write the artifact document and its generation metadata.

        The document itself stays free of wall-clock values so repeated runs
        are byte-identical; latency and provenance live in the side file.
        """
        with self._write_lock:
            self.artifact_dir.mkdir(parents=True, exist_ok=True)
            path = self.artifact_path(key)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(document, indent=2, sort_keys=True))
            tmp.replace(path)
            meta_path = self.artifact_dir / f"{key}.meta.json"
            tmp = meta_path.with_suffix(".tmp")
            tmp.write_text(json.dumps(meta, indent=2, sort_keys=True))
            tmp.replace(meta_path)
        return path

    def load_artifact(self, key: str) -> tuple[dict, dict]:
        path = self.artifact_path(key)
        if not path.exists():
            raise IngestError(f"no artifact {key!r} in session {self.id!r}")
        document = json.loads(path.read_text())
        meta_path = self.artifact_dir / f"{key}.meta.json"
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        return document, meta

    def artifact_keys(self) -> list[str]:
        if not self.artifact_dir.exists():
            return []
        return sorted(
            p.stem for p in self.artifact_dir.glob("*.json")
            if not p.name.endswith(".meta.json")
        )

    # ---------------------------------------------------------------- latency

    @property
    def latency_log_path(self) -> Path:
        return self.root / "latency.jsonl"

    def append_latency(self, record: dict) -> None:
        with self._write_lock:
            with open(self.latency_log_path, "a") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    def latency_records(self) -> list[dict]:
        if not self.latency_log_path.exists():
            return []
        return [
            json.loads(line)
            for line in self.latency_log_path.read_text().splitlines()
            if line.strip()
        ]


def ingest_video(
    root: Path | str,
    session_id: str,
    source: str,
    native_fps: Optional[float] = None,
    cfg: Optional[PipelineConfig] = None,
    template: Optional[str] = None,
) -> Session:
    """Full ingest: extract both streams from a source video and build a session."""
    cfg = validate_config(cfg or PipelineConfig())
    fps = native_fps if native_fps is not None else cfg.generic_fps

    # probe pass: extract the generic stream first to learn the frame count
    tmp_root = Path(root) / session_id
    if (tmp_root / MANIFEST_NAME).exists():
        raise IngestError(f"session {session_id!r} already exists under {root}")
    generic_index = extract_frames(source, fps, tmp_root / "frames/generic", template)
    frame_count = generic_index["count"]
    meta = VideoMeta.from_frames(source, fps, frame_count)

    session = Session(root=tmp_root, id=session_id, meta=meta, cfg=cfg)
    session.streams["generic"] = StreamInfo(
        rate=fps, count=frame_count, directory="frames/generic",
        ext=generic_index["ext"],
    )
    session.save()
    session.extract_stream("query", cfg.query_fps, template)
    return session


def list_sessions(root: Path | str) -> list[str]:
    root = Path(root)
    if not root.exists():
        return []
    return sorted(
        p.name for p in root.iterdir() if (p / MANIFEST_NAME).exists()
    )


def session_state_digest(session: Session) -> str:
    """Hash of manifest + archive bytes; equal digests mean equal ingested state."""
    import hashlib

    h = hashlib.sha256()
    h.update((session.root / MANIFEST_NAME).read_bytes())
    for role in sorted(session.archives):
        h.update(role.encode())
        h.update((session.root / session.archives[role]).read_bytes())
    for name in sorted(session.streams):
        info = session.streams[name]
        h.update(f"{name}:{info.rate}:{info.count}".encode())
    return h.hexdigest()
