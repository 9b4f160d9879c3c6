"""Shared fixture builders: sessions on disk, replay providers, tiny frames.

Everything here is deterministic. Sessions are built straight from registered
streams and prebuilt arrays — no video, no extractor — except where a test
explicitly exercises extraction, which uses the stub scripts below.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from egorecap.ingest import Session
from egorecap.model import PipelineConfig, VideoMeta
from egorecap.providers.base import ProviderSet
from egorecap.providers.fixtures import (
    FixtureCaptionProvider,
    FixtureFrameFeatureProvider,
    FixtureImportanceProvider,
    FixtureJointProvider,
)

# A valid 2x2 black PPM. Nothing decodes it; it just needs to be a real file.
TINY_PPM = b"P6\n2 2\n255\n" + bytes(12)

# Small rates keep the micro sessions at 48 frames while still exercising
# PCA, change-point detection, the knapsack, and both storyboard caps.
MICRO_CFG = PipelineConfig(
    generic_fps=1.0,
    query_fps=1.0,
    segment_len_d_s=4.0,
    min_seg_dur_D_s=2.0,
    pca_dims_L=5,
    generic_board_M=4,
    query_board_m=2,
    knapsack_budget_K_pct=25.0,
    topk_k=2,
    caption_frame_cap=10,
)
MICRO_DURATION_S = 48.0

QUERY_DOCK = "where did the robot dock"
QUERY_DOOR = "did anyone hold the door open"

CANNED_CAPTIONS = {
    None: "The robot toured the floor, paused at the charging bay, and returned.",
    QUERY_DOCK: "It docked at the charging bay next to the west stairwell.",
    QUERY_DOOR: "A person in a grey jacket held the door while the robot passed.",
}


def make_session(
    root,
    *,
    session_id: str = "sess",
    duration_s: float = MICRO_DURATION_S,
    cfg: PipelineConfig | None = None,
    with_images: bool = False,
) -> Session:
    """A session with both streams registered; optionally with frame files."""
    cfg = cfg or MICRO_CFG
    meta = VideoMeta(
        "file:///fixture.mp4",
        cfg.generic_fps,
        int(round(duration_s * cfg.generic_fps)),
        duration_s,
    )
    session = Session.create(root, session_id, meta, cfg)
    for name, rate in (("generic", cfg.generic_fps), ("query", cfg.query_fps)):
        count = int(round(duration_s * rate))
        directory, ext = None, ".jpg"
        if with_images:
            directory, ext = f"frames/{name}", ".ppm"
            frame_dir = session.root / directory
            frame_dir.mkdir(parents=True, exist_ok=True)
            for i in range(count):
                (frame_dir / f"frame_{i:06d}.ppm").write_bytes(TINY_PPM)
        session.register_stream(name, rate, count, directory=directory, ext=ext)
    return session


def block_rows(
    n: int, dim: int, boundaries: tuple[int, ...], seed: int, noise: float = 0.02
) -> np.ndarray:
    """Piecewise-constant rows: one random unit direction per block, plus noise."""
    rng = np.random.default_rng(seed)
    edges = [0, *boundaries, n]
    rows = np.empty((n, dim))
    for a, b in zip(edges, edges[1:]):
        direction = rng.standard_normal(dim)
        rows[a:b] = direction / np.linalg.norm(direction)
    rows += noise * rng.standard_normal((n, dim))
    return rows.astype(np.float32)


def micro_generic_features() -> np.ndarray:
    return block_rows(48, 8, (16, 32), seed=11)


def micro_curve() -> np.ndarray:
    """Slowly rising baseline with a strong bump over frames 20..27."""
    curve = np.linspace(0.1, 0.3, 48)
    curve[20:28] += 1.0
    return curve


def micro_joint_arrays() -> tuple[np.ndarray, np.ndarray, dict[str, np.ndarray]]:
    """Joint-space fixtures: 12 segment rows, 48 frame rows, 2 known queries.

    Frame rows follow their segment's direction, so frame relevance and
    segment relevance agree about where each query's content lives.
    """
    rng = np.random.default_rng(13)
    seg_dirs = rng.standard_normal((12, 12))
    seg_dirs /= np.linalg.norm(seg_dirs, axis=1, keepdims=True)
    frames = seg_dirs[np.arange(48) // 4] + 0.05 * rng.standard_normal((48, 12))

    def pointed_at(*segments: int) -> np.ndarray:
        v = seg_dirs[list(segments)].sum(axis=0)
        return (v / np.linalg.norm(v)).astype(np.float32)

    queries = {
        QUERY_DOCK: pointed_at(5, 6),
        QUERY_DOOR: pointed_at(2, 9),
    }
    return frames.astype(np.float32), seg_dirs.astype(np.float32), queries


def micro_provider_set(
    *,
    captioner: FixtureCaptionProvider | None = None,
    joint_version: str = "fixture-joint/1",
    joint_delay_s: float = 0.0,
    caption_delay_s: float = 0.0,
) -> ProviderSet:
    frames, segments, queries = micro_joint_arrays()
    if captioner is None:
        captioner = FixtureCaptionProvider(
            canned=dict(CANNED_CAPTIONS), delay_s=caption_delay_s
        )
    return ProviderSet(
        frame_features=FixtureFrameFeatureProvider(micro_generic_features()),
        importance=FixtureImportanceProvider(micro_curve()),
        joint_embedding=FixtureJointProvider(
            frames,
            segments,
            query_vectors=queries,
            segment_len_s=MICRO_CFG.segment_len_d_s,
            version=joint_version,
            delay_s=joint_delay_s,
        ),
        captioner=captioner,
    )


def conformance_provider_set() -> ProviderSet:
    """Replay providers seeded to satisfy the conformance suite's sample inputs
    (three frames at 1 fps, one 8 s segment on the fixture grid)."""
    rng = np.random.default_rng(3)
    return ProviderSet(
        frame_features=FixtureFrameFeatureProvider(
            rng.standard_normal((4, 8)).astype(np.float32)
        ),
        importance=FixtureImportanceProvider(np.linspace(0.2, 0.8, 3)),
        joint_embedding=FixtureJointProvider(
            rng.standard_normal((4, 12)).astype(np.float32),
            rng.standard_normal((1, 12)).astype(np.float32),
            segment_len_s=8.0,
        ),
        captioner=FixtureCaptionProvider(),
    )


# ------------------------------------------------------------- stub commands

def write_extractor(directory: Path, duration_s: float = 4.0) -> str:
    """A frame 'extractor' that writes round(duration * rate) tiny PPMs with
    deliberately non-canonical names. Returns a command template."""
    script = directory / "stub_extractor.py"
    script.write_text(
        "import sys\n"
        "from pathlib import Path\n"
        "out = Path(sys.argv[1]); rate = float(sys.argv[2])\n"
        "out.mkdir(parents=True, exist_ok=True)\n"
        f"n = int(round({duration_s!r} * rate))\n"
        f"ppm = {TINY_PPM!r}\n"
        "for i in range(n):\n"
        "    (out / f'img_{i:04d}.ppm').write_bytes(ppm)\n"
    )
    return f'"{sys.executable}" "{script}" {{outdir}} {{rate}}'


def write_assembler(directory: Path, exit_code: int = 0) -> str:
    """A skim 'assembler' that copies the edit list to the output path (or
    fails with the given exit code). Returns a command template."""
    script = directory / "stub_assembler.py"
    script.write_text(
        "import shutil, sys\n"
        f"if {exit_code}:\n"
        f"    print('assembler cannot run', file=sys.stderr)\n"
        f"    sys.exit({exit_code})\n"
        "shutil.copy(sys.argv[1], sys.argv[2])\n"
    )
    return f'"{sys.executable}" "{script}" {{edl}} {{output}}'
