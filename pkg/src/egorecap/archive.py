"""Binary embedding archives: a small self-describing header over a
row-major little-endian float32 matrix.

Layout:
    magic   4 bytes  b"EMBA"
    version u16      format version (currently 1)
    role    u16      archive role code
    rows    u32
    dim     u32
    scale   f32      frames/s for frame archives, segment length (s) otherwise
    prov    u16 + utf8 bytes   provider identity (name/version)
    body    rows * dim * 4 bytes of little-endian float32
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArchiveError
from .model import EmbeddingMatrix, ImportanceCurve

MAGIC = b"EMBA"
VERSION = 1

ROLE_GENERIC_FEATURES = "generic_features"
ROLE_IMPORTANCE = "importance"
ROLE_QUERY_FRAME_EMB = "query_frame_emb"
ROLE_QUERY_SEGMENT_EMB = "query_segment_emb"

ARCHIVE_ROLES = (
    ROLE_GENERIC_FEATURES,
    ROLE_IMPORTANCE,
    ROLE_QUERY_FRAME_EMB,
    ROLE_QUERY_SEGMENT_EMB,
)
_ROLE_CODES = {role: i + 1 for i, role in enumerate(ARCHIVE_ROLES)}
_CODE_ROLES = {v: k for k, v in _ROLE_CODES.items()}

_HEADER = struct.Struct("<4sHHIIf")


@dataclass(frozen=True)
class ArchiveHeader:
    role: str
    rows: int
    dim: int
    scale: float
    provider: str


def write_archive(
    path: Path | str,
    role: str,
    values: np.ndarray,
    scale: float,
    provider: str,
) -> Path:
    """Serialize a matrix (or a curve as an n x 1 matrix) under ``role``."""
    path = Path(path)
    if role not in _ROLE_CODES:
        raise ArchiveError(f"unknown archive role {role!r}")
    values = np.asarray(values, dtype=np.float32)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2:
        raise ArchiveError("archive body must be a 1-D or 2-D array")
    if role == ROLE_IMPORTANCE and values.shape[1] != 1:
        raise ArchiveError("importance archives must have dim 1")
    if values.size and not np.isfinite(values).all():
        raise ArchiveError("archive body contains non-finite values")

    rows, dim = values.shape
    prov = provider.encode("utf-8")
    header = _HEADER.pack(MAGIC, VERSION, _ROLE_CODES[role], rows, dim, scale)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack("<H", len(prov)))
        fh.write(prov)
        fh.write(np.ascontiguousarray(values, dtype="<f4").tobytes())
    return path


def read_header(path: Path | str) -> ArchiveHeader:
    path = Path(path)
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise ArchiveError(f"{path}: truncated header")
        magic, version, role_code, rows, dim, scale = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise ArchiveError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise ArchiveError(f"{path}: unsupported version {version}")
        role = _CODE_ROLES.get(role_code)
        if role is None:
            raise ArchiveError(f"{path}: unknown role code {role_code}")
        praw = fh.read(2)
        if len(praw) < 2:
            raise ArchiveError(f"{path}: truncated provider field")
        (plen,) = struct.unpack("<H", praw)
        prov = fh.read(plen)
        if len(prov) < plen:
            raise ArchiveError(f"{path}: truncated provider field")
    return ArchiveHeader(role=role, rows=rows, dim=dim, scale=scale,
                         provider=prov.decode("utf-8"))


def read_archive(path: Path | str):
    """Read an archive back as (header, EmbeddingMatrix | ImportanceCurve).

    The body length is validated against the header before anything is
    interpreted, and importance archives must carry a single column.
    """
    path = Path(path)
    header = read_header(path)
    offset = _HEADER.size + 2 + len(header.provider.encode("utf-8"))
    expected = header.rows * header.dim * 4
    actual = path.stat().st_size - offset
    if actual != expected:
        raise ArchiveError(
            f"{path}: body holds {actual} bytes, header promises {expected}"
        )
    with open(path, "rb") as fh:
        fh.seek(offset)
        body = np.frombuffer(fh.read(expected), dtype="<f4")
    values = body.reshape(header.rows, header.dim)

    if header.role == ROLE_IMPORTANCE:
        if header.dim != 1:
            raise ArchiveError(f"{path}: importance archive with dim {header.dim}")
        return header, ImportanceCurve(scores=values[:, 0].astype(np.float64))
    return header, EmbeddingMatrix(values=values.copy(), space=header.provider)
