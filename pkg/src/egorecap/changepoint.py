"""Kernel-based temporal segmentation over a cosine kernel.

Splits a feature stream into variable-length segments by minimizing

    sum over segments of within-segment kernel scatter
    + penalty_c * g(m, n),      g(m, n) = m * (log(n / m) + 1)

over the number of change points m and their positions, subject to every
segment lasting at least ``min_seg_dur_s``. The kernel is cosine similarity
between feature rows; per-segment scatter uses the kernel-variance identity

    scatter = sum_i K(i, i) - (1 / len) * sum_{i, j} K(i, j)

so a two-level cumulative-sum table gives every (start, end) scatter in O(1).
The dynamic program is exact: O(n^2) for the table, O(n^2) per candidate
change-point count, and the count is chosen by the penalty, not supplied.

Memory is quadratic in the stream length. Frame-rate callers should
aggregate features into minimum-duration blocks first (the pipeline does);
this module refuses streams long enough to exhaust memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import ImportanceCurve, ScoredSegment, SegmentRef
from .numerics import unit_rows

# n beyond this makes the O(n^2) tables exceed ~1 GB; aggregate first.
MAX_STREAM_LEN = 8192


@dataclass(frozen=True)
class KtsResult:
    """Change points (interior frame indices), derived segments, final cost."""

    boundaries: tuple[int, ...]
    segments: tuple[SegmentRef, ...]
    objective: float


def model_size_penalty(n_changepoints: int, n: int) -> float:
    """Penalty g(m, n) = m (log(n/m) + 1) discouraging over-segmentation; g(0) = 0."""
    if n_changepoints == 0:
        return 0.0
    return n_changepoints * (math.log(n / n_changepoints) + 1.0)


def cosine_kernel_scatters(features: np.ndarray) -> np.ndarray:
    """Scatter table: scatters[i, j] covers frames i..j inclusive.

    Rows are normalized so the kernel entry is cosine similarity; all-zero
    rows contribute zero similarity everywhere, matching the convention in
    :mod:`egorecap.numerics`.
    """
    Xn = unit_rows(features)
    K = Xn @ Xn.T
    n = K.shape[0]

    diag_csum = np.concatenate(([0.0], np.cumsum(np.diag(K))))
    block = np.zeros((n + 1, n + 1))
    block[1:, 1:] = np.cumsum(np.cumsum(K, axis=0), axis=1)
    del K

    i = np.arange(n).reshape(-1, 1)
    j = np.arange(n).reshape(1, -1)
    length = (j - i + 1).astype(np.float64)
    length[length <= 0] = 1.0  # upper triangle only; keep the division safe

    corner = np.diag(block)
    seg_mass = corner[1:].reshape(1, -1) + corner[:-1].reshape(-1, 1) \
        - block[1:, :-1].T - block[:-1, 1:]
    scatters = (diag_csum[1:].reshape(1, -1) - diag_csum[:-1].reshape(-1, 1)) \
        - seg_mass / length
    scatters[j < i] = 0.0
    return scatters


def kts_segment(
    features: np.ndarray,
    rate: float,
    min_seg_dur_s: float,
    penalty_c: float,
    max_changepoints: int | None = None,
) -> KtsResult:
    """Exact penalized change-point detection on a feature stream.

    ``features`` is one row per frame at ``rate`` fps. Streams too short to
    split yield a single segment spanning everything. The search over the
    change-point count stops as soon as the penalty alone exceeds the best
    objective found, which is exact because the penalty grows with the count.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValidationError("kts_segment expects a 2-D feature matrix")
    if not np.isfinite(features).all():
        raise ValidationError("kts_segment features contain non-finite values")
    if rate <= 0 or min_seg_dur_s <= 0 or penalty_c <= 0:
        raise ValidationError("rate, min_seg_dur_s, penalty_c must all be > 0")

    n = features.shape[0]
    if n == 0:
        raise ValidationError("kts_segment needs at least one frame")
    if n > MAX_STREAM_LEN:
        raise ValidationError(
            f"stream of {n} frames exceeds the {MAX_STREAM_LEN} quadratic-memory "
            "limit; aggregate features into min-duration blocks first"
        )

    lmin = max(1, math.ceil(min_seg_dur_s * rate - 1e-9))
    whole = SegmentRef.from_indices(0, n, rate)
    if n < 2 * lmin:
        # nothing to split; n < lmin degenerates to the same single segment
        Xn = unit_rows(features)
        scatter = float(np.sum(Xn * Xn) - np.sum(Xn.sum(axis=0) ** 2) / n)
        return KtsResult(boundaries=(), segments=(whole,), objective=scatter)

    J = cosine_kernel_scatters(features)

    hard_cap = n // lmin - 1
    if max_changepoints is not None:
        hard_cap = min(hard_cap, max_changepoints)

    INF = np.inf
    cost = np.full(n + 1, INF)
    cost[lmin:] = J[0, lmin - 1:]  # zero change points: one segment [0, l)

    best_m = 0
    best_obj = cost[n] + penalty_c * model_size_penalty(0, n)
    best_parents: list[np.ndarray] = []

    parents: list[np.ndarray] = []
    for m in range(1, hard_cap + 1):
        if penalty_c * model_size_penalty(m, n) >= best_obj:
            break  # penalty alone already loses; it only grows from here
        nxt = np.full(n + 1, INF)
        par = np.zeros(n + 1, dtype=np.int64)
        for l in range((m + 1) * lmin, n + 1):
            t0, t1 = m * lmin, l - lmin + 1
            window = cost[t0:t1] + J[t0:t1, l - 1]
            k = int(np.argmin(window))
            nxt[l] = window[k]
            par[l] = t0 + k
        parents.append(par)
        cost = nxt
        obj = cost[n] + penalty_c * model_size_penalty(m, n)
        if obj < best_obj:
            best_obj = obj
            best_m = m
            best_parents = list(parents)

    bounds: list[int] = []
    cursor = n
    for m in range(best_m, 0, -1):
        cursor = int(best_parents[m - 1][cursor])
        bounds.append(cursor)
    bounds.reverse()

    edges = [0] + bounds + [n]
    segments = tuple(
        SegmentRef.from_indices(a, b, rate) for a, b in zip(edges, edges[1:])
    )
    return KtsResult(boundaries=tuple(bounds), segments=segments,
                     objective=float(best_obj))


def segment_scores(
    segments: tuple[SegmentRef, ...] | list[SegmentRef],
    curve: ImportanceCurve,
) -> list[ScoredSegment]:
    """Score each segment as the sum of frame-level importance inside it."""
    prefix = np.concatenate(([0.0], np.cumsum(curve.scores, dtype=np.float64)))
    out = []
    for seg in segments:
        if seg.end.index > len(curve):
            raise ValidationError(
                f"segment [{seg.start.index}, {seg.end.index}) outside curve of "
                f"length {len(curve)}"
            )
        total = float(prefix[seg.end.index] - prefix[seg.start.index])
        out.append(ScoredSegment(segment=seg, score=total))
    return out
