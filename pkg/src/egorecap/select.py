"""The three selection rules: diversity-constrained greedy, exact 0/1 knapsack
under a duration budget, and top-k with chronological assembly.

Everything here is deterministic. Score ties always break toward the earlier
item, and the knapsack breaks value ties toward the lexicographically
earliest index set, so identical inputs replay to identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .model import ScoredSegment
from .numerics import unit_rows


@dataclass(frozen=True)
class TraceEntry:
    item: int
    score: float
    accepted: bool
    max_sim_to_selected: float
    note: str = ""


@dataclass
class SelectionTrace:
    """Replayable record of a selection pass, in consideration order."""

    considered: list[TraceEntry] = field(default_factory=list)

    def accepted_ids(self) -> list[int]:
        return [e.item for e in self.considered if e.accepted]

    def to_document(self) -> dict:
        return {
            "considered": [
                {
                    "item": e.item,
                    "score": e.score,
                    "accepted": e.accepted,
                    "max_sim_to_selected": e.max_sim_to_selected,
                    "note": e.note,
                }
                for e in self.considered
            ]
        }


def greedy_diverse(
    scores: np.ndarray,
    embeddings: np.ndarray,
    delta: float,
    max_items: int,
) -> tuple[list[int], SelectionTrace]:
    """Pick high-score items whose similarity to everything already picked
    stays below ``delta``.

    Items are visited in descending score (earlier index wins ties) and
    accepted iff cosine similarity to every previously accepted item is
    strictly below the threshold. Returns indices sorted chronologically.

    Exact duplicates are always redundant: a pair of all-zero embeddings
    counts as similarity 1 even though cosine against a zero vector is 0 by
    convention, so totally degenerate inputs still collapse to one item.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.ndim != 2 or embeddings.shape[0] != scores.shape[0]:
        raise ValidationError("scores and embeddings must align one row per item")
    if max_items < 1:
        raise ValidationError("max_items must be >= 1")
    if not 0.0 <= delta <= 1.0:
        raise ValidationError("delta must be in [0, 1]")

    n = scores.shape[0]
    trace = SelectionTrace()
    if n == 0:
        return [], trace

    units = unit_rows(embeddings)
    zero_row = np.linalg.norm(embeddings, axis=1) == 0.0
    order = np.lexsort((np.arange(n), -scores))

    accepted: list[int] = []
    for idx in map(int, order):
        if len(accepted) >= max_items:
            break
        if accepted:
            sims = units[accepted] @ units[idx]
            if zero_row[idx]:
                sims = np.where(zero_row[accepted], 1.0, sims)
            max_sim = float(sims.max())
        else:
            max_sim = 0.0
        ok = max_sim < delta
        trace.considered.append(
            TraceEntry(
                item=idx,
                score=float(scores[idx]),
                accepted=ok,
                max_sim_to_selected=max_sim,
                note="first pick" if ok and not accepted else "",
            )
        )
        if ok:
            accepted.append(idx)

    return sorted(accepted), trace


def knapsack_select(
    items: list[ScoredSegment],
    budget_s: float,
    resolution_s: float = 1.0,
) -> list[ScoredSegment]:
    """Exact 0/1 knapsack: maximize total score with total duration <= budget.

    Durations are discretized at ``resolution_s`` with ceiling weights, so the
    selected real durations can never exceed the budget. Value ties resolve to
    the lexicographically earliest index set (chronological indices compared
    as tuples), which also means equal-score inputs fill the budget from the
    front of the video. Output is chronological.
    """
    if budget_s <= 0:
        raise ValidationError("budget_s must be > 0")
    if resolution_s <= 0:
        raise ValidationError("resolution_s must be > 0")
    for it in items:
        if it.duration_s <= 0:
            raise ValidationError("segment durations must be > 0")

    n = len(items)
    capacity = int(budget_s / resolution_s + 1e-9)
    if n == 0 or capacity == 0:
        return []

    weights = [max(1, math.ceil(it.duration_s / resolution_s - 1e-9)) for it in items]
    values = np.array([it.score for it in items], dtype=np.float64)

    # best[i][w]: max value using items i.. with capacity w
    best = np.zeros((n + 1, capacity + 1), dtype=np.float64)
    for i in range(n - 1, -1, -1):
        best[i] = best[i + 1]
        w = weights[i]
        if w <= capacity:
            take = values[i] + best[i + 1, : capacity - w + 1]
            keep = best[i, w:]
            best[i, w:] = np.maximum(keep, take)

    # Walk forward preferring inclusion whenever the optimum stays reachable;
    # that realizes the lexicographically earliest optimal index set.
    # The comparison is exact: the walk recomputes the very expression the
    # table fill used, so a tied inclusion reproduces the stored maximum bit
    # for bit.
    chosen: list[int] = []
    w = capacity
    for i in range(n):
        wi = weights[i]
        if wi <= w and values[i] + best[i + 1, w - wi] >= best[i, w]:
            chosen.append(i)
            w -= wi

    return [items[i] for i in chosen]


def topk_chrono(
    items: list[ScoredSegment],
    k: int,
) -> tuple[list[ScoredSegment], bool]:
    """The k highest-scoring segments in chronological order.

    Ties go to the earlier segment. When fewer than k items exist, everything
    is returned and the partial flag is set.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    order = sorted(
        range(len(items)),
        key=lambda i: (-items[i].score, items[i].segment.start.index),
    )
    picked = sorted(order[:k])
    return [items[i] for i in picked], len(items) < k
