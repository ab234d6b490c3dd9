"""Collapse multiple per-row predictions into one score per video.

Median is the default strategy.  Videos with no rows at all (e.g. a
soundless video under an audio model) fall back to the mean of this model's
directly-aggregated scores and are marked as such.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

STRATEGIES = ("median", "mean", "max", "min")

_AGG = {
    "median": statistics.median,
    "mean": lambda xs: sum(xs) / len(xs),
    "max": max,
    "min": min,
}


@dataclass(frozen=True)
class PredictionTable:
    model_name: str
    scores: dict[str, float]
    coverage: dict[str, str]  # video id -> "direct" | "fallback"
    aggregation: str

    @property
    def video_ids(self):
        return list(self.scores)


def aggregate_rows(per_row_scores, strategy="median", id_universe=None,
                   model_name="model") -> PredictionTable:
    """Aggregate per-row scores per video over `id_universe`.

    Videos missing from `per_row_scores` (or with empty row lists) receive
    the mean of all directly aggregated scores, with coverage "fallback".
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if id_universe is None:
        id_universe = per_row_scores.keys()
    ids = list(id_universe)
    if not ids:
        raise ValueError("empty id universe")

    agg = _AGG[strategy]
    scores: dict[str, float] = {}
    coverage: dict[str, str] = {}
    for vid in ids:
        rows = per_row_scores.get(vid)
        if rows:
            scores[vid] = float(agg(list(rows)))
            coverage[vid] = "direct"

    if not scores:
        raise ValueError("no video has any prediction rows; fallback has no basis")
    fallback = sum(scores.values()) / len(scores)
    for vid in ids:
        if vid not in scores:
            scores[vid] = fallback
            coverage[vid] = "fallback"

    return PredictionTable(model_name=model_name,
                           scores={vid: scores[vid] for vid in ids},
                           coverage={vid: coverage[vid] for vid in ids},
                           aggregation=strategy)


def clamp_unit(x: float) -> float:
    """[0, 1] clamp used only when scores are exported."""
    return min(1.0, max(0.0, x))
