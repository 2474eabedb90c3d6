"""Score temporal extension: diffuse shot scores from higher-confidence
temporal neighbors to lower ones within each video.

For a shot at video ordinal k with original score s(k),

    s_ste(k) = s(k) + theta * sum_{-p < m < p, m != 0} exp(-m^2 / sigma) * max(s(k+m) - s(k), 0)

All neighbor reads use original scores (parallel update). Shots absent from
the ranking participate with score 0, both as neighbors and as targets, so a
scoreless shot adjacent to a confident one can enter the list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConsistencyError, ValidationError
from .models import Ranking, ShotIndexTable


@dataclass(frozen=True)
class SteParams:
    theta: float = 0.5
    sigma: float = 2.0
    p: int = 3
    # None enables diffusion for every topic; otherwise only listed topic_ids.
    enabled_topics: frozenset[str] | None = None

    def __post_init__(self):
        if self.theta < 0:
            raise ValidationError(f"theta must be >= 0, got {self.theta}")
        if self.sigma <= 0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        if self.p < 1:
            raise ValidationError(f"p must be >= 1, got {self.p}")


def distance_weight(m: int, sigma: float) -> float:
    """exp(-m^2 / sigma)."""
    if sigma <= 0:
        raise ValidationError(f"sigma must be > 0, got {sigma}")
    return math.exp(-(m * m) / sigma)


def apply_ste(ranking: Ranking, shots: ShotIndexTable, params: SteParams) -> Ranking:
    """Diffused ranking for one topic; disabled topics pass through unchanged."""
    if params.enabled_topics is not None and ranking.topic_id not in params.enabled_topics:
        return Ranking(ranking.topic_id, list(ranking.entries), ranking.run_tag)

    original = ranking.scores()
    for shot_id in original:
        if shot_id not in shots.by_shot_id:
            raise ConsistencyError(f"ranked shot {shot_id} missing from shot index")

    videos = sorted({shots.by_shot_id[s].video_id for s in original})
    weights = {m: distance_weight(m, params.sigma) for m in range(1, params.p)}

    diffused: dict[str, float] = {}
    for video_id in videos:
        rows = shots.videos[video_id]
        scores = [original.get(r.shot_id, 0.0) for r in rows]
        for k, row in enumerate(rows):
            gain = 0.0
            for m in range(1, params.p):
                for nb in (k - m, k + m):
                    if 0 <= nb < len(rows):
                        gain += weights[m] * max(scores[nb] - scores[k], 0.0)
            diffused[row.shot_id] = scores[k] + params.theta * gain

    # Base order: original entries first, then newcomers by (video, ordinal);
    # a stable sort by score keeps theta=0 output byte-identical to the input.
    entries: list[tuple[str, float]] = [(s, diffused[s]) for s in ranking.shot_ids()]
    newcomers = [
        (row.shot_id, diffused[row.shot_id])
        for video_id in videos
        for row in shots.videos[video_id]
        if row.shot_id not in original and diffused[row.shot_id] > 0.0
    ]
    entries.extend(newcomers)
    entries.sort(key=lambda e: -e[1])
    return Ranking(topic_id=ranking.topic_id, entries=entries, run_tag=ranking.run_tag)
