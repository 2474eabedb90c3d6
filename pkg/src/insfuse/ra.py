"""Robust consensus ranking via half-quadratic iterative reweighting.

Each input list becomes a row of normalized ranks in [0, 1]. The consensus
R* and per-list weights alpha alternate:

    alpha_m = exp(-||R^m - R*||^2 / s)        (Welsch minimizer, s = squared scale)
    alpha   = alpha / sum(alpha)
    R*      = sum_m alpha_m * R^m

until the max-abs change of R* drops below epsilon. Outlier lists sit far
from the consensus and receive exponentially small weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .models import Ranking

SIGMA_AUTO = "auto"
_SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class HqParams:
    # Welsch squared scale; "auto" resolves to the median squared distance
    # of the rows to the mean-rank initialization.
    sigma_hq: float | str = SIGMA_AUTO
    epsilon: float = 1e-9
    max_iters: int = 100

    def __post_init__(self):
        if isinstance(self.sigma_hq, str):
            if self.sigma_hq != SIGMA_AUTO:
                raise ValidationError(f"sigma_hq must be a positive real or 'auto', got {self.sigma_hq!r}")
        elif self.sigma_hq <= 0:
            raise ValidationError(f"sigma_hq must be > 0, got {self.sigma_hq}")
        if self.epsilon <= 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass
class RankMatrix:
    candidate_ids: list[str]
    ranks: np.ndarray  # M x N, rows are normalized rank vectors in [0, 1]

    def validate(self) -> None:
        if self.ranks.ndim != 2 or self.ranks.shape[1] != len(self.candidate_ids):
            raise ValidationError(f"rank matrix shape {self.ranks.shape} != (M, {len(self.candidate_ids)})")
        if self.ranks.shape[0] < 1 or self.ranks.shape[1] < 1:
            raise ValidationError("rank matrix must have at least one row and one column")
        if np.any(self.ranks < 0) or np.any(self.ranks > 1):
            raise ValidationError("normalized ranks must lie in [0, 1]")


def normalize_ranks(lists: list[Ranking]) -> RankMatrix:
    """Union candidates over the lists; position q of n maps to rank q/(n-1).

    Candidates absent from a list carry the worst rank 1.0; a single-candidate
    list assigns rank 0 to its candidate.
    """
    if not lists:
        raise ValidationError("no input lists")
    union: dict[str, None] = {}
    for ranking in lists:
        for shot_id, _ in ranking.entries:
            union[shot_id] = None
    if not union:
        raise ValidationError("empty candidate union")
    candidate_ids = sorted(union)
    col = {shot_id: i for i, shot_id in enumerate(candidate_ids)}
    ranks = np.ones((len(lists), len(candidate_ids)), dtype=np.float64)
    for m, ranking in enumerate(lists):
        n = len(ranking.entries)
        for q, (shot_id, _) in enumerate(ranking.entries):
            ranks[m, col[shot_id]] = q / (n - 1) if n > 1 else 0.0
    return RankMatrix(candidate_ids=candidate_ids, ranks=ranks)


def hq_aggregate(
    matrix: RankMatrix,
    params: HqParams = HqParams(),
    topic_id: str = "",
    run_tag: str = "hq-agg",
) -> tuple[Ranking, list[float], int]:
    """Aggregate the rank matrix; returns (consensus, normalized alphas, iterations)."""
    matrix.validate()
    rows = matrix.ranks
    r_star = rows.mean(axis=0)

    if params.sigma_hq == SIGMA_AUTO:
        d2 = np.sum((rows - r_star) ** 2, axis=1)
        scale = max(float(np.median(d2)), _SIGMA_FLOOR)
    else:
        scale = float(params.sigma_hq)

    alpha = np.full(rows.shape[0], 1.0 / rows.shape[0])
    iterations = 0
    for _ in range(params.max_iters):
        iterations += 1
        d2 = np.sum((rows - r_star) ** 2, axis=1)
        raw = np.exp(-d2 / scale)
        total = float(raw.sum())
        if not np.isfinite(total) or total <= 0.0:
            raise NumericError(f"degenerate alpha weights (sum={total}) at iteration {iterations}")
        alpha = raw / total
        r_new = alpha @ rows
        if not np.all(np.isfinite(r_new)):
            raise NumericError(f"non-finite consensus at iteration {iterations}")
        delta = float(np.max(np.abs(r_new - r_star)))
        r_star = r_new
        if delta < params.epsilon:
            break

    order = sorted(range(len(matrix.candidate_ids)), key=lambda i: (r_star[i], matrix.candidate_ids[i]))
    entries = [(matrix.candidate_ids[i], 1.0 - float(r_star[i])) for i in order]
    consensus = Ranking(topic_id=topic_id, entries=entries, run_tag=run_tag)
    return consensus, [float(a) for a in alpha], iterations


def aggregate_rankings(
    lists: list[Ranking],
    params: HqParams = HqParams(),
    run_tag: str = "hq-agg",
) -> tuple[Ranking, list[float], int]:
    """Convenience wrapper: normalize then aggregate lists of one topic."""
    if not lists:
        raise ValidationError("no input lists")
    topic_ids = {r.topic_id for r in lists}
    if len(topic_ids) != 1:
        raise ValidationError(f"input lists span multiple topics: {sorted(topic_ids)}")
    matrix = normalize_ranks(lists)
    return hq_aggregate(matrix, params, topic_id=lists[0].topic_id, run_tag=run_tag)
