"""trec-style average precision, mAP, and rank-distance diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .models import Qrels, Ranking


@dataclass(frozen=True)
class EvalReport:
    per_topic_ap: dict[str, float]
    mean_ap: float
    depth: int


def average_precision(ranking: Ranking, qrels: Qrels, depth: int = 1000) -> float:
    """AP = (1/R_total) * sum over relevant hits at rank r <= depth of hits_so_far/r.

    R_total counts qrels relevance, not retrieved hits; unjudged shots are
    non-relevant.
    """
    total_relevant = qrels.total_relevant(ranking.topic_id)
    if total_relevant == 0:
        raise ValidationError(f"topic {ranking.topic_id} has no relevant shots in qrels")
    relevant = qrels.relevant_shots(ranking.topic_id)
    hits = 0
    score = 0.0
    for rank, (shot_id, _) in enumerate(ranking.entries[:depth], start=1):
        if shot_id in relevant:
            hits += 1
            score += hits / rank
    return score / total_relevant


def mean_ap(per_topic_ap: list[float]) -> float:
    if not per_topic_ap:
        raise ValidationError("mean_ap over an empty list")
    return sum(per_topic_ap) / len(per_topic_ap)


def evaluate_run(rankings: list[Ranking], qrels: Qrels, depth: int = 1000) -> EvalReport:
    per_topic = {r.topic_id: average_precision(r, qrels, depth) for r in rankings}
    return EvalReport(per_topic_ap=per_topic, mean_ap=mean_ap(list(per_topic.values())), depth=depth)


def kendall_tau(order_a: list[str], order_b: list[str]) -> float:
    """Normalized Kendall tau distance: discordant pairs / C(n, 2), in [0, 1]."""
    if set(order_a) != set(order_b):
        raise ValidationError("orders range over different candidate sets")
    if len(order_a) != len(set(order_a)) or len(order_b) != len(set(order_b)):
        raise ValidationError("orders contain duplicates")
    n = len(order_a)
    if n < 2:
        return 0.0
    pos_b = {item: i for i, item in enumerate(order_b)}
    sequence = [pos_b[item] for item in order_a]
    discordant = _count_inversions(sequence)
    return discordant / (n * (n - 1) // 2)


def _count_inversions(seq: list[int]) -> int:
    """Inversion count by merge sort, O(n log n)."""
    if len(seq) < 2:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    count = _count_inversions(left) + _count_inversions(right)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            j += 1
            count += len(left) - i
    merged.extend(left[i:])
    merged.extend(right[j:])
    seq[:] = merged
    return count
