"""Keyframe-level filter fusion of face and action detections, with optional
identity consistency weighting, and keyframe-to-shot max pooling.

The fused score of a (face, action) detection pair on one keyframe is

    s = step(face_conf >= delta) * action_conf            (filter fusion)
    s = c * step(face_conf >= delta) * action_conf        (with identity check)

where c is the fraction of the face box covered by the action box. A shot's
score is the maximum over its keyframes of the best pair on each keyframe.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .models import (
    ACTION,
    PERSON,
    Box,
    DetectionRecord,
    DetectionTable,
    FeatureTable,
    Ranking,
    ShotIndexTable,
    Topic,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FusionParams:
    delta: float = 0.5
    icv_enabled: bool = False
    shot_aggregation: str = "max"

    def __post_init__(self):
        if not (0.0 <= self.delta <= 1.0):
            raise ValidationError(f"delta must be in [0, 1], got {self.delta}")
        if self.shot_aggregation != "max":
            raise ValidationError(f"unsupported shot_aggregation {self.shot_aggregation!r}")


@dataclass(frozen=True)
class FusedScore:
    topic_id: str
    shot_id: str
    score: float
    best_keyframe: int | None = None


def threshold_filter(x: float, delta: float) -> int:
    """1 iff x >= delta (boundary inclusive), else 0."""
    return 1 if x >= delta else 0


def icv_weight(face_box: Box, action_box: Box) -> float:
    """Fraction of the face box area covered by the action box."""
    face_area = face_box.area()
    if face_area <= 0.0:
        raise ValidationError(f"degenerate face box {face_box}")
    ix = max(0.0, min(face_box.x2, action_box.x2) - max(face_box.x1, action_box.x1))
    iy = max(0.0, min(face_box.y2, action_box.y2) - max(face_box.y1, action_box.y1))
    return (ix * iy) / face_area


def fuse_keyframe(face: DetectionRecord, action: DetectionRecord, params: FusionParams) -> float:
    """Fused score of one face/action detection pair on a shared keyframe."""
    if face.entity_kind != PERSON:
        raise ValidationError(f"face record has kind {face.entity_kind!r}")
    if action.entity_kind != ACTION:
        raise ValidationError(f"action record has kind {action.entity_kind!r}")
    if face.keyframe != action.keyframe:
        raise ValidationError(f"mismatched keyframes {face.keyframe} != {action.keyframe}")
    score = threshold_filter(face.confidence, params.delta) * action.confidence
    if params.icv_enabled and face.box is not None and action.box is not None:
        score *= icv_weight(face.box, action.box)
    return score


def shot_score(keyframe_scores: list[float]) -> float:
    """Max pooling over keyframe scores; empty list scores 0."""
    return max(keyframe_scores) if keyframe_scores else 0.0


def cosine_scores(query_features: list[np.ndarray], gallery: FeatureTable) -> dict[str, float]:
    """Per gallery shot, the best dot product against any query, clamped to [0, 1]."""
    if not query_features:
        raise ValidationError("no query features")
    queries = np.asarray(query_features, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != gallery.dim:
        raise ValidationError(f"query dimension {queries.shape} incompatible with gallery dim {gallery.dim}")
    out: dict[str, float] = {}
    for shot_id in gallery.shot_ids():
        best = float(np.max(queries @ gallery[shot_id]))
        out[shot_id] = min(1.0, max(0.0, best))
    return out


def fuse_topic(
    topic: Topic,
    detections: DetectionTable,
    shots: ShotIndexTable,
    params: FusionParams,
    run_tag: str = "fuse",
) -> Ranking:
    """Rank shots for one topic by fused face/action co-occurrence scores.

    Shots scoring 0 are dropped. Ties are broken by ascending shot_id.
    """
    faces = detections.entity_index(PERSON, topic.person_id)
    actions = detections.entity_index(ACTION, topic.action_id)
    if not faces or not actions:
        log.warning(
            "topic %s: no detections for person=%r or action=%r",
            topic.topic_id, topic.person_id, topic.action_id,
        )
        return Ranking(topic_id=topic.topic_id, entries=[], run_tag=run_tag)

    scored: list[FusedScore] = []
    for shot_id, face_kfs in faces.items():
        if shot_id not in shots.by_shot_id:
            raise ValidationError(f"detection references unknown shot {shot_id}")
        action_kfs = actions.get(shot_id)
        if not action_kfs:
            continue
        best = 0.0
        best_kf: int | None = None
        for kf in sorted(set(face_kfs) & set(action_kfs)):
            pair_best = max(
                fuse_keyframe(face, action, params)
                for face in face_kfs[kf]
                for action in action_kfs[kf]
            )
            if pair_best > best:
                best = pair_best
                best_kf = kf
        if best > 0.0:
            scored.append(FusedScore(topic.topic_id, shot_id, best, best_kf))

    scored.sort(key=lambda s: (-s.score, s.shot_id))
    return Ranking(
        topic_id=topic.topic_id,
        entries=[(s.shot_id, s.score) for s in scored],
        run_tag=run_tag,
    )
