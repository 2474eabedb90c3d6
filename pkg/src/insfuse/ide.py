"""Inter-frame detection extension: fill per-track detection gaps by linear interpolation.

A gap is a maximal run of keyframes inside one shot where a track (same video,
shot, entity kind and entity id) has detections on both flanks but none in
between. The missing confidence at keyframe k between detections at k-m and
k+n is

    conf(k) = n/(m+n) * conf(k-m) + m/(m+n) * conf(k+n)

and box coordinates, when both endpoints carry boxes, interpolate with the
same weights.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConsistencyError, ValidationError
from .models import Box, DetectionRecord, DetectionTable, ShotIndexTable, TrackKey


@dataclass(frozen=True)
class Gap:
    """An unfilled keyframe interval (left_keyframe, right_keyframe) of one track."""

    track: TrackKey
    left_keyframe: int
    right_keyframe: int

    @property
    def span(self) -> int:
        return self.right_keyframe - self.left_keyframe


@dataclass(frozen=True)
class IdeParams:
    max_gap: int = 10

    def __post_init__(self):
        if self.max_gap < 2:
            raise ValidationError(f"max_gap must be >= 2, got {self.max_gap}")


def _check_consistency(table: DetectionTable, shots: ShotIndexTable) -> None:
    for rec in table:
        row = shots.by_shot_id.get(rec.shot_id)
        if row is None:
            raise ConsistencyError(f"detection references unknown shot {rec.shot_id}")
        if not (row.keyframe_start <= rec.keyframe <= row.keyframe_end):
            raise ConsistencyError(
                f"detection at keyframe {rec.keyframe} outside shot {rec.shot_id} "
                f"range [{row.keyframe_start}, {row.keyframe_end}]"
            )


def find_gaps(table: DetectionTable, shots: ShotIndexTable, params: IdeParams) -> list[Gap]:
    """All maximal per-track gaps with span <= max_gap.

    Tracks are keyed by (video, shot, kind, entity), so gaps never cross a
    shot boundary.
    """
    _check_consistency(table, shots)
    gaps: list[Gap] = []
    for track, recs in table.by_track().items():
        keyframes = [r.keyframe for r in recs]
        for left, right in zip(keyframes, keyframes[1:]):
            span = right - left
            if 2 <= span <= params.max_gap:
                gaps.append(Gap(track=track, left_keyframe=left, right_keyframe=right))
    gaps.sort(key=lambda g: (g.track, g.left_keyframe))
    return gaps


def interpolate_gap(left: DetectionRecord, right: DetectionRecord, k: int) -> DetectionRecord:
    """Synthesize the missing detection at keyframe k strictly between two endpoints."""
    if left.track_key() != right.track_key():
        raise ValidationError(f"endpoints belong to different tracks: {left.track_key()} vs {right.track_key()}")
    if not (left.keyframe < k < right.keyframe):
        raise ValidationError(f"keyframe {k} not inside ({left.keyframe}, {right.keyframe})")
    m = k - left.keyframe
    n = right.keyframe - k
    wl = n / (m + n)
    wr = m / (m + n)
    confidence = wl * left.confidence + wr * right.confidence
    box = None
    if left.box is not None and right.box is not None:
        box = Box(*(wl * a + wr * b for a, b in zip(left.box, right.box)))
    return DetectionRecord(
        video_id=left.video_id,
        shot_id=left.shot_id,
        keyframe=k,
        entity_kind=left.entity_kind,
        entity_id=left.entity_id,
        confidence=confidence,
        box=box,
        interpolated=True,
    )


def apply_ide(table: DetectionTable, shots: ShotIndexTable, params: IdeParams) -> DetectionTable:
    """Return a new table with every eligible gap filled; original records untouched."""
    tracks = table.by_track()
    filled: list[DetectionRecord] = []
    for gap in find_gaps(table, shots, params):
        recs = tracks[gap.track]
        by_kf = {r.keyframe: r for r in recs}
        left = by_kf[gap.left_keyframe]
        right = by_kf[gap.right_keyframe]
        for k in range(gap.left_keyframe + 1, gap.right_keyframe):
            filled.append(interpolate_gap(left, right, k))
    merged = list(table.records) + filled
    merged.sort(key=lambda r: r.key())
    return DetectionTable(merged)
