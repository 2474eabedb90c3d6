"""Core domain types: detections, shot indexes, topics, rankings, features, qrels.

All tables are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import ValidationError

PERSON = "person"
ACTION = "action"
ENTITY_KINDS = (PERSON, ACTION)

# (video_id, shot_id, entity_kind, entity_id)
TrackKey = tuple[str, str, str, str]


class Box(NamedTuple):
    """Axis-aligned rectangle in pixels, corners (x1, y1) top-left exclusive of (x2, y2)."""

    x1: float
    y1: float
    x2: float
    y2: float

    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def validate(self) -> None:
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValidationError(f"box {self} has non-positive area")


@dataclass(frozen=True)
class DetectionRecord:
    """One entity observation (person or action) on one keyframe."""

    video_id: str
    shot_id: str
    keyframe: int
    entity_kind: str
    entity_id: str
    confidence: float
    box: Box | None = None
    # Provenance bit: True for records synthesized by gap interpolation.
    # Never serialized; diagnostics only.
    interpolated: bool = False

    def key(self) -> tuple[str, str, int, str, str]:
        return (self.video_id, self.shot_id, self.keyframe, self.entity_kind, self.entity_id)

    def track_key(self) -> TrackKey:
        return (self.video_id, self.shot_id, self.entity_kind, self.entity_id)

    def validate(self) -> None:
        if self.keyframe < 0:
            raise ValidationError(f"negative keyframe {self.keyframe}")
        if self.entity_kind not in ENTITY_KINDS:
            raise ValidationError(f"unknown entity_kind {self.entity_kind!r}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")
        if self.box is not None:
            self.box.validate()


class DetectionTable:
    """Immutable set of detection records with lookup indexes."""

    def __init__(self, records: Iterable[DetectionRecord]):
        self.records: tuple[DetectionRecord, ...] = tuple(records)
        seen: set[tuple] = set()
        for rec in self.records:
            rec.validate()
            k = rec.key()
            if k in seen:
                raise ValidationError(f"duplicate detection key {k}")
            seen.add(k)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[DetectionRecord]:
        return iter(self.records)

    def by_track(self) -> dict[TrackKey, list[DetectionRecord]]:
        """Records grouped by track key, sorted by keyframe."""
        tracks: dict[TrackKey, list[DetectionRecord]] = {}
        for rec in self.records:
            tracks.setdefault(rec.track_key(), []).append(rec)
        for recs in tracks.values():
            recs.sort(key=lambda r: r.keyframe)
        return tracks

    def entity_index(self, entity_kind: str, entity_id: str) -> dict[str, dict[int, list[DetectionRecord]]]:
        """shot_id -> keyframe -> records of the given entity."""
        index: dict[str, dict[int, list[DetectionRecord]]] = {}
        for rec in self.records:
            if rec.entity_kind == entity_kind and rec.entity_id == entity_id:
                index.setdefault(rec.shot_id, {}).setdefault(rec.keyframe, []).append(rec)
        return index

    def has_entity(self, entity_kind: str, entity_id: str) -> bool:
        return any(r.entity_kind == entity_kind and r.entity_id == entity_id for r in self.records)


@dataclass(frozen=True)
class ShotIndex:
    """Position of one shot within its video plus its keyframe range."""

    video_id: str
    shot_id: str
    ordinal: int
    keyframe_start: int
    keyframe_end: int

    def validate(self) -> None:
        if self.ordinal < 0:
            raise ValidationError(f"negative ordinal for shot {self.shot_id}")
        if self.keyframe_start > self.keyframe_end:
            raise ValidationError(
                f"shot {self.shot_id}: keyframe_start {self.keyframe_start} > keyframe_end {self.keyframe_end}"
            )


class ShotIndexTable:
    """Immutable shot ordering per video; shot_ids are globally unique."""

    def __init__(self, rows: Iterable[ShotIndex]):
        self.rows: tuple[ShotIndex, ...] = tuple(rows)
        self.by_shot_id: dict[str, ShotIndex] = {}
        videos: dict[str, list[ShotIndex]] = {}
        for row in self.rows:
            row.validate()
            if row.shot_id in self.by_shot_id:
                raise ValidationError(f"duplicate shot_id {row.shot_id}")
            self.by_shot_id[row.shot_id] = row
            videos.setdefault(row.video_id, []).append(row)
        self.videos: dict[str, list[ShotIndex]] = {}
        for video_id, rows_ in videos.items():
            rows_.sort(key=lambda r: r.ordinal)
            ordinals = [r.ordinal for r in rows_]
            if ordinals != list(range(len(rows_))):
                raise ValidationError(f"video {video_id}: ordinal gap in {ordinals}")
            self.videos[video_id] = rows_

    def __len__(self) -> int:
        return len(self.rows)

    def shot_at(self, video_id: str, ordinal: int) -> ShotIndex | None:
        rows = self.videos.get(video_id)
        if rows is None or not (0 <= ordinal < len(rows)):
            return None
        return rows[ordinal]


@dataclass(frozen=True)
class Topic:
    """A <person, action> query."""

    topic_id: str
    person_id: str
    action_id: str

    def validate(self) -> None:
        if not self.person_id or not self.action_id:
            raise ValidationError(f"topic {self.topic_id}: empty person_id or action_id")


@dataclass
class Ranking:
    """Per-topic ordered (shot, score) list."""

    topic_id: str
    entries: list[tuple[str, float]] = field(default_factory=list)
    run_tag: str = "insfuse"

    def validate(self) -> None:
        seen: set[str] = set()
        prev = math.inf
        for shot_id, score in self.entries:
            if not math.isfinite(score):
                raise ValidationError(f"topic {self.topic_id}: non-finite score for {shot_id}")
            if score > prev:
                raise ValidationError(f"topic {self.topic_id}: non-monotone scores at {shot_id}")
            if shot_id in seen:
                raise ValidationError(f"topic {self.topic_id}: duplicate shot {shot_id}")
            seen.add(shot_id)
            prev = score

    def shot_ids(self) -> list[str]:
        return [shot_id for shot_id, _ in self.entries]

    def scores(self) -> dict[str, float]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


class FeatureTable:
    """shot_id -> unit-norm feature vector of fixed dimension."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        self.dim = 0
        self._vectors: dict[str, np.ndarray] = {}
        for shot_id, vec in vectors.items():
            vec = np.asarray(vec, dtype=np.float64).ravel()
            if self.dim == 0:
                self.dim = vec.size
                if self.dim < 1:
                    raise ValidationError("feature dimension must be >= 1")
            elif vec.size != self.dim:
                raise ValidationError(
                    f"feature for {shot_id} has dimension {vec.size}, expected {self.dim}"
                )
            norm = float(np.linalg.norm(vec))
            if norm == 0.0 or not math.isfinite(norm):
                raise ValidationError(f"feature for {shot_id} has invalid norm {norm}")
            self._vectors[shot_id] = vec / norm

    def __contains__(self, shot_id: str) -> bool:
        return shot_id in self._vectors

    def __getitem__(self, shot_id: str) -> np.ndarray:
        return self._vectors[shot_id]

    def __len__(self) -> int:
        return len(self._vectors)

    def shot_ids(self) -> list[str]:
        return list(self._vectors)

    def get(self, shot_id: str) -> np.ndarray | None:
        return self._vectors.get(shot_id)


class Qrels:
    """Binary ground-truth relevance per (topic, shot)."""

    def __init__(self, judgments: dict[tuple[str, str], int]):
        self._judgments: dict[tuple[str, str], int] = {}
        self._relevant: dict[str, set[str]] = {}
        for (topic_id, shot_id), rel in judgments.items():
            if rel not in (0, 1):
                raise ValidationError(f"relevance for ({topic_id}, {shot_id}) must be 0 or 1, got {rel}")
            self._judgments[(topic_id, shot_id)] = rel
            if rel == 1:
                self._relevant.setdefault(topic_id, set()).add(shot_id)

    def relevance(self, topic_id: str, shot_id: str) -> int:
        """Closed world: unjudged shots are non-relevant."""
        return self._judgments.get((topic_id, shot_id), 0)

    def relevant_shots(self, topic_id: str) -> set[str]:
        return set(self._relevant.get(topic_id, set()))

    def total_relevant(self, topic_id: str) -> int:
        return len(self._relevant.get(topic_id, ()))

    def topic_ids(self) -> list[str]:
        seen = dict.fromkeys(topic for topic, _ in self._judgments)
        return list(seen)

    def __len__(self) -> int:
        return len(self._judgments)

    def items(self) -> Iterator[tuple[tuple[str, str], int]]:
        return iter(self._judgments.items())
