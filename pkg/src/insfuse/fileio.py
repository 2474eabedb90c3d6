"""Readers and writers for the tab-separated input tables and trec-style run files.

Formats:
    detections.tsv  video_id<TAB>shot_id<TAB>keyframe<TAB>entity_kind<TAB>entity_id<TAB>confidence<TAB>x1<TAB>y1<TAB>x2<TAB>y2
                    (the four box fields are "-" when no box was detected)
    shots.tsv       video_id<TAB>shot_id<TAB>ordinal<TAB>kf_start<TAB>kf_end
    topics.tsv      topic_id<TAB>person_id<TAB>action_id
    features.tsv    shot_id<TAB>f1<TAB>...<TAB>fd
    qrels.txt       topic_id 0 shot_id rel            (space separated)
    run file        topic_id Q0 shot_id rank score run_tag   (space separated, rank from 1,
                    scores non-increasing with 6 decimals)
"""

from __future__ import annotations

import math
import os
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import ParseError, ValidationError
from .models import (
    ENTITY_KINDS,
    Box,
    DetectionRecord,
    DetectionTable,
    FeatureTable,
    Qrels,
    Ranking,
    ShotIndex,
    ShotIndexTable,
    Topic,
)

NO_BOX = "-"


def _iter_lines(source) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, stripped line), skipping blank lines."""
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str) and "\n" not in source and os.path.exists(source):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, (str,)):
        text = source
    elif isinstance(source, os.PathLike):
        text = Path(source).read_text(encoding="utf-8")
    else:  # file object
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    for line_no, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            yield line_no, line.rstrip("\n")


def _split(line: str, line_no: int, n_fields: int, sep: str = "\t") -> list[str]:
    fields = line.split(sep)
    if len(fields) != n_fields:
        raise ParseError(line_no, "line", f"expected {n_fields} fields, got {len(fields)}")
    return fields


def _parse_int(value: str, line_no: int, field: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(line_no, field, f"not an integer: {value!r}") from None


def _parse_float(value: str, line_no: int, field: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ParseError(line_no, field, f"not a number: {value!r}") from None
    if not math.isfinite(out):
        raise ParseError(line_no, field, f"non-finite value: {value!r}")
    return out


def load_detections(source) -> DetectionTable:
    records: list[DetectionRecord] = []
    seen: dict[tuple, int] = {}
    for line_no, line in _iter_lines(source):
        f = _split(line, line_no, 10)
        video_id, shot_id = f[0], f[1]
        keyframe = _parse_int(f[2], line_no, "keyframe")
        if keyframe < 0:
            raise ParseError(line_no, "keyframe", f"negative keyframe {keyframe}")
        entity_kind = f[3]
        if entity_kind not in ENTITY_KINDS:
            raise ParseError(line_no, "entity_kind", f"must be one of {ENTITY_KINDS}, got {entity_kind!r}")
        entity_id = f[4]
        confidence = _parse_float(f[5], line_no, "confidence")
        if not (0.0 <= confidence <= 1.0):
            raise ParseError(line_no, "confidence", f"{confidence} outside [0, 1]")
        box_fields = f[6:10]
        if all(v == NO_BOX for v in box_fields):
            box = None
        elif any(v == NO_BOX for v in box_fields):
            raise ParseError(line_no, "box", "box fields must all be '-' or all numeric")
        else:
            coords = [_parse_float(v, line_no, name) for v, name in zip(box_fields, ("x1", "y1", "x2", "y2"))]
            box = Box(*coords)
            if not (box.x1 < box.x2 and box.y1 < box.y2):
                raise ParseError(line_no, "box", f"non-positive area: {box}")
        rec = DetectionRecord(video_id, shot_id, keyframe, entity_kind, entity_id, confidence, box)
        key = rec.key()
        if key in seen:
            raise ParseError(line_no, "key", f"duplicate of line {seen[key]}: {key}")
        seen[key] = line_no
        records.append(rec)
    return DetectionTable(records)


def write_detections(table: DetectionTable) -> bytes:
    lines = []
    for r in table:
        if r.box is None:
            box_fields = [NO_BOX] * 4
        else:
            box_fields = [f"{c:g}" for c in r.box]
        lines.append(
            "\t".join(
                [r.video_id, r.shot_id, str(r.keyframe), r.entity_kind, r.entity_id, f"{r.confidence:.6f}"]
                + box_fields
            )
        )
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def load_shots(source) -> ShotIndexTable:
    rows: list[ShotIndex] = []
    seen: dict[str, int] = {}
    for line_no, line in _iter_lines(source):
        f = _split(line, line_no, 5)
        row = ShotIndex(
            video_id=f[0],
            shot_id=f[1],
            ordinal=_parse_int(f[2], line_no, "ordinal"),
            keyframe_start=_parse_int(f[3], line_no, "kf_start"),
            keyframe_end=_parse_int(f[4], line_no, "kf_end"),
        )
        if row.shot_id in seen:
            raise ParseError(line_no, "shot_id", f"duplicate of line {seen[row.shot_id]}: {row.shot_id}")
        seen[row.shot_id] = line_no
        rows.append(row)
    return ShotIndexTable(rows)


def write_shots(table: ShotIndexTable) -> bytes:
    lines = [
        "\t".join([r.video_id, r.shot_id, str(r.ordinal), str(r.keyframe_start), str(r.keyframe_end)])
        for r in table.rows
    ]
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def load_topics(source) -> list[Topic]:
    topics: list[Topic] = []
    seen: dict[str, int] = {}
    for line_no, line in _iter_lines(source):
        f = _split(line, line_no, 3)
        topic = Topic(topic_id=f[0], person_id=f[1], action_id=f[2])
        if not topic.person_id:
            raise ParseError(line_no, "person_id", "empty")
        if not topic.action_id:
            raise ParseError(line_no, "action_id", "empty")
        if topic.topic_id in seen:
            raise ParseError(line_no, "topic_id", f"duplicate of line {seen[topic.topic_id]}")
        seen[topic.topic_id] = line_no
        topics.append(topic)
    return topics


def load_features(source) -> FeatureTable:
    vectors: dict[str, np.ndarray] = {}
    dim = 0
    for line_no, line in _iter_lines(source):
        fields = line.split("\t")
        if len(fields) < 2:
            raise ParseError(line_no, "line", "expected shot_id followed by feature values")
        shot_id = fields[0]
        if shot_id in vectors:
            raise ParseError(line_no, "shot_id", f"duplicate feature row for {shot_id}")
        values = [_parse_float(v, line_no, f"f{i + 1}") for i, v in enumerate(fields[1:])]
        if dim == 0:
            dim = len(values)
        elif len(values) != dim:
            raise ParseError(line_no, "features", f"dimension {len(values)} != {dim}")
        vec = np.array(values, dtype=np.float64)
        if float(np.linalg.norm(vec)) == 0.0:
            raise ParseError(line_no, "features", f"zero vector for {shot_id}")
        vectors[shot_id] = vec
    return FeatureTable(vectors)


def write_features(table: FeatureTable) -> bytes:
    lines = []
    for shot_id in table.shot_ids():
        vec = table[shot_id]
        lines.append("\t".join([shot_id] + [f"{v:.6f}" for v in vec]))
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def load_qrels(source) -> Qrels:
    judgments: dict[tuple[str, str], int] = {}
    lines_seen: dict[tuple[str, str], int] = {}
    for line_no, line in _iter_lines(source):
        f = line.split()
        if len(f) != 4:
            raise ParseError(line_no, "line", f"expected 4 fields, got {len(f)}")
        topic_id, _, shot_id = f[0], f[1], f[2]
        rel = _parse_int(f[3], line_no, "rel")
        if rel not in (0, 1):
            raise ParseError(line_no, "rel", f"relevance must be 0 or 1, got {rel}")
        key = (topic_id, shot_id)
        if key in lines_seen:
            raise ParseError(line_no, "key", f"duplicate of line {lines_seen[key]}: {key}")
        lines_seen[key] = line_no
        judgments[key] = rel
    return Qrels(judgments)


def write_qrels(qrels: Qrels) -> bytes:
    lines = [f"{topic_id} 0 {shot_id} {rel}" for (topic_id, shot_id), rel in qrels.items()]
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def write_run(ranking: Ranking, depth: int = 1000) -> bytes:
    """Serialize one ranking, truncated to `depth` entries, ranks from 1."""
    if depth < 1:
        raise ValidationError(f"depth must be positive, got {depth}")
    ranking.validate()
    lines = [
        f"{ranking.topic_id} Q0 {shot_id} {rank} {score:.6f} {ranking.run_tag}"
        for rank, (shot_id, score) in enumerate(ranking.entries[:depth], start=1)
    ]
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def write_runs(rankings: Iterable[Ranking], depth: int = 1000) -> bytes:
    return b"".join(write_run(r, depth) for r in rankings)


def read_run(source) -> list[Ranking]:
    """Parse a run file into one Ranking per topic, preserving topic order of first appearance."""
    rankings: dict[str, Ranking] = {}
    last_rank: dict[str, int] = {}
    last_score: dict[str, float] = {}
    seen_shots: dict[str, set[str]] = {}
    for line_no, line in _iter_lines(source):
        f = line.split()
        if len(f) != 6:
            raise ParseError(line_no, "line", f"expected 6 fields, got {len(f)}")
        topic_id, q0, shot_id, rank_s, score_s, run_tag = f
        if q0 != "Q0":
            raise ParseError(line_no, "Q0", f"expected literal 'Q0', got {q0!r}")
        rank = _parse_int(rank_s, line_no, "rank")
        score = _parse_float(score_s, line_no, "score")
        if topic_id not in rankings:
            rankings[topic_id] = Ranking(topic_id=topic_id, entries=[], run_tag=run_tag)
            last_rank[topic_id] = 0
            last_score[topic_id] = math.inf
            seen_shots[topic_id] = set()
        if rank != last_rank[topic_id] + 1:
            raise ParseError(line_no, "rank", f"non-monotone scores: rank {rank} after {last_rank[topic_id]}")
        if score > last_score[topic_id]:
            raise ParseError(line_no, "score", f"non-monotone scores: {score} after {last_score[topic_id]}")
        if shot_id in seen_shots[topic_id]:
            raise ParseError(line_no, "shot_id", f"duplicate shot {shot_id} for topic {topic_id}")
        seen_shots[topic_id].add(shot_id)
        rankings[topic_id].entries.append((shot_id, score))
        last_rank[topic_id] = rank
        last_score[topic_id] = score
    out = list(rankings.values())
    for r in out:
        r.validate()
    return out


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write-then-rename so concurrent readers never observe partial files."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)
