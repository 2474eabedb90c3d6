"""Seeded synthetic corpus generator for desk-scale experiments.

The generator plants the signal each pipeline stage is meant to exploit:

  * relevant (topic, shot) pairs come in temporally contiguous runs (mean
    length ``action_run_length``) so score diffusion has neighbors to work
    with, and a fraction of relevant shots are "weak" (low detector output)
    so diffusion has something to rescue;
  * relevant tracks cover every keyframe of their shot, and ``dropout_rate``
    then knocks out interior keyframes per entity kind, so gap interpolation
    can restore face/action co-occurrence;
  * false-positive detections of topic entities land on single keyframes of
    non-relevant shots at mid confidence;
  * features form one cluster per topic plus a background cluster, so
    feedback sessions can propagate labels through feature affinity.

Identical spec (including seed) produces byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .fileio import atomic_write
from .models import ACTION, PERSON

HIGH_FACE = (0.75, 0.95)
HIGH_ACTION = (0.65, 0.95)
WEAK_FACE = (0.35, 0.60)
WEAK_ACTION = (0.10, 0.35)
FP_FACE = (0.55, 0.80)
FP_ACTION = (0.25, 0.55)
CLUTTER_CONF = (0.05, 0.50)
FEATURE_JITTER = 0.35


@dataclass(frozen=True)
class SyntheticSpec:
    seed: int = 42
    videos: int = 4
    shots_per_video: int = 12
    keyframes_per_shot: int = 5
    persons: int = 4
    actions: int = 4
    topics: int = 2
    relevance_rate: float = 0.15
    detector_noise: float = 0.2
    dropout_rate: float = 0.3
    feature_dim: int = 16
    action_run_length: float = 2.0

    def __post_init__(self):
        for name in ("videos", "shots_per_video", "keyframes_per_shot", "persons", "actions", "topics", "feature_dim"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        for name in ("relevance_rate", "detector_noise", "dropout_rate"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise ValidationError(f"{name} must be in [0, 1]")
        if self.action_run_length < 1.0:
            raise ValidationError("action_run_length must be >= 1")
        if self.topics > self.persons * self.actions:
            raise ValidationError("more topics than distinct (person, action) pairs")


def _shot_id(video_id: str, ordinal: int) -> str:
    return f"{video_id}_s{ordinal:03d}"


def _draw_runs(rng: np.random.Generator, n_shots: int, rate: float, mean_len: float) -> set[int]:
    """Contiguous relevant ordinal runs covering ~rate of the shots."""
    relevant: set[int] = set()
    start_prob = rate / mean_len
    o = 0
    while o < n_shots:
        if rng.random() < start_prob:
            run = int(rng.geometric(1.0 / mean_len)) if mean_len > 1.0 else 1
            for i in range(o, min(o + run, n_shots)):
                relevant.add(i)
            o += run
        else:
            o += 1
    return relevant


def synth_generate(spec: SyntheticSpec, out_dir: str | Path) -> dict[str, Path]:
    """Write detections/shots/topics/features/qrels under out_dir; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)

    video_ids = [f"v{i:02d}" for i in range(spec.videos)]
    person_ids = [f"p{i:02d}" for i in range(spec.persons)]
    action_ids = [f"a{i:02d}" for i in range(spec.actions)]
    pairs = [(p, a) for p in person_ids for a in action_ids]
    topics = [(str(9001 + i), *pairs[i]) for i in range(spec.topics)]

    k = spec.keyframes_per_shot
    shot_rows = []
    for video_id in video_ids:
        for o in range(spec.shots_per_video):
            shot_rows.append((video_id, _shot_id(video_id, o), o, o * k, o * k + k - 1))

    # Relevance runs per topic x video.
    relevant: dict[str, set[str]] = {tid: set() for tid, _, _ in topics}
    for tid, _, _ in topics:
        for video_id in video_ids:
            for o in _draw_runs(rng, spec.shots_per_video, spec.relevance_rate, spec.action_run_length):
                relevant[tid].add(_shot_id(video_id, o))
        if not relevant[tid] and spec.relevance_rate > 0.0:
            # Guarantee the topic is evaluable: one run in the first video.
            start = spec.shots_per_video // 2
            length = max(1, int(round(spec.action_run_length)))
            for o in range(start, min(start + length, spec.shots_per_video)):
                relevant[tid].add(_shot_id(video_ids[0], o))

    def face_box(jitter: int) -> tuple[int, int, int, int]:
        return (100 + jitter, 80 + jitter, 140 + jitter, 130 + jitter)

    def action_box(jitter: int) -> tuple[int, int, int, int]:
        return (70 + jitter, 70 + jitter, 230 + jitter, 280 + jitter)

    records: dict[tuple, list] = {}

    def emit(video_id, shot_id, kf, kind, entity_id, conf, box):
        key = (video_id, shot_id, kf, kind, entity_id)
        if key not in records:
            conf = float(min(1.0, max(0.01, conf)))
            records[key] = [video_id, shot_id, kf, kind, entity_id, conf, box]

    topic_persons = {p for _, p, _ in topics}
    topic_actions = {a for _, _, a in topics}
    clutter_persons = [p for p in person_ids if p not in topic_persons]
    clutter_actions = [a for a in action_ids if a not in topic_actions]

    for video_id in video_ids:
        for o in range(spec.shots_per_video):
            shot_id = _shot_id(video_id, o)
            kf_range = list(range(o * k, o * k + k))
            # All false positives in a shot share one keyframe so no track
            # ever fragments without dropout.
            fp_kf = int(rng.choice(kf_range))
            for tid, person_id, action_id in topics:
                if shot_id in relevant[tid]:
                    weak = rng.random() < spec.detector_noise * 0.5
                    for kf in kf_range:
                        jitter = int(rng.integers(0, 8))
                        if weak:
                            f_conf = rng.uniform(*WEAK_FACE)
                            a_conf = rng.uniform(*WEAK_ACTION)
                        else:
                            f_conf = rng.uniform(*HIGH_FACE) - rng.uniform(0.0, spec.detector_noise) * 0.3
                            a_conf = rng.uniform(*HIGH_ACTION) - rng.uniform(0.0, spec.detector_noise) * 0.3
                        interior = kf_range[0] < kf < kf_range[-1]
                        if not (interior and rng.random() < spec.dropout_rate):
                            emit(video_id, shot_id, kf, PERSON, person_id, f_conf, face_box(jitter))
                        if not (interior and rng.random() < spec.dropout_rate):
                            emit(video_id, shot_id, kf, ACTION, action_id, a_conf, action_box(jitter))
                else:
                    if rng.random() < spec.detector_noise:
                        jitter = int(rng.integers(0, 8))
                        emit(video_id, shot_id, fp_kf, PERSON, person_id, rng.uniform(*FP_FACE), face_box(jitter))
                        emit(video_id, shot_id, fp_kf, ACTION, action_id, rng.uniform(*FP_ACTION), action_box(jitter))
            # Background clutter: single-keyframe tracks of non-topic entities.
            if rng.random() < 0.5:
                kf = int(rng.choice(kf_range))
                jitter = int(rng.integers(0, 8))
                if rng.random() < 0.5 and clutter_persons:
                    emit(video_id, shot_id, kf, PERSON, str(rng.choice(clutter_persons)), rng.uniform(*CLUTTER_CONF), face_box(jitter))
                elif clutter_actions:
                    emit(video_id, shot_id, kf, ACTION, str(rng.choice(clutter_actions)), rng.uniform(*CLUTTER_CONF), action_box(jitter))

    # Features: one cluster per topic plus a shared background cluster.
    centers = rng.normal(size=(spec.topics + 1, spec.feature_dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    feature_lines = []
    for video_id in video_ids:
        for o in range(spec.shots_per_video):
            shot_id = _shot_id(video_id, o)
            cluster = 0
            for t, (tid, _, _) in enumerate(topics, start=1):
                if shot_id in relevant[tid]:
                    cluster = t
                    break
            vec = centers[cluster] + rng.normal(0.0, FEATURE_JITTER, spec.feature_dim)
            feature_lines.append("\t".join([shot_id] + [f"{x:.6f}" for x in vec]))

    det_lines = []
    for key in sorted(records):
        video_id, shot_id, kf, kind, entity_id, conf, box = records[key]
        box_fields = [str(c) for c in box]
        det_lines.append("\t".join([video_id, shot_id, str(kf), kind, entity_id, f"{conf:.6f}"] + box_fields))

    shot_lines = ["\t".join(str(x) for x in row) for row in shot_rows]
    topic_lines = ["\t".join(t) for t in topics]
    qrel_lines = []
    for tid, _, _ in topics:
        for video_id in video_ids:
            for o in range(spec.shots_per_video):
                shot_id = _shot_id(video_id, o)
                qrel_lines.append(f"{tid} 0 {shot_id} {1 if shot_id in relevant[tid] else 0}")

    paths = {
        "detections": out / "detections.tsv",
        "shots": out / "shots.tsv",
        "topics": out / "topics.tsv",
        "features": out / "features.tsv",
        "qrels": out / "qrels.txt",
    }
    atomic_write(paths["detections"], ("\n".join(det_lines) + "\n").encode())
    atomic_write(paths["shots"], ("\n".join(shot_lines) + "\n").encode())
    atomic_write(paths["topics"], ("\n".join(topic_lines) + "\n").encode())
    atomic_write(paths["features"], ("\n".join(feature_lines) + "\n").encode())
    atomic_write(paths["qrels"], ("\n".join(qrel_lines) + "\n").encode())
    return paths
