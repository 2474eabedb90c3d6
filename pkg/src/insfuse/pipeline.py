"""End-to-end orchestration: detection extension -> fusion -> score diffusion
-> rank aggregation, driven by a JSON config.

Every knob has an explicit default; the resolved config is persisted beside
the outputs so an experiment can be reproduced from its output directory
alone. Identical config and inputs produce byte-identical outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import fileio
from .errors import PipelineError, ValidationError
from .fusion import FusionParams, fuse_topic
from .ide import IdeParams, apply_ide
from .models import Ranking
from .ra import HqParams, aggregate_rankings
from .ste import SteParams, apply_ste


@dataclass
class StageToggles:
    ide: bool = False
    icv: bool = False
    ste: bool = False
    aggregate: bool = False


@dataclass
class PipelineConfig:
    detections: Path
    shots: Path
    topics: Path
    out_dir: Path
    features: Path | None = None
    qrels: Path | None = None
    run_tag: str = "insfuse"
    depth: int = 1000
    stages: StageToggles = field(default_factory=StageToggles)
    fusion: FusionParams = field(default_factory=FusionParams)
    ide: IdeParams = field(default_factory=IdeParams)
    ste: SteParams = field(default_factory=SteParams)
    hq: HqParams = field(default_factory=HqParams)
    # Aggregation pool: extra fusion parameter variants and/or external runs.
    fusion_variants: list[FusionParams] = field(default_factory=list)
    aggregate_runs: list[Path] = field(default_factory=list)

    def validate(self) -> None:
        for name in ("detections", "shots", "topics"):
            path = getattr(self, name)
            if not Path(path).exists():
                raise ValidationError(f"config path {name}={path} does not exist")
        for path in self.aggregate_runs:
            if not Path(path).exists():
                raise ValidationError(f"aggregate run {path} does not exist")
        if self.stages.aggregate:
            n_lists = max(1, len(self.fusion_variants)) + len(self.aggregate_runs)
            if n_lists < 2:
                raise ValidationError("aggregate stage needs >= 2 run inputs or >= 2 fusion variants")

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "PipelineConfig":
        base = Path(base_dir) if base_dir else Path(".")

        def path_of(value):
            p = Path(value)
            return p if p.is_absolute() else base / p

        stages = StageToggles(**raw.get("stages", {}))
        fusion_raw = dict(raw.get("fusion", {}))
        fusion_raw.setdefault("icv_enabled", stages.icv)
        ste_raw = dict(raw.get("ste", {}))
        if ste_raw.get("enabled_topics") is not None:
            ste_raw["enabled_topics"] = frozenset(ste_raw["enabled_topics"])
        return cls(
            detections=path_of(raw["detections"]),
            shots=path_of(raw["shots"]),
            topics=path_of(raw["topics"]),
            out_dir=path_of(raw.get("out_dir", "out")),
            features=path_of(raw["features"]) if raw.get("features") else None,
            qrels=path_of(raw["qrels"]) if raw.get("qrels") else None,
            run_tag=raw.get("run_tag", "insfuse"),
            depth=int(raw.get("depth", 1000)),
            stages=stages,
            fusion=FusionParams(**fusion_raw),
            ide=IdeParams(**raw.get("ide", {})),
            ste=SteParams(**ste_raw),
            hq=HqParams(**raw.get("hq", {})),
            fusion_variants=[FusionParams(**v) for v in raw.get("fusion_variants", [])],
            aggregate_runs=[path_of(p) for p in raw.get("aggregate_runs", [])],
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), base_dir=path.parent)

    def to_dict(self) -> dict:
        return {
            "detections": str(self.detections),
            "shots": str(self.shots),
            "topics": str(self.topics),
            "features": str(self.features) if self.features else None,
            "qrels": str(self.qrels) if self.qrels else None,
            "out_dir": str(self.out_dir),
            "run_tag": self.run_tag,
            "depth": self.depth,
            "stages": vars(self.stages).copy(),
            "fusion": {"delta": self.fusion.delta, "icv_enabled": self.fusion.icv_enabled,
                       "shot_aggregation": self.fusion.shot_aggregation},
            "ide": {"max_gap": self.ide.max_gap},
            "ste": {"theta": self.ste.theta, "sigma": self.ste.sigma, "p": self.ste.p,
                    "enabled_topics": sorted(self.ste.enabled_topics) if self.ste.enabled_topics is not None else None},
            "hq": {"sigma_hq": self.hq.sigma_hq, "epsilon": self.hq.epsilon, "max_iters": self.hq.max_iters},
            "fusion_variants": [{"delta": v.delta, "icv_enabled": v.icv_enabled} for v in self.fusion_variants],
            "aggregate_runs": [str(p) for p in self.aggregate_runs],
        }


@dataclass
class PipelineResult:
    rankings: list[Ranking]
    run_files: dict[str, Path]
    report: dict


def _stage(name: str, topic_id: str | None = None):
    where = f"stage {name}" + (f", topic {topic_id}" if topic_id else "")
    return where


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_files: dict[str, Path] = {}
    report: dict = {"stages": [], "topics": {}}

    try:
        detections = fileio.load_detections(config.detections)
        shots = fileio.load_shots(config.shots)
        topics = fileio.load_topics(config.topics)
    except Exception as err:
        raise PipelineError(f"{_stage('load')}: {err}") from err

    if config.stages.ide:
        try:
            detections = apply_ide(detections, shots, config.ide)
        except Exception as err:
            raise PipelineError(f"{_stage('ide')}: {err}") from err
        path = out_dir / "ide.detections.tsv"
        fileio.atomic_write(path, fileio.write_detections(detections))
        run_files["ide"] = path
        report["stages"].append("ide")

    variants = config.fusion_variants if config.fusion_variants else [config.fusion]
    variant_lists: list[list[Ranking]] = []
    for vi, params in enumerate(variants):
        rankings = []
        for topic in topics:
            try:
                rankings.append(fuse_topic(topic, detections, shots, params, run_tag=f"{config.run_tag}-f{vi}"))
            except Exception as err:
                raise PipelineError(f"{_stage('fuse', topic.topic_id)}: {err}") from err
        variant_lists.append(rankings)
        name = "fuse.run" if len(variants) == 1 else f"fuse_{vi}.run"
        path = out_dir / name
        fileio.atomic_write(path, fileio.write_runs(rankings, config.depth))
        run_files[name.removesuffix(".run")] = path
    report["stages"].append("fuse")
    report["fusion_variants"] = len(variants)

    if config.stages.ste:
        for vi, rankings in enumerate(variant_lists):
            diffused = []
            for ranking in rankings:
                try:
                    diffused.append(apply_ste(ranking, shots, config.ste))
                except Exception as err:
                    raise PipelineError(f"{_stage('ste', ranking.topic_id)}: {err}") from err
            variant_lists[vi] = diffused
            name = "ste.run" if len(variants) == 1 else f"ste_{vi}.run"
            path = out_dir / name
            fileio.atomic_write(path, fileio.write_runs(diffused, config.depth))
            run_files[name.removesuffix(".run")] = path
        report["stages"].append("ste")

    if config.stages.aggregate:
        pool: dict[str, list[Ranking]] = {}
        for rankings in variant_lists:
            for ranking in rankings:
                pool.setdefault(ranking.topic_id, []).append(ranking)
        for path in config.aggregate_runs:
            try:
                for ranking in fileio.read_run(path):
                    pool.setdefault(ranking.topic_id, []).append(ranking)
            except Exception as err:
                raise PipelineError(f"{_stage('aggregate')}: reading {path}: {err}") from err
        final: list[Ranking] = []
        alphas: dict[str, list[float]] = {}
        for topic in topics:
            lists = pool.get(topic.topic_id, [])
            lists = [r for r in lists if r.entries]
            if not lists:
                final.append(Ranking(topic.topic_id, [], config.run_tag))
                continue
            try:
                consensus, alpha, iters = aggregate_rankings(lists, config.hq, run_tag=config.run_tag)
            except Exception as err:
                raise PipelineError(f"{_stage('aggregate', topic.topic_id)}: {err}") from err
            final.append(consensus)
            alphas[topic.topic_id] = alpha
            report["topics"].setdefault(topic.topic_id, {})["aggregate_iterations"] = iters
        path = out_dir / "aggregate.run"
        fileio.atomic_write(path, fileio.write_runs(final, config.depth))
        run_files["aggregate"] = path
        report["stages"].append("aggregate")
        report["alphas"] = alphas
    else:
        final = variant_lists[0]
        for ranking in final:
            ranking.run_tag = config.run_tag

    for ranking in final:
        report["topics"].setdefault(ranking.topic_id, {})["entries"] = len(ranking.entries)

    final_path = out_dir / "final.run"
    fileio.atomic_write(final_path, fileio.write_runs(final, config.depth))
    run_files["final"] = final_path

    fileio.atomic_write(out_dir / "config.json", (json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n").encode())
    fileio.atomic_write(out_dir / "report.json", (json.dumps(report, indent=2, sort_keys=True) + "\n").encode())
    run_files["report"] = out_dir / "report.json"
    return PipelineResult(rankings=final, run_files=run_files, report=report)
