"""Command line interface.

    insfuse synth --seed 42 --out data/
    insfuse ide --detections D.tsv --shots S.tsv --max-gap 10 -o OUT.tsv
    insfuse fuse --detections D.tsv --shots S.tsv --topics T.tsv --delta 0.5 [--icv] -o RUNDIR/
    insfuse ste --run IN.run --shots S.tsv --theta 0.5 --sigma 2 --p 3 -o OUT.run
    insfuse aggregate --runs A.run --runs B.run -o AGG.run [--report]
    insfuse eval --run R.run --qrels Q.txt --depth 1000 [--per-topic]
    insfuse feedback simulate --run IN.run --qrels Q.txt --strategy topk -o OUT.run
    insfuse run --config cfg.json
    insfuse serve --port 8080 --data DIR --assets DIR
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import evaluation, fileio
from .errors import InsfuseError
from .feedback import CaafParams, TopKStrategy, simulate_caaf, simulate_topk
from .fusion import FusionParams, fuse_topic
from .ide import IdeParams, apply_ide
from .pipeline import PipelineConfig, run_pipeline
from .ra import HqParams, aggregate_rankings
from .ste import SteParams, apply_ste
from .synth import SyntheticSpec, synth_generate


@click.group()
def main():
    """Fusion and interactive re-ranking for person-action instance search."""


def _fail(err: Exception) -> None:
    click.echo(f"error: {err}", err=True)
    sys.exit(1)


@main.command()
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--videos", type=int, default=4, show_default=True)
@click.option("--shots-per-video", type=int, default=12, show_default=True)
@click.option("--keyframes-per-shot", type=int, default=5, show_default=True)
@click.option("--persons", type=int, default=4, show_default=True)
@click.option("--actions", type=int, default=4, show_default=True)
@click.option("--topics", type=int, default=2, show_default=True)
@click.option("--relevance-rate", type=float, default=0.15, show_default=True)
@click.option("--detector-noise", type=float, default=0.2, show_default=True)
@click.option("--dropout-rate", type=float, default=0.3, show_default=True)
@click.option("--feature-dim", type=int, default=16, show_default=True)
@click.option("--action-run-length", type=float, default=2.0, show_default=True)
def synth(seed, out_dir, **kwargs):
    """Generate a seeded synthetic dataset."""
    try:
        spec = SyntheticSpec(seed=seed, **kwargs)
        paths = synth_generate(spec, out_dir)
    except InsfuseError as err:
        _fail(err)
    for name, path in paths.items():
        click.echo(f"{name}\t{path}")


@main.command()
@click.option("--detections", type=click.Path(exists=True), required=True)
@click.option("--shots", type=click.Path(exists=True), required=True)
@click.option("--max-gap", type=int, default=10, show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True)
def ide(detections, shots, max_gap, output):
    """Fill per-track detection gaps by linear interpolation."""
    try:
        table = fileio.load_detections(detections)
        index = fileio.load_shots(shots)
        filled = apply_ide(table, index, IdeParams(max_gap=max_gap))
    except InsfuseError as err:
        _fail(err)
    fileio.atomic_write(output, fileio.write_detections(filled))
    click.echo(f"{len(filled) - len(table)} interpolated records -> {output}")


@main.command()
@click.option("--detections", type=click.Path(exists=True), required=True)
@click.option("--shots", type=click.Path(exists=True), required=True)
@click.option("--topics", type=click.Path(exists=True), required=True)
@click.option("--delta", type=float, default=0.5, show_default=True)
@click.option("--icv", is_flag=True, default=False)
@click.option("--run-tag", default="fuse", show_default=True)
@click.option("--depth", type=int, default=1000, show_default=True)
@click.option("-o", "--out-dir", type=click.Path(), required=True)
def fuse(detections, shots, topics, delta, icv, run_tag, depth, out_dir):
    """Filter-fuse face and action detections into per-topic rankings."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        table = fileio.load_detections(detections)
        index = fileio.load_shots(shots)
        topic_list = fileio.load_topics(topics)
        params = FusionParams(delta=delta, icv_enabled=icv)
        rankings = [fuse_topic(t, table, index, params, run_tag=run_tag) for t in topic_list]
    except InsfuseError as err:
        _fail(err)
    for ranking in rankings:
        fileio.atomic_write(out / f"{ranking.topic_id}.run", fileio.write_run(ranking, depth))
    fileio.atomic_write(out / "merged.run", fileio.write_runs(rankings, depth))
    click.echo(f"{len(rankings)} topics -> {out / 'merged.run'}")


@main.command()
@click.option("--run", "run_path", type=click.Path(exists=True), required=True)
@click.option("--shots", type=click.Path(exists=True), required=True)
@click.option("--theta", type=float, default=0.5, show_default=True)
@click.option("--sigma", type=float, default=2.0, show_default=True)
@click.option("--p", type=int, default=3, show_default=True)
@click.option("--topics", "topics_csv", default=None, help="Comma-separated topic_ids to diffuse; default all.")
@click.option("--depth", type=int, default=1000, show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True)
def ste(run_path, shots, theta, sigma, p, topics_csv, depth, output):
    """Diffuse shot scores from higher-confidence temporal neighbors."""
    enabled = frozenset(topics_csv.split(",")) if topics_csv else None
    try:
        params = SteParams(theta=theta, sigma=sigma, p=p, enabled_topics=enabled)
        index = fileio.load_shots(shots)
        rankings = [apply_ste(r, index, params) for r in fileio.read_run(run_path)]
    except InsfuseError as err:
        _fail(err)
    fileio.atomic_write(output, fileio.write_runs(rankings, depth))
    click.echo(f"{len(rankings)} topics -> {output}")


@main.command()
@click.option("--runs", "run_paths", type=click.Path(exists=True), multiple=True, required=True)
@click.option("--sigma-hq", default="auto", show_default=True)
@click.option("--epsilon", type=float, default=1e-9, show_default=True)
@click.option("--max-iters", type=int, default=100, show_default=True)
@click.option("--report", is_flag=True, default=False, help="Print per-topic alpha weights.")
@click.option("--depth", type=int, default=1000, show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True)
def aggregate(run_paths, sigma_hq, epsilon, max_iters, report, depth, output):
    """Aggregate run files into a robust consensus ranking per topic."""
    sigma = sigma_hq if sigma_hq == "auto" else float(sigma_hq)
    try:
        params = HqParams(sigma_hq=sigma, epsilon=epsilon, max_iters=max_iters)
        pool: dict[str, list] = {}
        order: list[str] = []
        for path in run_paths:
            for ranking in fileio.read_run(path):
                if ranking.topic_id not in pool:
                    order.append(ranking.topic_id)
                pool.setdefault(ranking.topic_id, []).append(ranking)
        out = []
        for topic_id in order:
            consensus, alphas, iters = aggregate_rankings(pool[topic_id], params)
            out.append(consensus)
            if report:
                alpha_s = " ".join(f"{a:.4f}" for a in alphas)
                click.echo(f"topic {topic_id}: iterations={iters} alpha=[{alpha_s}]")
    except InsfuseError as err:
        _fail(err)
    fileio.atomic_write(output, fileio.write_runs(out, depth))
    click.echo(f"{len(out)} topics -> {output}")


@main.command("eval")
@click.option("--run", "run_path", type=click.Path(exists=True), required=True)
@click.option("--qrels", type=click.Path(exists=True), required=True)
@click.option("--depth", type=int, default=1000, show_default=True)
@click.option("--per-topic", is_flag=True, default=False)
def eval_cmd(run_path, qrels, depth, per_topic):
    """Average precision per topic and mAP."""
    try:
        rankings = fileio.read_run(run_path)
        judgments = fileio.load_qrels(qrels)
        report = evaluation.evaluate_run(rankings, judgments, depth)
    except InsfuseError as err:
        _fail(err)
    if per_topic:
        for topic_id, ap in report.per_topic_ap.items():
            click.echo(f"{topic_id}\t{ap:.6f}")
    click.echo(f"mAP\t{report.mean_ap:.6f}")


@main.group()
def feedback():
    """Interactive feedback simulations."""


@feedback.command()
@click.option("--run", "run_path", type=click.Path(exists=True), required=True)
@click.option("--qrels", type=click.Path(exists=True), required=True)
@click.option("--strategy", type=click.Choice(["topk", "caaf"]), required=True)
@click.option("--k", type=int, default=100, show_default=True)
@click.option("--mode", type=click.Choice(["positive_only", "negative_only", "both"]), default="both", show_default=True)
@click.option("--rounds", type=int, default=5, show_default=True)
@click.option("--batch", type=int, default=5, show_default=True)
@click.option("--features", type=click.Path(exists=True), default=None)
@click.option("--depth", type=int, default=1000, show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True)
@click.option("--report", "report_path", type=click.Path(), default=None, help="Write round/labels/AP curves TSV.")
def simulate(run_path, qrels, strategy, k, mode, rounds, batch, features, depth, output, report_path):
    """Replay oracle-labeled feedback rounds over a run."""
    try:
        rankings = fileio.read_run(run_path)
        judgments = fileio.load_qrels(qrels)
        feats = fileio.load_features(features) if features else None
        if strategy == "caaf" and feats is None:
            raise InsfuseError("caaf simulation requires --features")
        curve_rows = []
        finals = []
        for ranking in rankings:
            curve_rows.append((0, 0, ranking.topic_id, evaluation.average_precision(ranking, judgments, depth)))
            final = ranking
            # Replay prefixes so each round's AP reflects its cumulative labels.
            for r in range(1, rounds + 1):
                if strategy == "topk":
                    final, history, _ = simulate_topk(ranking, judgments, TopKStrategy(mode=mode, k=k), r)
                else:
                    final, history, _ = simulate_caaf(ranking, judgments, feats, CaafParams(batch=batch), r)
                labels_used = history[-1]["labels_used"] if history else 0
                curve_rows.append((r, labels_used, ranking.topic_id, evaluation.average_precision(final, judgments, depth)))
            finals.append(final)
    except InsfuseError as err:
        _fail(err)
    fileio.atomic_write(output, fileio.write_runs(finals, depth))
    if report_path:
        lines = ["round\tlabels_used\ttopic\tap"]
        lines += [f"{r}\t{n}\t{t}\t{ap:.6f}" for r, n, t, ap in curve_rows]
        fileio.atomic_write(report_path, ("\n".join(lines) + "\n").encode())
    click.echo(f"{len(finals)} topics -> {output}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out-dir", type=click.Path(), default=None, help="Override the config's output directory.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override any config field by dotted path, e.g. --set stages.ste=true --set ste.theta=0.7")
def run(config_path, out_dir, overrides):
    """Run the full pipeline from a JSON config."""
    try:
        raw = json.loads(Path(config_path).read_text())
        for item in overrides:
            key, _, value = item.partition("=")
            if not _:
                raise InsfuseError(f"override {item!r} is not KEY=VALUE")
            _apply_override(raw, key.strip(), value.strip())
        if out_dir:
            raw["out_dir"] = out_dir
        config = PipelineConfig.from_dict(raw, base_dir=Path(config_path).parent)
        result = run_pipeline(config)
    except InsfuseError as err:
        _fail(err)
    for name, path in result.run_files.items():
        click.echo(f"{name}\t{path}")


def _apply_override(raw: dict, dotted: str, value: str) -> None:
    node = raw
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise InsfuseError(f"cannot override {dotted}: {part} is not an object")
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value  # bare strings allowed, e.g. --set run_tag=exp7
    node[parts[-1]] = parsed


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--data", "data_dir", type=click.Path(exists=True), required=True)
@click.option("--assets", "assets_dir", type=click.Path(exists=True), default=None)
def serve(host, port, data_dir, assets_dir):
    """Serve the interactive session API."""
    from .service import serve as _serve

    _serve(host, port, data_dir, assets_dir)


if __name__ == "__main__":
    main()
