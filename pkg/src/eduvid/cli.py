"""Stage-per-subcommand command-line driver.

Every subcommand reads and writes the same project-directory layout as the
HTTP service, so the two paths are interchangeable. Exit codes: 0 success,
1 validation error, 2 I/O error.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
from pathlib import Path

import click

from . import insight as insight_mod
from .errors import EduvidError, SchemaError
from .extract import SceneDetectorConfig
from .ingest import HttpTransport, fetch_video_metadata, import_engagement
from .project import (
    DEFAULT_SPAN,
    ProjectPaths,
    extract_videos,
    load_model,
    metadata_from_row,
    parse_manual_csv,
    run_dataset_build,
    run_eda,
    run_report,
    run_train,
    run_whatif,
    save_engagement,
    save_metadata,
    upsert_features,
)

API_KEY_ENV = "EDUVID_API_KEY"


def load_config(path: str | None) -> dict[str, str]:
    """Flat key=value config file; '#' starts a comment line."""
    if not path:
        return {}
    cfg = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(f"config line {line_no}: expected key=value")
        key, _, value = line.partition("=")
        cfg[key.strip()] = value.strip()
    return cfg


class Ctx:
    def __init__(self, as_json: bool, config: dict[str, str]):
        self.as_json = as_json
        self.config = config

    def setting(self, key: str, flag_value, default):
        if flag_value is not None:
            return flag_value
        if key in self.config:
            return type(default)(self.config[key])
        return default

    def emit(self, payload: dict, human: str) -> None:
        if self.as_json:
            click.echo(json.dumps(payload, indent=2))
        else:
            click.echo(human)

    def fail(self, exc: Exception, code: int) -> None:
        if self.as_json:
            click.echo(json.dumps({"error": {
                "type": type(exc).__name__, "message": str(exc)}}))
        else:
            click.echo(f"error: {exc}", err=True)
        sys.exit(code)


def run_guarded(ctx: Ctx, fn):
    try:
        return fn()
    except EduvidError as exc:
        ctx.fail(exc, 1)
    except OSError as exc:
        ctx.fail(exc, 2)


@click.group()
@click.option("--json", "as_json", is_flag=True, help="machine-readable output")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="flat key=value config file")
@click.pass_context
def main(click_ctx, as_json: bool, config_path: str | None):
    """Educational-video analytics workflow."""
    try:
        config = load_config(config_path)
    except (EduvidError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2 if isinstance(exc, OSError) else 1)
    click_ctx.obj = Ctx(as_json, config)


def project_paths(project: str) -> ProjectPaths:
    return ProjectPaths(Path(project)).ensure()


@main.command()
@click.option("--project", required=True, type=click.Path())
@click.option("--manual", "manual_csv", required=True, type=click.Path(),
              help="CSV of video_id + manual metadata fields")
@click.option("--engagement", "engagement_csv", type=click.Path(), default=None)
@click.option("--fetch", is_flag=True,
              help=f"fetch remote metadata (key from ${API_KEY_ENV})")
@click.pass_obj
def ingest(ctx: Ctx, project: str, manual_csv: str,
           engagement_csv: str | None, fetch: bool):
    """Collect metadata (stage 2) and optionally import engagement."""
    def body():
        paths = project_paths(project)
        rows = parse_manual_csv(Path(manual_csv).read_bytes())
        transport = None
        if fetch:
            key = os.environ.get(API_KEY_ENV, "")
            if not key:
                raise SchemaError(f"--fetch requires ${API_KEY_ENV}")
            transport = HttpTransport()
        metadata = []
        for row in rows:
            remote = None
            if transport is not None:
                remote = fetch_video_metadata(row["video_id"], key, transport)
            metadata.append(metadata_from_row(row, remote))
        save_metadata(paths, metadata)
        n_engagement = 0
        if engagement_csv:
            records = import_engagement(Path(engagement_csv).read_bytes())
            save_engagement(paths, records)
            n_engagement = len(records)
        ctx.emit({"videos": len(metadata), "engagement_records": n_engagement},
                 f"ingested {len(metadata)} videos"
                 + (f", {n_engagement} engagement records" if engagement_csv else ""))
    run_guarded(ctx, body)


@main.command()
@click.option("--project", required=True, type=click.Path())
@click.option("--frames", type=click.Path(), default=None, help="EVF1 stream file")
@click.option("--transcript", type=click.Path(), default=None)
@click.option("--video-id", default=None)
@click.option("--batch", type=click.Path(), default=None,
              help="CSV manifest with video_id,frames,transcript columns")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--threshold", type=float, default=None)
@click.option("--min-gap", "min_gap_s", type=float, default=None)
@click.option("--stride", type=int, default=None)
@click.pass_obj
def extract(ctx: Ctx, project: str, frames: str | None, transcript: str | None,
            video_id: str | None, batch: str | None, jobs: int,
            threshold: float | None, min_gap_s: float | None, stride: int | None):
    """Extract the five features from frame streams and transcripts."""
    def body():
        paths = project_paths(project)
        cfg = SceneDetectorConfig(
            threshold=ctx.setting("threshold", threshold, 0.12),
            min_gap_s=ctx.setting("min_gap_s", min_gap_s, 1.0),
            stride=ctx.setting("stride", stride, 1))
        if batch:
            items = _read_batch_manifest(Path(batch))
        else:
            if not (frames and transcript and video_id):
                raise SchemaError(
                    "either --batch or all of --frames/--transcript/--video-id")
            items = [(video_id, Path(frames), Path(transcript))]
        features = extract_videos(items, cfg, workers=max(1, jobs))
        upsert_features(paths, features)
        ctx.emit({"extracted": [f.video_id for f in features]},
                 f"extracted features for {len(features)} video(s)")
    run_guarded(ctx, body)


def _read_batch_manifest(path: Path) -> list[tuple[str, Path, Path]]:
    reader = csv.reader(io.StringIO(path.read_text(encoding="utf-8"), newline=""))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["video_id", "frames",
                                                         "transcript"]:
        raise SchemaError("batch manifest needs video_id,frames,transcript header")
    base = path.parent
    return [(row[0], base / row[1], base / row[2])
            for row in reader if row and any(c.strip() for c in row)]


@main.group()
def dataset():
    """Stage 3 dataset operations."""


@dataset.command("build")
@click.option("--project", required=True, type=click.Path())
@click.pass_obj
def dataset_build(ctx: Ctx, project: str):
    """Join metadata, features and engagement into dataset.csv."""
    def body():
        paths = project_paths(project)
        built, report = run_dataset_build(paths)
        payload = {
            "total_rows": report.total_rows,
            "complete_rows": report.complete_rows,
            "issues": [{"video_id": i.video_id, "field": i.field,
                        "kind": i.kind, "message": i.message}
                       for i in report.issues],
        }
        human = (f"dataset.csv: {report.total_rows} rows,"
                 f" {report.complete_rows} complete,"
                 f" {len(report.issues)} issue(s)")
        ctx.emit(payload, human)
    run_guarded(ctx, body)


@main.command()
@click.option("--project", required=True, type=click.Path())
@click.option("--span", type=float, default=None)
@click.pass_obj
def eda(ctx: Ctx, project: str, span: float | None):
    """Stage 4 exploratory analysis into eda.json and svg/."""
    def body():
        paths = project_paths(project)
        report = run_eda(paths, span=ctx.setting("span", span, DEFAULT_SPAN))
        correlations = {c.feature_name: round(c.r, 4) for c in report.correlations}
        ctx.emit({"n_complete": report.n_complete, "correlations": correlations},
                 f"eda.json written ({report.n_complete} complete rows);"
                 f" correlations: {correlations}")
    run_guarded(ctx, body)


@main.command()
@click.option("--project", required=True, type=click.Path())
@click.option("--cv", type=int, default=0, show_default=True,
              help="k-fold cross-validation (0 = in-sample only)")
@click.option("--seed", type=int, default=0, show_default=True,
              help="shuffle seed for cross-validation")
@click.pass_obj
def train(ctx: Ctx, project: str, cv: int, seed: int):
    """Stage 5: fit the regression model into model.json."""
    def body():
        paths = project_paths(project)
        payload = run_train(paths, cv=cv, seed=seed)
        metrics = payload["metrics"]
        ctx.emit(payload,
                 f"model.json written: rmse={metrics['rmse']:.4f}"
                 f" r_squared={metrics['r_squared']:.4f} n={metrics['n']}")
    run_guarded(ctx, body)


@main.group()
def insight():
    """Stage 6 insight extraction."""


@insight.command("rank")
@click.option("--project", required=True, type=click.Path())
@click.pass_obj
def insight_rank(ctx: Ctx, project: str):
    """Rank features by influence on predicted engagement."""
    def body():
        paths = project_paths(project)
        model, _ = load_model(paths)
        influences = insight_mod.rank_features(model)
        payload = {"influences": [{
            "rank": i.rank, "feature_name": i.feature_name,
            "weight": i.weight, "direction": i.direction} for i in influences]}
        human = "\n".join(f"{i.rank}. {i.feature_name}: {i.weight:+.4f}"
                          f" ({i.direction})" for i in influences)
        ctx.emit(payload, human)
    run_guarded(ctx, body)


@insight.command("whatif")
@click.option("--project", required=True, type=click.Path())
@click.option("--feature", "features", multiple=True, required=True,
              help="feature name (repeatable, pair with --delta)")
@click.option("--delta", "deltas", multiple=True, type=float, required=True,
              help="raw-unit change (repeatable, pairs with --feature)")
@click.option("--baseline", "baseline_kv", multiple=True,
              help="NAME=VALUE baseline override (defaults to training means)")
@click.pass_obj
def insight_whatif(ctx: Ctx, project: str, features: tuple[str, ...],
                   deltas: tuple[float, ...], baseline_kv: tuple[str, ...]):
    """Simulate raw-unit feature changes through the stored model."""
    def body():
        if len(features) != len(deltas):
            raise SchemaError("--feature and --delta must pair up")
        baseline = {}
        for kv in baseline_kv:
            if "=" not in kv:
                raise SchemaError(f"--baseline needs NAME=VALUE, got {kv!r}")
            name, _, value = kv.partition("=")
            baseline[name] = float(value)
        paths = project_paths(project)
        scenario = run_whatif(paths, dict(zip(features, deltas)),
                              baseline or None)
        ctx.emit(insight_mod.scenario_to_dict(scenario),
                 f"predicted: {scenario.predicted_baseline:.2f} ->"
                 f" {scenario.predicted_new:.2f}"
                 f" (delta {scenario.delta_engagement:+.2f} points)")
    run_guarded(ctx, body)


@main.command()
@click.option("--project", required=True, type=click.Path())
@click.pass_obj
def report(ctx: Ctx, project: str):
    """Stage 7: write the design-feedback report.json and report.md."""
    def body():
        paths = project_paths(project)
        design = run_report(paths)
        ctx.emit(insight_mod.report_to_dict(design),
                 f"report.json written: {len(design.recommendations)}"
                 f" recommendation(s), {len(design.caveats)} caveat(s)")
    run_guarded(ctx, body)


@main.command()
@click.option("--port", type=int, default=None, help="default 8787")
@click.option("--data-dir", type=click.Path(), default=None, help="default ./eduvid-data")
@click.option("--decoder-cmd", default=None,
              help="external decoder template with {input} and {output}")
@click.option("--ui-dir", type=click.Path(), default=None,
              help="static UI assets (default: ./frontend/dist when present)")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_obj
def serve(ctx: Ctx, port: int | None, data_dir: str | None,
          decoder_cmd: str | None, ui_dir: str | None, host: str):
    """Host the HTTP JSON API (and the web UI when built)."""
    import uvicorn

    from .service import create_app

    ui_path = Path(ctx.setting("ui_dir", ui_dir, "frontend/dist"))
    app = create_app(
        Path(ctx.setting("data_dir", data_dir, "eduvid-data")),
        decoder_cmd=ctx.setting("decoder_cmd", decoder_cmd, "") or None,
        ui_dir=ui_path if ui_path.exists() else None)
    uvicorn.run(app, host=host, port=ctx.setting("port", port, 8787))


if __name__ == "__main__":
    main()
