"""Project-directory layout and the stage runners shared by CLI and service.

A project is a plain directory; its files are the single source of truth:

    metadata.csv      stage 2: video metadata (remote + manual + tag)
    engagement.csv    stage 2: imported engagement metrics
    features.csv      stage 2: extracted video features
    dataset.csv       stage 3: joined analysis table
    eda.json, svg/    stage 4: exploratory analysis
    model.json        stage 5: fitted regression model (+ VIF, training info)
    report.json/.md   stage 7: design-feedback report

Both frontends call the same runners with the same defaults, so the two
paths produce byte-identical artefacts for the same inputs.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from . import dataset as ds_mod
from . import eda as eda_mod
from . import insight as insight_mod
from . import model as model_mod
from . import svgplot
from .errors import CsvRowError, SchemaError, StageOrderViolation
from .extract import FEATURE_NAMES, SceneDetectorConfig, VideoFeatures, extract_features
from .ingest import (
    EngagementRecord,
    DatasetTag,
    ManualMetadata,
    RemoteMetadata,
    VideoMetadata,
    WATCH_URL,
    import_engagement,
    make_dataset_tag,
    serialize_engagement,
)

DEFAULT_SPAN = 0.5

METADATA_COLUMNS = (
    "dataset_tag", "video_id", "institution_name", "speaker_name",
    "course_code", "course_name", "unit_level", "year", "video_type",
    "subject_area", "video_url", "title", "published_at", "channel_name",
    "channel_id",
)
_MANUAL_FIELDS = ("institution_name", "speaker_name", "course_code",
                  "course_name", "unit_level", "year", "video_type",
                  "subject_area")
FEATURES_COLUMNS = ("video_id",) + FEATURE_NAMES


@dataclass(frozen=True)
class ProjectPaths:
    root: Path

    @property
    def metadata_csv(self) -> Path: return self.root / "metadata.csv"

    @property
    def engagement_csv(self) -> Path: return self.root / "engagement.csv"

    @property
    def features_csv(self) -> Path: return self.root / "features.csv"

    @property
    def dataset_csv(self) -> Path: return self.root / "dataset.csv"

    @property
    def eda_json(self) -> Path: return self.root / "eda.json"

    @property
    def model_json(self) -> Path: return self.root / "model.json"

    @property
    def report_json(self) -> Path: return self.root / "report.json"

    @property
    def report_md(self) -> Path: return self.root / "report.md"

    @property
    def svg_dir(self) -> Path: return self.root / "svg"

    @property
    def videos_dir(self) -> Path: return self.root / "videos"

    @property
    def transcripts_dir(self) -> Path: return self.root / "transcripts"

    def ensure(self) -> "ProjectPaths":
        self.root.mkdir(parents=True, exist_ok=True)
        return self


def require(path: Path, stage: str, needed_by: str) -> None:
    if not path.exists():
        raise StageOrderViolation(
            f"{needed_by} needs {path.name}; run '{stage}' first")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def training_timestamp() -> str:
    """ISO UTC timestamp; honours SOURCE_DATE_EPOCH for reproducible runs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.replace(microsecond=0).isoformat()


# --- stage 2: metadata ---------------------------------------------------------

def parse_manual_csv(data: bytes) -> list[dict[str, str]]:
    """Rows of the operator-supplied metadata CSV, header-normalised.

    Mandatory columns: video_id plus the eight manual fields; optional:
    video_url, title, published_at, channel_name, channel_id.
    """
    from .ingest import _normalize_header  # same alias rule as engagement CSV

    text = data.decode("utf-8")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = [_normalize_header(h) for h in next(reader)]
    except StopIteration:
        raise SchemaError("metadata CSV is empty") from None
    for name in ("video_id",) + _MANUAL_FIELDS:
        if name not in header:
            raise SchemaError(f"metadata CSV missing mandatory column {name!r}")
    rows = []
    for row_no, cells in enumerate(reader, start=1):
        if not cells or all(c.strip() == "" for c in cells):
            continue
        row = {name: cells[i].strip() if i < len(cells) else ""
               for i, name in enumerate(header)}
        if not row.get("video_id"):
            raise CsvRowError(row_no, "empty video_id")
        rows.append(row)
    return rows


def metadata_from_row(row: dict[str, str],
                      remote: RemoteMetadata | None = None) -> VideoMetadata:
    """Assemble one VideoMetadata from a parsed manual row.

    When no fetched remote record is supplied, the watch URL is synthesised
    from the video id and the display fields stay empty.
    """
    try:
        manual = ManualMetadata(
            institution_name=row["institution_name"],
            speaker_name=row["speaker_name"],
            course_code=row["course_code"],
            course_name=row["course_name"],
            unit_level=row["unit_level"],
            year=int(row["year"]),
            video_type=row["video_type"],
            subject_area=row["subject_area"],
        )
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"video {row.get('video_id', '?')}: {exc}") from None
    if remote is None:
        remote = RemoteMetadata(
            video_id=row["video_id"],
            url=row.get("video_url") or WATCH_URL.format(video_id=row["video_id"]),
            title=row.get("title", ""),
            published_at=row.get("published_at", ""),
            channel_name=row.get("channel_name", ""),
            channel_id=row.get("channel_id", ""),
        )
    return VideoMetadata(dataset_tag=make_dataset_tag(manual),
                         remote=remote, manual=manual)


def save_metadata(paths: ProjectPaths, metadata: list[VideoMetadata]) -> None:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(METADATA_COLUMNS)
    for m in metadata:
        writer.writerow([
            m.dataset_tag.value, m.video_id,
            m.manual.institution_name, m.manual.speaker_name,
            m.manual.course_code, m.manual.course_name, m.manual.unit_level,
            str(m.manual.year), m.manual.video_type, m.manual.subject_area,
            m.remote.url, m.remote.title, m.remote.published_at,
            m.remote.channel_name, m.remote.channel_id,
        ])
    paths.metadata_csv.write_text(out.getvalue(), encoding="utf-8")


def load_metadata(paths: ProjectPaths) -> list[VideoMetadata]:
    reader = csv.reader(io.StringIO(
        paths.metadata_csv.read_text(encoding="utf-8"), newline=""))
    header = next(reader)
    if tuple(header) != METADATA_COLUMNS:
        raise SchemaError(f"metadata.csv header mismatch: got {header}")
    out = []
    for row_no, cells in enumerate(reader, start=1):
        if not cells or all(c == "" for c in cells):
            continue
        rec = dict(zip(METADATA_COLUMNS, cells))
        try:
            manual = ManualMetadata(
                institution_name=rec["institution_name"],
                speaker_name=rec["speaker_name"],
                course_code=rec["course_code"],
                course_name=rec["course_name"],
                unit_level=rec["unit_level"],
                year=int(rec["year"]),
                video_type=rec["video_type"],
                subject_area=rec["subject_area"],
            )
            remote = RemoteMetadata(
                video_id=rec["video_id"], url=rec["video_url"],
                title=rec["title"], published_at=rec["published_at"],
                channel_name=rec["channel_name"], channel_id=rec["channel_id"])
            out.append(VideoMetadata(dataset_tag=DatasetTag(rec["dataset_tag"]),
                                     remote=remote, manual=manual))
        except ValueError as exc:
            raise CsvRowError(row_no, str(exc)) from None
    return out


# --- stage 2: engagement and features -------------------------------------------

def save_engagement(paths: ProjectPaths, records: list[EngagementRecord]) -> None:
    paths.engagement_csv.write_bytes(serialize_engagement(records))


def load_engagement(paths: ProjectPaths) -> list[EngagementRecord]:
    return import_engagement(paths.engagement_csv.read_bytes())


def save_features(paths: ProjectPaths, features: list[VideoFeatures]) -> None:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(FEATURES_COLUMNS)
    for f in features:
        writer.writerow([f.video_id, repr(f.duration_min), str(f.word_count),
                         repr(f.speaking_speed_wpm), str(f.scene_count),
                         repr(f.scene_rate_spm)])
    paths.features_csv.write_text(out.getvalue(), encoding="utf-8")


def load_features(paths: ProjectPaths) -> list[VideoFeatures]:
    reader = csv.reader(io.StringIO(
        paths.features_csv.read_text(encoding="utf-8"), newline=""))
    header = next(reader)
    if tuple(header) != FEATURES_COLUMNS:
        raise SchemaError(f"features.csv header mismatch: got {header}")
    out = []
    for row_no, cells in enumerate(reader, start=1):
        if not cells or all(c == "" for c in cells):
            continue
        rec = dict(zip(FEATURES_COLUMNS, cells))
        try:
            out.append(VideoFeatures(
                video_id=rec["video_id"],
                duration_min=float(rec["duration_min"]),
                word_count=int(rec["word_count"]),
                speaking_speed_wpm=float(rec["speaking_speed_wpm"]),
                scene_count=int(rec["scene_count"]),
                scene_rate_spm=float(rec["scene_rate_spm"])))
        except ValueError as exc:
            raise CsvRowError(row_no, str(exc)) from None
    return out


def upsert_features(paths: ProjectPaths, new: list[VideoFeatures]) -> None:
    """Replace rows with matching video_id in place, append the rest."""
    current = load_features(paths) if paths.features_csv.exists() else []
    by_id = {f.video_id: f for f in new}
    merged = [by_id.pop(f.video_id, f) for f in current]
    merged.extend(by_id[f.video_id] for f in new if f.video_id in by_id)
    save_features(paths, merged)


def extract_videos(jobs_input: list[tuple[str, Path, Path]],
                   cfg: SceneDetectorConfig, workers: int = 1,
                   progress: Callable[[int, int], None] | None = None,
                   ) -> list[VideoFeatures]:
    """Extract features for (video_id, frames_path, transcript_path) items.

    Per-video extraction runs on a worker pool; results come back in input
    order regardless of completion order, so downstream files are
    deterministic.
    """
    def one(item: tuple[str, Path, Path]) -> VideoFeatures:
        video_id, frames_path, transcript_path = item
        with open(frames_path, "rb") as fh:
            return extract_features(fh, transcript_path.read_bytes(),
                                    cfg=cfg, video_id=video_id)

    results: list[VideoFeatures] = []
    if workers <= 1:
        for i, item in enumerate(jobs_input):
            results.append(one(item))
            if progress:
                progress(i + 1, len(jobs_input))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(one, item) for item in jobs_input]
            done = 0
            for future in futures:
                results.append(future.result())
                done += 1
                if progress:
                    progress(done, len(jobs_input))
    return results


# --- stages 3-7 -----------------------------------------------------------------

def run_dataset_build(paths: ProjectPaths
                      ) -> tuple[ds_mod.AnalysisDataset, ds_mod.ValidationReport]:
    require(paths.metadata_csv, "ingest", "dataset build")
    require(paths.features_csv, "extract", "dataset build")
    metadata = load_metadata(paths)
    features = load_features(paths)
    engagement = load_engagement(paths) if paths.engagement_csv.exists() else []
    built = ds_mod.build_dataset(metadata, features, engagement)
    report = ds_mod.validate_dataset(built)
    paths.dataset_csv.write_bytes(ds_mod.write_dataset(built))
    return built, report


def load_dataset(paths: ProjectPaths) -> ds_mod.AnalysisDataset:
    return ds_mod.read_dataset(paths.dataset_csv.read_bytes())


def run_eda(paths: ProjectPaths, span: float = DEFAULT_SPAN) -> eda_mod.EDAReport:
    require(paths.dataset_csv, "dataset build", "eda")
    report = eda_mod.eda_report(load_dataset(paths), span=span)
    write_json(paths.eda_json, eda_mod.report_to_dict(report))
    paths.svg_dir.mkdir(exist_ok=True)
    for name, text in svgplot.render_all(report).items():
        (paths.svg_dir / name).write_text(text, encoding="utf-8")
    return report


def run_train(paths: ProjectPaths, cv: int = 0, seed: int = 0) -> dict:
    """Fit, evaluate and persist the model; returns the model.json payload."""
    require(paths.dataset_csv, "dataset build", "train")
    X, y, _ = ds_mod.modeling_view(load_dataset(paths))
    model = model_mod.train_model(X, y)
    vifs = model_mod.vif(model_mod.transform(model.standardizer, X))
    training: dict = {"trained_at": training_timestamp(), "n_rows": int(len(y))}
    if cv:
        cv_metrics = model_mod.cross_validate(X, y, k=cv, seed=seed)
        training["cv"] = {
            "k": cv_metrics.k, "seed": cv_metrics.seed,
            "rmse_mean": cv_metrics.rmse_mean,
            "r_squared_mean": cv_metrics.r_squared_mean,
        }
    payload = model_mod.model_to_dict(model, vifs=vifs, training=training)
    write_json(paths.model_json, payload)
    return payload


def load_model(paths: ProjectPaths
               ) -> tuple[model_mod.RegressionModel, list[float] | None]:
    require(paths.model_json, "train", "insights")
    d = read_json(paths.model_json)
    return model_mod.model_from_dict(d), model_mod.vifs_from_dict(d)


def build_design_report(paths: ProjectPaths) -> insight_mod.DesignReport:
    model, vifs = load_model(paths)
    require(paths.eda_json, "eda", "report")
    eda_report = eda_mod.report_from_dict(read_json(paths.eda_json))
    influences = insight_mod.rank_features(model)
    if vifs is None:
        vifs = [1.0] * len(model.weights)
    return insight_mod.design_feedback(model, influences, vifs, eda_report)


def run_report(paths: ProjectPaths) -> insight_mod.DesignReport:
    report = build_design_report(paths)
    write_json(paths.report_json, insight_mod.report_to_dict(report))
    paths.report_md.write_text(insight_mod.render_markdown(report),
                               encoding="utf-8")
    return report


def run_whatif(paths: ProjectPaths, deltas: dict[str, float],
               baseline: dict[str, float] | None = None
               ) -> insight_mod.WhatIfScenario:
    """What-if on the stored model; baseline defaults to training means."""
    model, _ = load_model(paths)
    names = model.standardizer.feature_names
    for key in list(deltas) + list(baseline or {}):
        if key not in names:
            raise SchemaError(f"unknown feature {key!r}; expected one of {names}")
    base = list(model.standardizer.means)
    if baseline:
        for key, value in baseline.items():
            base[names.index(key)] = value
    delta_vec = [0.0] * len(names)
    for key, value in deltas.items():
        delta_vec[names.index(key)] = value
    return insight_mod.what_if(model, base, delta_vec)
