"""HTTP JSON API over the project store.

Projects live as directories under the data dir; every endpoint is a thin
wrapper over the same stage runners the CLI uses, so both paths produce
identical artefacts. Extraction runs as a background job on a bounded
worker pool; everything else computes synchronously. State lives in files,
never in memory, so a restarted process serves the same responses.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, File, Form, UploadFile
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import eda as eda_mod
from . import insight as insight_mod
from .errors import (
    AuthError,
    EduvidError,
    NotFoundError,
    SchemaError,
    StageOrderViolation,
)
from .dataset import validate_dataset
from .evf import MAGIC, decode_to_stream
from .extract import SceneDetectorConfig
from .ingest import HttpTransport, fetch_video_metadata, import_engagement
from .project import (
    DEFAULT_SPAN,
    ProjectPaths,
    build_design_report,
    extract_videos,
    load_dataset,
    load_model,
    metadata_from_row,
    read_json,
    require,
    run_dataset_build,
    run_eda,
    run_report,
    run_train,
    run_whatif,
    save_engagement,
    save_metadata,
    upsert_features,
    write_json,
)

API_KEY_ENV = "EDUVID_API_KEY"
EXTRACT_WORKERS = 2


class CreateProjectIn(BaseModel):
    name: str = Field(min_length=1)


class VideoMetadataIn(BaseModel):
    video_id: str = Field(min_length=1)
    institution_name: str
    speaker_name: str
    course_code: str
    course_name: str
    unit_level: str
    year: int
    video_type: str
    subject_area: str
    video_url: str = ""
    title: str = ""
    published_at: str = ""
    channel_name: str = ""
    channel_id: str = ""


class MetadataIn(BaseModel):
    videos: list[VideoMetadataIn]
    fetch: bool = False


class DetectorConfigIn(BaseModel):
    threshold: float = 0.12
    min_gap_s: float = 1.0
    stride: int = 1


class ExtractIn(BaseModel):
    videos: list[str] | None = None
    config: DetectorConfigIn = DetectorConfigIn()


class TrainIn(BaseModel):
    cv: int = 0
    seed: int = 0


class WhatIfIn(BaseModel):
    baseline: dict[str, float] | None = None
    deltas: dict[str, float]


@dataclass
class ProjectStore:
    """File-backed project registry; one directory per project."""

    data_dir: Path

    def __post_init__(self):
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.jobs_dir.mkdir(exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    @property
    def jobs_dir(self) -> Path:
        return self.data_dir / "jobs"

    def lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    def create(self, name: str) -> dict:
        project_id = uuid.uuid4().hex[:12]
        record = {
            "project_id": project_id,
            "name": name,
            "created_at": datetime.now(tz=timezone.utc)
                                  .replace(microsecond=0).isoformat(),
        }
        paths = self.paths(project_id)
        paths.ensure()
        write_json(paths.root / "project.json", record)
        return record

    def paths(self, project_id: str) -> ProjectPaths:
        return ProjectPaths(self.data_dir / project_id)

    def get(self, project_id: str) -> dict:
        record_path = self.data_dir / project_id / "project.json"
        if not record_path.exists():
            raise NotFoundError(f"unknown project {project_id!r}")
        return read_json(record_path)

    def list(self) -> list[dict]:
        records = []
        for record_path in sorted(self.data_dir.glob("*/project.json")):
            records.append(read_json(record_path))
        return records

    def stage_status(self, project_id: str) -> dict[str, bool]:
        paths = self.paths(project_id)
        return {
            "metadata": paths.metadata_csv.exists(),
            "engagement": paths.engagement_csv.exists(),
            "features": paths.features_csv.exists(),
            "dataset": paths.dataset_csv.exists(),
            "eda": paths.eda_json.exists(),
            "model": paths.model_json.exists(),
            "report": paths.report_json.exists(),
        }


class JobManager:
    """Persisted job records plus a bounded executor for extraction."""

    def __init__(self, store: ProjectStore, workers: int = EXTRACT_WORKERS):
        self.store = store
        self.pool = ThreadPoolExecutor(max_workers=workers)
        self._write_lock = threading.Lock()

    def submit_extract(self, project_id: str,
                       items: list[tuple[str, Path, Path]],
                       cfg: SceneDetectorConfig) -> dict:
        job_id = uuid.uuid4().hex[:12]
        record = {"job_id": job_id, "project_id": project_id, "kind": "extract",
                  "state": "queued", "progress": 0.0, "error": None}
        self._save(record)
        self.pool.submit(self._run_extract, dict(record), items, cfg)
        return record

    def _run_extract(self, record: dict, items: list[tuple[str, Path, Path]],
                     cfg: SceneDetectorConfig) -> None:
        record["state"] = "running"
        self._save(record)
        paths = self.store.paths(record["project_id"])

        def progress(done: int, total: int) -> None:
            record["progress"] = done / total if total else 1.0
            self._save(record)

        try:
            features = extract_videos(items, cfg, workers=EXTRACT_WORKERS,
                                      progress=progress)
            with self.store.lock(record["project_id"]):
                upsert_features(paths, features)
        except Exception as exc:  # job errors surface via the record
            record["state"] = "failed"
            record["error"] = f"{type(exc).__name__}: {exc}"
            self._save(record)
            return
        record["state"] = "done"
        record["progress"] = 1.0
        self._save(record)

    def get(self, job_id: str) -> dict:
        path = self.store.jobs_dir / f"{job_id}.json"
        if not path.exists():
            raise NotFoundError(f"unknown job {job_id!r}")
        return read_json(path)

    def _save(self, record: dict) -> None:
        path = self.store.jobs_dir / f"{record['job_id']}.json"
        tmp = path.with_suffix(".tmp")
        with self._write_lock:
            tmp.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
            os.replace(tmp, path)


def _error_payload(exc: Exception, **extra) -> dict:
    return {"error": {"type": type(exc).__name__, "message": str(exc), **extra}}


def create_app(data_dir: Path, decoder_cmd: str | None = None,
               ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="eduvid", version="0.1.0")
    store = ProjectStore(Path(data_dir))
    jobs = JobManager(store)
    app.state.store = store
    app.state.jobs = jobs
    app.state.decoder_cmd = decoder_cmd

    @app.exception_handler(NotFoundError)
    async def not_found(_, exc: NotFoundError):
        return JSONResponse(status_code=404, content=_error_payload(exc))

    @app.exception_handler(StageOrderViolation)
    async def stage_order(_, exc: StageOrderViolation):
        return JSONResponse(status_code=409, content=_error_payload(exc))

    @app.exception_handler(EduvidError)
    async def domain_error(_, exc: EduvidError):
        extra = {"row": exc.row} if hasattr(exc, "row") else {}
        return JSONResponse(status_code=422, content=_error_payload(exc, **extra))

    @app.post("/projects")
    def create_project(body: CreateProjectIn):
        return store.create(body.name)

    @app.get("/projects")
    def list_projects():
        return store.list()

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        record = store.get(project_id)
        return {**record, "stages": store.stage_status(project_id)}

    @app.post("/projects/{project_id}/metadata")
    def post_metadata(project_id: str, body: MetadataIn):
        store.get(project_id)
        paths = store.paths(project_id)
        transport = key = None
        if body.fetch:
            key = os.environ.get(API_KEY_ENV, "")
            if not key:
                raise AuthError(f"remote fetch requires ${API_KEY_ENV}")
            transport = HttpTransport()
        metadata = []
        for video in body.videos:
            row = video.model_dump()
            row["year"] = str(row["year"])
            remote = None
            if transport is not None:
                remote = fetch_video_metadata(video.video_id, key, transport)
            metadata.append(metadata_from_row(row, remote))
        with store.lock(project_id):
            save_metadata(paths, metadata)
        return {"videos": len(metadata)}

    @app.post("/projects/{project_id}/engagement")
    def post_engagement(project_id: str, file: UploadFile = File(...)):
        store.get(project_id)
        records = import_engagement(file.file.read())
        with store.lock(project_id):
            save_engagement(store.paths(project_id), records)
        return {"engagement_records": len(records)}

    @app.post("/projects/{project_id}/videos")
    def post_video(project_id: str, video_id: str = Form(...),
                   frames: UploadFile = File(...),
                   transcript: UploadFile = File(...)):
        store.get(project_id)
        if "/" in video_id or "\\" in video_id or video_id.startswith("."):
            raise SchemaError(f"invalid video_id {video_id!r}")
        paths = store.paths(project_id)
        payload = frames.file.read()
        with store.lock(project_id):
            paths.videos_dir.mkdir(exist_ok=True)
            paths.transcripts_dir.mkdir(exist_ok=True)
            target = paths.videos_dir / f"{video_id}.evf"
            if payload.startswith(MAGIC):
                target.write_bytes(payload)
            elif decoder_cmd:
                # non-EVF upload: run the configured external decoder
                raw = paths.videos_dir / f"{video_id}.src"
                raw.write_bytes(payload)
                try:
                    decode_to_stream(str(raw), str(target), decoder_cmd)
                finally:
                    raw.unlink(missing_ok=True)
            else:
                raise SchemaError(
                    "upload is not an EVF1 stream and no decoder command is"
                    " configured (--decoder-cmd)")
            (paths.transcripts_dir / f"{video_id}.txt").write_bytes(
                transcript.file.read())
        return {"video_id": video_id}

    @app.post("/projects/{project_id}/extract")
    def post_extract(project_id: str, body: ExtractIn):
        store.get(project_id)
        paths = store.paths(project_id)
        if body.videos is not None:
            ids = body.videos
        else:
            ids = sorted(p.stem for p in paths.videos_dir.glob("*.evf")) \
                if paths.videos_dir.exists() else []
        if not ids:
            raise StageOrderViolation("extract needs uploaded videos;"
                                      " POST videos first")
        items = []
        for vid in ids:
            frames_path = paths.videos_dir / f"{vid}.evf"
            transcript_path = paths.transcripts_dir / f"{vid}.txt"
            if not frames_path.exists() or not transcript_path.exists():
                raise NotFoundError(f"no uploaded frames/transcript for {vid!r}")
            items.append((vid, frames_path, transcript_path))
        cfg = SceneDetectorConfig(threshold=body.config.threshold,
                                  min_gap_s=body.config.min_gap_s,
                                  stride=body.config.stride)
        return jobs.submit_extract(project_id, items, cfg)

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        return jobs.get(job_id)

    @app.post("/projects/{project_id}/dataset/build")
    def post_dataset_build(project_id: str):
        store.get(project_id)
        with store.lock(project_id):
            _, report = run_dataset_build(store.paths(project_id))
        return {
            "total_rows": report.total_rows,
            "complete_rows": report.complete_rows,
            "issues": [{"video_id": i.video_id, "field": i.field,
                        "kind": i.kind, "message": i.message}
                       for i in report.issues],
        }

    @app.get("/projects/{project_id}/dataset")
    def get_dataset(project_id: str):
        store.get(project_id)
        paths = store.paths(project_id)
        require(paths.dataset_csv, "dataset build", "dataset view")
        ds = load_dataset(paths)
        report = validate_dataset(ds)
        rows = []
        for row in ds.rows:
            cells: dict = {"dataset_tag": row.dataset_tag.value,
                           "video_id": row.video_id,
                           "complete": row.complete}
            features = row.features.vector() if row.features else None
            for j, name in enumerate(ds.feature_names):
                cells[name] = features[j] if features else None
            cells[ds.target_name] = (row.engagement.average_percentage_viewed
                                     if row.engagement else None)
            rows.append(cells)
        return {
            "feature_names": list(ds.feature_names),
            "target_name": ds.target_name,
            "rows": rows,
            "validation": {
                "total_rows": report.total_rows,
                "complete_rows": report.complete_rows,
                "issues": [{"video_id": i.video_id, "field": i.field,
                            "kind": i.kind, "message": i.message}
                           for i in report.issues],
            },
        }

    @app.get("/projects/{project_id}/eda")
    def get_eda(project_id: str, span: float = DEFAULT_SPAN):
        # recomputes (and re-persists, byte-identically) from dataset.csv;
        # the response is a pure function of the stored project state
        store.get(project_id)
        with store.lock(project_id):
            report = run_eda(store.paths(project_id), span=span)
        return eda_mod.report_to_dict(report)

    @app.post("/projects/{project_id}/model/train")
    def post_train(project_id: str, body: TrainIn = TrainIn()):
        store.get(project_id)
        with store.lock(project_id):
            return run_train(store.paths(project_id), cv=body.cv, seed=body.seed)

    @app.get("/projects/{project_id}/insights")
    def get_insights(project_id: str):
        store.get(project_id)
        report = build_design_report(store.paths(project_id))
        return insight_mod.report_to_dict(report)

    @app.post("/projects/{project_id}/report")
    def post_report(project_id: str):
        store.get(project_id)
        with store.lock(project_id):
            report = run_report(store.paths(project_id))
        return insight_mod.report_to_dict(report)

    @app.post("/projects/{project_id}/whatif")
    def post_whatif(project_id: str, body: WhatIfIn):
        store.get(project_id)
        scenario = run_whatif(store.paths(project_id), body.deltas, body.baseline)
        return insight_mod.scenario_to_dict(scenario)

    @app.get("/projects/{project_id}/model")
    def get_model(project_id: str):
        store.get(project_id)
        paths = store.paths(project_id)
        load_model(paths)  # 409 via StageOrderViolation when missing
        return read_json(paths.model_json)

    if ui_dir is not None and Path(ui_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
