"""Stage 3: join metadata, features and engagement into one analysis table.

The join is keyed by video_id, row order follows the metadata input, and
incomplete rows are kept (visible to EDA, excluded from modelling). The
table persists as a fixed-column CSV whose numeric cells use shortest
round-trip formatting, so files are byte-stable across runs.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import CsvRowError, DuplicateKeyError, SchemaError
from .extract import FEATURE_NAMES, VideoFeatures
from .ingest import (
    DatasetTag,
    EngagementRecord,
    ManualMetadata,
    RemoteMetadata,
    TAG_PATTERN,
    VideoMetadata,
    make_dataset_tag,
)

TARGET_NAME = "average_percentage_viewed"

DATASET_COLUMNS = (
    "dataset_tag", "video_id", "institution_name", "speaker_name",
    "course_code", "course_name", "unit_level", "year", "video_type",
    "subject_area", "video_url",
) + FEATURE_NAMES + (TARGET_NAME,)


@dataclass(frozen=True)
class DatasetRow:
    dataset_tag: DatasetTag
    video_id: str
    metadata: VideoMetadata
    features: VideoFeatures | None
    engagement: EngagementRecord | None

    @property
    def complete(self) -> bool:
        return (self.engagement is not None
                and self.features is not None
                and all(math.isfinite(v) for v in self.features.vector()))


@dataclass(frozen=True)
class AnalysisDataset:
    rows: tuple[DatasetRow, ...]
    feature_names: tuple[str, ...] = FEATURE_NAMES
    target_name: str = TARGET_NAME

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            if row.video_id in seen:
                raise DuplicateKeyError(f"duplicate video_id {row.video_id!r}")
            seen.add(row.video_id)

    @property
    def complete_rows(self) -> tuple[DatasetRow, ...]:
        return tuple(r for r in self.rows if r.complete)


@dataclass(frozen=True)
class ValidationIssue:
    video_id: str
    field: str
    kind: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    total_rows: int
    complete_rows: int
    issues: tuple[ValidationIssue, ...]


def _key_by_video_id(items, source: str) -> dict:
    table = {}
    for item in items:
        if item.video_id in table:
            raise DuplicateKeyError(
                f"duplicate video_id {item.video_id!r} in {source}")
        table[item.video_id] = item
    return table


def build_dataset(metadata: list[VideoMetadata], features: list[VideoFeatures],
                  engagement: list[EngagementRecord]) -> AnalysisDataset:
    """Left-join the three sources on video_id, in metadata order."""
    _key_by_video_id(metadata, "metadata")
    feature_map = _key_by_video_id(features, "features")
    engagement_map = _key_by_video_id(engagement, "engagement")
    rows = tuple(
        DatasetRow(
            dataset_tag=m.dataset_tag,
            video_id=m.video_id,
            metadata=m,
            features=feature_map.get(m.video_id),
            engagement=engagement_map.get(m.video_id),
        )
        for m in metadata
    )
    return AnalysisDataset(rows=rows)


def validate_dataset(ds: AnalysisDataset) -> ValidationReport:
    """Report missing fields, range violations and tag inconsistencies.

    Report-only: the dataset is never mutated. Tag mismatches against a
    recompute from the manual fields are the one inconsistency callers are
    expected to auto-correct (by rebuilding the dataset).
    """
    issues: list[ValidationIssue] = []
    tag_sources: dict[str, set[ManualMetadata]] = {}
    for row in ds.rows:
        vid = row.video_id
        if row.features is None:
            issues.append(ValidationIssue(vid, "features", "missing",
                                          "no extracted features for this video"))
        else:
            for name, value in zip(ds.feature_names, row.features.vector()):
                if not math.isfinite(value):
                    issues.append(ValidationIssue(vid, name, "non_finite",
                                                  f"{name} is {value}"))
        if row.engagement is None:
            issues.append(ValidationIssue(vid, ds.target_name, "missing",
                                          "no engagement record for this video"))
        else:
            pct = row.engagement.average_percentage_viewed
            if not 0.0 <= pct <= 100.0:
                issues.append(ValidationIssue(vid, ds.target_name, "range",
                                              f"{pct} outside [0, 100]"))
        if not TAG_PATTERN.match(row.dataset_tag.value):
            issues.append(ValidationIssue(vid, "dataset_tag", "pattern",
                                          f"malformed tag {row.dataset_tag.value!r}"))
        expected = make_dataset_tag(row.metadata.manual)
        if expected != row.dataset_tag:
            issues.append(ValidationIssue(vid, "dataset_tag", "mismatch",
                                          f"tag {row.dataset_tag.value!r} != recomputed"
                                          f" {expected.value!r}"))
        tag_sources.setdefault(row.dataset_tag.value, set()).add(row.metadata.manual)
    for tag in sorted(tag_sources):
        if len(tag_sources[tag]) > 1:
            issues.append(ValidationIssue("", "dataset_tag", "collision",
                                          f"tag {tag!r} produced by"
                                          f" {len(tag_sources[tag])} distinct cohorts"))
    return ValidationReport(total_rows=len(ds.rows),
                            complete_rows=len(ds.complete_rows),
                            issues=tuple(issues))


def modeling_view(ds: AnalysisDataset) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Feature matrix, target vector and ids for the complete rows only."""
    rows = ds.complete_rows
    X = np.array([r.features.vector() for r in rows], dtype=np.float64)
    y = np.array([r.engagement.average_percentage_viewed for r in rows],
                 dtype=np.float64)
    if X.size and not np.all(np.isfinite(X)):
        raise AssertionError("modeling view holds non-finite features")
    return X, y, [r.video_id for r in rows]


# --- persistence -------------------------------------------------------------

def _fmt(value: float | int) -> str:
    """Shortest decimal representation that round-trips exactly."""
    if isinstance(value, int):
        return str(value)
    return repr(value)


def write_dataset(ds: AnalysisDataset) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DATASET_COLUMNS)
    for row in ds.rows:
        manual = row.metadata.manual
        cells = [
            row.dataset_tag.value, row.video_id,
            manual.institution_name, manual.speaker_name, manual.course_code,
            manual.course_name, manual.unit_level, str(manual.year),
            manual.video_type, manual.subject_area, row.metadata.remote.url,
        ]
        if row.features is None:
            cells += [""] * len(FEATURE_NAMES)
        else:
            f = row.features
            cells += [_fmt(f.duration_min), _fmt(f.word_count),
                      _fmt(f.speaking_speed_wpm), _fmt(f.scene_count),
                      _fmt(f.scene_rate_spm)]
        cells.append("" if row.engagement is None
                     else _fmt(row.engagement.average_percentage_viewed))
        writer.writerow(cells)
    return out.getvalue().encode("utf-8")


def read_dataset(data: bytes) -> AnalysisDataset:
    """Inverse of write_dataset.

    Only the columns above are persisted: remote display fields (title,
    channel, publication date) and the optional engagement counts live in
    the stage-2 files, so they come back at their defaults.
    """
    reader = csv.reader(io.StringIO(data.decode("utf-8"), newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("dataset CSV is empty") from None
    if tuple(header) != DATASET_COLUMNS:
        missing = set(DATASET_COLUMNS) - set(header)
        detail = f"missing columns {sorted(missing)}" if missing else f"got {header}"
        raise SchemaError(f"dataset CSV header mismatch: {detail}")

    rows = []
    for row_no, cells in enumerate(reader, start=1):
        if not cells or all(c == "" for c in cells):
            continue
        if len(cells) != len(DATASET_COLUMNS):
            raise CsvRowError(row_no, f"expected {len(DATASET_COLUMNS)} cells,"
                                      f" got {len(cells)}")
        rec = dict(zip(DATASET_COLUMNS, cells))
        try:
            rows.append(_row_from_cells(rec))
        except (ValueError, TypeError) as exc:
            raise CsvRowError(row_no, str(exc)) from None
    return AnalysisDataset(rows=tuple(rows))


def _row_from_cells(rec: dict[str, str]) -> DatasetRow:
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
    remote = RemoteMetadata(video_id=rec["video_id"], url=rec["video_url"])
    metadata = VideoMetadata(dataset_tag=DatasetTag(rec["dataset_tag"]),
                             remote=remote, manual=manual)

    feature_cells = [rec[name] for name in FEATURE_NAMES]
    if all(c == "" for c in feature_cells):
        features = None
    elif any(c == "" for c in feature_cells):
        raise ValueError("partially filled feature cells")
    else:
        features = VideoFeatures(
            video_id=rec["video_id"],
            duration_min=float(rec["duration_min"]),
            word_count=int(rec["word_count"]),
            speaking_speed_wpm=float(rec["speaking_speed_wpm"]),
            scene_count=int(rec["scene_count"]),
            scene_rate_spm=float(rec["scene_rate_spm"]),
        )

    engagement = None
    if rec[TARGET_NAME] != "":
        engagement = EngagementRecord(video_id=rec["video_id"],
                                      average_percentage_viewed=float(rec[TARGET_NAME]))
    return DatasetRow(dataset_tag=metadata.dataset_tag, video_id=rec["video_id"],
                      metadata=metadata, features=features, engagement=engagement)
