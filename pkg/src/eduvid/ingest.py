"""Stage 2 data collection: video metadata, dataset tags, engagement import.

Remote metadata comes from the hosting platform's ``videos`` endpoint through
an injected transport, manual metadata from the operator, and engagement
metrics from a CSV exported off the platform's analytics dashboard (automated
retrieval is out of scope). A deterministic dataset tag derived from the
manual fields groups videos into cohorts.
"""

from __future__ import annotations

import csv
import io
import math
import re
import unicodedata
from dataclasses import dataclass
from typing import Protocol

from .errors import (
    AuthError,
    CsvRowError,
    EmptyComponentError,
    EncodingError,
    NotFoundError,
    SchemaError,
    TransportError,
)

VIDEO_TYPES = ("Lecture", "Workshop", "LabDemo", "Other")

TAG_PATTERN = re.compile(r"^[a-z0-9]+(_[a-z0-9]+)*$")

# Platform "videos" endpoint. JSON path mapping used by fetch_video_metadata:
#   items[0].id                      -> video_id
#   items[0].snippet.title           -> title
#   items[0].snippet.publishedAt     -> published_at (ISO-8601 UTC)
#   items[0].snippet.channelTitle    -> channel_name
#   items[0].snippet.channelId       -> channel_id
VIDEOS_ENDPOINT = "https://www.googleapis.com/youtube/v3/videos"
WATCH_URL = "https://www.youtube.com/watch?v={video_id}"


@dataclass(frozen=True)
class RemoteMetadata:
    """Platform-provided identity of one video."""

    video_id: str
    url: str
    title: str = ""
    published_at: str = ""
    channel_name: str = ""
    channel_id: str = ""

    def __post_init__(self):
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if self.video_id not in self.url:
            raise ValueError(f"url {self.url!r} does not contain video_id {self.video_id!r}")


@dataclass(frozen=True)
class ManualMetadata:
    """Operator-entered context for one video."""

    institution_name: str
    speaker_name: str
    course_code: str
    course_name: str
    unit_level: str
    year: int
    video_type: str
    subject_area: str

    def __post_init__(self):
        for field in ("institution_name", "speaker_name", "course_code",
                      "course_name", "unit_level", "video_type", "subject_area"):
            if not getattr(self, field):
                raise ValueError(f"{field} must be non-empty")
        if not 1990 <= self.year <= 2100:
            raise ValueError(f"year {self.year} outside [1990, 2100]")
        if self.video_type not in VIDEO_TYPES:
            raise ValueError(f"video_type must be one of {VIDEO_TYPES}, got {self.video_type!r}")


@dataclass(frozen=True)
class DatasetTag:
    """Deterministic lowercase-underscore cohort identifier."""

    value: str

    def __post_init__(self):
        if not TAG_PATTERN.match(self.value):
            raise ValueError(f"malformed dataset tag {self.value!r}")


@dataclass(frozen=True)
class VideoMetadata:
    dataset_tag: DatasetTag
    remote: RemoteMetadata
    manual: ManualMetadata

    @property
    def video_id(self) -> str:
        return self.remote.video_id


@dataclass(frozen=True)
class EngagementRecord:
    """Engagement metrics for one video; percentage viewed is the target.

    The [0, 100] bound is enforced where records enter the system
    (import_engagement) and re-checked by dataset validation, so a record
    read from a hand-edited file can still be represented and reported.
    """

    video_id: str
    average_percentage_viewed: float
    views: int | None = None
    likes: int | None = None
    dislikes: int | None = None


_ASCII_ALNUM = frozenset("abcdefghijklmnopqrstuvwxyz0123456789")


def _normalize_component(text: str) -> str:
    """Lowercase and drop every character that is not a letter or digit.

    Case folding plus compatibility decomposition first, so accented and
    compatibility characters reduce to their ASCII equivalents (É -> e,
    superscript 2 -> 2) instead of being dropped wholesale.
    """
    folded = unicodedata.normalize("NFKD", text.casefold()).casefold()
    return "".join(ch for ch in folded if ch in _ASCII_ALNUM)


def make_dataset_tag(manual: ManualMetadata) -> DatasetTag:
    """Build the cohort tag: institution_course_type_level_speaker_year.

    Component order is the canonical schema; each component is lowercased
    with non-alphanumerics stripped, so the result is case-insensitive in
    its inputs.
    """
    components = [
        ("institution_name", manual.institution_name),
        ("course_code", manual.course_code),
        ("video_type", manual.video_type),
        ("unit_level", manual.unit_level),
        ("speaker_name", manual.speaker_name),
        ("year", str(manual.year)),
    ]
    parts = []
    for name, raw in components:
        norm = _normalize_component(raw)
        if not norm:
            raise EmptyComponentError(f"{name} {raw!r} normalises to the empty string")
        parts.append(norm)
    return DatasetTag("_".join(parts))


def build_video_metadata(remote: RemoteMetadata, manual: ManualMetadata) -> VideoMetadata:
    return VideoMetadata(dataset_tag=make_dataset_tag(manual), remote=remote, manual=manual)


def find_tag_collisions(metadata: list[VideoMetadata]) -> list[str]:
    """Tags produced by more than one distinct manual-field combination.

    Sharing a tag across videos of one cohort is normal; two different
    cohorts normalising to the same tag is worth a warning.
    """
    seen: dict[str, set[ManualMetadata]] = {}
    for m in metadata:
        seen.setdefault(m.dataset_tag.value, set()).add(m.manual)
    return sorted(tag for tag, manuals in seen.items() if len(manuals) > 1)


# --- remote fetch -----------------------------------------------------------

class Transport(Protocol):
    """Injected remote-fetch capability; returns (status_code, parsed JSON)."""

    def get(self, url: str, params: dict[str, str]) -> tuple[int, dict]: ...


class HttpTransport:
    """Live HTTP transport; exercised only in opt-in integration tests."""

    def __init__(self, timeout: float = 10.0):
        import requests  # deferred so offline use never touches it

        self._requests = requests
        self.timeout = timeout

    def get(self, url: str, params: dict[str, str]) -> tuple[int, dict]:
        try:
            resp = self._requests.get(url, params=params, timeout=self.timeout)
        except self._requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        try:
            payload = resp.json()
        except ValueError as exc:
            raise TransportError(f"non-JSON response (status {resp.status_code})") from exc
        return resp.status_code, payload


def fetch_video_metadata(video_id: str, api_credential: str,
                         transport: Transport) -> RemoteMetadata:
    """Fetch one video's platform metadata through the injected transport."""
    if not video_id:
        raise ValueError("video_id must be non-empty")
    if not api_credential:
        raise AuthError("api_credential must be non-empty")

    params = {"part": "snippet", "id": video_id, "key": api_credential}
    status, payload = transport.get(VIDEOS_ENDPOINT, params)

    if status in (400, 401, 403):
        reason = _api_error_reason(payload)
        raise AuthError(f"credential rejected (status {status}{reason})")
    if status != 200:
        raise TransportError(f"unexpected status {status}")

    items = payload.get("items") or []
    if not items:
        raise NotFoundError(f"no video found for id {video_id!r}")

    snippet = items[0].get("snippet") or {}
    return RemoteMetadata(
        video_id=items[0].get("id", video_id),
        url=WATCH_URL.format(video_id=items[0].get("id", video_id)),
        title=snippet.get("title", ""),
        published_at=snippet.get("publishedAt", ""),
        channel_name=snippet.get("channelTitle", ""),
        channel_id=snippet.get("channelId", ""),
    )


def _api_error_reason(payload: dict) -> str:
    message = payload.get("error", {}).get("message") if isinstance(payload, dict) else None
    return f": {message}" if message else ""


# --- engagement CSV ----------------------------------------------------------

_MANDATORY = ("video_id", "average_percentage_viewed")
_OPTIONAL_COUNTS = ("views", "likes", "dislikes")


def _normalize_header(name: str) -> str:
    """Map human labels onto canonical column names.

    Lowercases and collapses runs of non-alphanumerics to single
    underscores, so "Average percentage viewed (%)" matches
    average_percentage_viewed.
    """
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def import_engagement(csv_bytes: bytes) -> list[EngagementRecord]:
    """Parse an analytics-dashboard CSV export into engagement records.

    Rows are preserved in file order; unknown columns are ignored.
    """
    try:
        text = csv_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"engagement CSV is not UTF-8: {exc}") from exc

    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("engagement CSV is empty") from None

    columns = {_normalize_header(h): i for i, h in enumerate(header)}
    for name in _MANDATORY:
        if name not in columns:
            raise SchemaError(f"engagement CSV missing mandatory column {name!r}")

    records = []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        video_id = _cell(row, columns["video_id"])
        if not video_id:
            raise CsvRowError(row_no, "empty video_id")
        pct = _parse_float(_cell(row, columns["average_percentage_viewed"]),
                           "average_percentage_viewed", row_no)
        if not 0.0 <= pct <= 100.0:
            raise CsvRowError(row_no, f"average_percentage_viewed {pct} outside [0, 100]")
        counts = {}
        for name in _OPTIONAL_COUNTS:
            if name in columns:
                raw = _cell(row, columns[name])
                counts[name] = _parse_count(raw, name, row_no) if raw else None
            else:
                counts[name] = None
        records.append(EngagementRecord(video_id=video_id,
                                        average_percentage_viewed=pct, **counts))
    return records


def serialize_engagement(records: list[EngagementRecord]) -> bytes:
    """Write records back to the canonical engagement CSV layout."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(list(_MANDATORY) + list(_OPTIONAL_COUNTS))
    for rec in records:
        writer.writerow([
            rec.video_id,
            repr(rec.average_percentage_viewed),
            "" if rec.views is None else rec.views,
            "" if rec.likes is None else rec.likes,
            "" if rec.dislikes is None else rec.dislikes,
        ])
    return out.getvalue().encode("utf-8")


def _cell(row: list[str], index: int) -> str:
    return row[index].strip() if index < len(row) else ""


def _parse_float(raw: str, name: str, row_no: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise CsvRowError(row_no, f"non-numeric {name} {raw!r}") from None
    if not math.isfinite(value):
        raise CsvRowError(row_no, f"non-finite {name} {raw!r}")
    return value


def _parse_count(raw: str, name: str, row_no: int) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise CsvRowError(row_no, f"non-integer {name} {raw!r}") from None
    if value < 0:
        raise CsvRowError(row_no, f"negative {name} {raw!r}")
    return value
