"""Feature extraction: duration, word count, scene transitions and rates.

The five measured quantities per video are duration in minutes, transcript
word count, speaking speed (wpm), scene-transition count, and scene-change
rate (spm). Scene changes are registered when the mean absolute grayscale
difference between consecutive sampled frames exceeds a threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import BinaryIO, Iterator

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyStreamError,
    EncodingError,
    ZeroDurationError,
)
from .evf import FrameStreamHeader, read_frame_stream

FEATURE_NAMES = ("duration_min", "word_count", "speaking_speed_wpm",
                 "scene_count", "scene_rate_spm")


@dataclass(frozen=True)
class SceneDetectorConfig:
    """Detector knobs; the defaults suit hard cuts in lecture recordings.

    threshold is on the [0, 1] mean-absolute-difference score; min_gap_s
    suppresses double counting during fades (0 disables suppression);
    stride samples every n-th frame.
    """

    threshold: float = 0.12
    min_gap_s: float = 1.0
    stride: int = 1

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"threshold {self.threshold} outside (0, 1]")
        if self.min_gap_s < 0:
            raise ValueError(f"min_gap_s {self.min_gap_s} must be >= 0")
        if self.stride < 1:
            raise ValueError(f"stride {self.stride} must be >= 1")


@dataclass(frozen=True)
class SceneEvent:
    frame_index: int
    diff_score: float
    timestamp_s: float


@dataclass(frozen=True)
class VideoFeatures:
    """The five measured/derived quantities for one video.

    scene_count stores the number of *transitions* (not segments); rates
    are exact quotients of the stored fields.
    """

    video_id: str
    duration_min: float
    word_count: int
    speaking_speed_wpm: float
    scene_count: int
    scene_rate_spm: float

    def __post_init__(self):
        if self.duration_min <= 0:
            raise ValueError(f"duration_min {self.duration_min} must be > 0")
        if self.word_count < 0 or self.scene_count < 0:
            raise ValueError("counts must be non-negative")
        _check_rate("speaking_speed_wpm", self.speaking_speed_wpm,
                    self.word_count, self.duration_min)
        _check_rate("scene_rate_spm", self.scene_rate_spm,
                    self.scene_count, self.duration_min)

    def vector(self) -> list[float]:
        """Feature values in canonical FEATURE_NAMES order."""
        return [self.duration_min, float(self.word_count), self.speaking_speed_wpm,
                float(self.scene_count), self.scene_rate_spm]


def _check_rate(name: str, value: float, count: int, duration_min: float) -> None:
    expected = count / duration_min
    if abs(value - expected) > 1e-9 * max(abs(expected), 1.0):
        raise ValueError(f"{name} {value} != {count}/{duration_min}")


def compute_duration(frame_count: int, fps_num: int, fps_den: int) -> float:
    """Duration in minutes: (frame_count / fps) / 60, correctly rounded."""
    if frame_count == 0:
        raise EmptyStreamError("cannot compute duration of an empty stream")
    return float(Fraction(frame_count * fps_den, fps_num * 60))


def frame_difference(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute pixel difference, normalised to [0, 1]."""
    if a.shape != b.shape:
        raise DimensionMismatchError(f"frame shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a.astype(np.float64) - b.astype(np.float64)))) / 255.0


def detect_scene_transitions(frames: Iterator[np.ndarray], header: FrameStreamHeader,
                             cfg: SceneDetectorConfig = SceneDetectorConfig()
                             ) -> list[SceneEvent]:
    """Scan sampled consecutive frames and register threshold crossings.

    An event fires when diff_score > threshold and at least min_gap_s
    seconds passed since the previous event (the first event is exempt).
    frame_index is the first frame of the new scene.
    """
    events: list[SceneEvent] = []
    period = header.frame_period_s
    prev: np.ndarray | None = None
    saw_any = False
    last_event_t = -math.inf
    for index, frame in enumerate(frames):
        saw_any = True
        if index % cfg.stride != 0:
            continue
        if prev is not None:
            score = frame_difference(prev, frame)
            if score > cfg.threshold:
                t = index * period
                if not events or t - last_event_t >= cfg.min_gap_s:
                    events.append(SceneEvent(frame_index=index, diff_score=score,
                                             timestamp_s=t))
                    last_event_t = t
        prev = frame
    if not saw_any:
        raise EmptyStreamError("stream yielded no frames")
    return events


def count_words(transcript: str | bytes) -> int:
    """Count whitespace-delimited tokens containing at least one letter or digit."""
    if isinstance(transcript, bytes):
        try:
            transcript = transcript.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(f"transcript is not UTF-8: {exc}") from exc
    return sum(1 for token in transcript.split() if any(ch.isalnum() for ch in token))


def derive_rates(duration_min: float, word_count: int,
                 scene_count: int) -> tuple[float, float]:
    """Words per minute and scenes per minute."""
    if duration_min <= 0:
        raise ZeroDurationError(f"duration_min {duration_min} must be > 0")
    return word_count / duration_min, scene_count / duration_min


def extract_features(stream_source: BinaryIO, transcript: str | bytes,
                     cfg: SceneDetectorConfig = SceneDetectorConfig(),
                     video_id: str = "") -> VideoFeatures:
    """Run the full per-video extraction in a single pass over the frames."""
    try:
        header, frames = read_frame_stream(stream_source)
        events = detect_scene_transitions(frames, header, cfg)
        duration_min = compute_duration(header.frame_count, header.fps_num,
                                        header.fps_den)
        word_count = count_words(transcript)
        wpm, spm = derive_rates(duration_min, word_count, len(events))
    except Exception as exc:
        if video_id and exc.args:
            exc.args = (f"video {video_id}: {exc.args[0]}",) + exc.args[1:]
        raise
    return VideoFeatures(video_id=video_id, duration_min=duration_min,
                         word_count=word_count, speaking_speed_wpm=wpm,
                         scene_count=len(events), scene_rate_spm=spm)
