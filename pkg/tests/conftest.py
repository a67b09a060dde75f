from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import pytest

from eduvid.evf import FrameStreamHeader, write_frame_stream

DATA_DIR = Path(__file__).parent / "data"
CORPUS_DIR = DATA_DIR / "corpus"
GOLDEN_DIR = DATA_DIR / "golden"


def make_stream_bytes(frames: list[np.ndarray], fps_num: int = 25,
                      fps_den: int = 1) -> bytes:
    """Serialize uint8 frames into EVF1 bytes."""
    height, width = frames[0].shape
    header = FrameStreamHeader(width=width, height=height, fps_num=fps_num,
                               fps_den=fps_den, frame_count=len(frames))
    buf = io.BytesIO()
    write_frame_stream(buf, header, frames)
    return buf.getvalue()


def solid_frames(values: list[int], width: int = 4, height: int = 4
                 ) -> list[np.ndarray]:
    """One constant-gray frame per value."""
    return [np.full((height, width), v, dtype=np.uint8) for v in values]


@pytest.fixture
def rng() -> np.random.RandomState:
    return np.random.RandomState(20260810)
