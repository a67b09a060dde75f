"""EVF1 raw grayscale frame-stream container.

Layout (bit-exact): magic bytes ``EVF1``; little-endian u32 width, u32
height, u32 fps_num, u32 fps_den, u64 frame_count; then frame_count frames
of width*height bytes, 8-bit grayscale, row-major. The container decouples
feature extraction from media codecs: a decoder adapter shells out to a
user-configured command to produce it from real video files.
"""

from __future__ import annotations

import shlex
import struct
import subprocess
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .errors import BadMagicError, DecoderError, HeaderError, TruncatedStreamError

MAGIC = b"EVF1"
_HEADER = struct.Struct("<4sIIIIQ")


@dataclass(frozen=True)
class FrameStreamHeader:
    width: int
    height: int
    fps_num: int
    fps_den: int
    frame_count: int

    @property
    def frame_bytes(self) -> int:
        return self.width * self.height

    @property
    def frame_period_s(self) -> float:
        return self.fps_den / self.fps_num


def read_frame_stream(source: BinaryIO) -> tuple[FrameStreamHeader, Iterator[np.ndarray]]:
    """Parse the header and return it with a streaming frame iterator.

    Frames come out as (height, width) uint8 arrays, one read per frame, so
    memory stays constant in frame_count.
    """
    raw = source.read(_HEADER.size)
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagicError(f"expected magic {MAGIC!r}, got {raw[:4]!r}")
    if len(raw) < _HEADER.size:
        raise TruncatedStreamError("stream ends inside the header")
    _, width, height, fps_num, fps_den, frame_count = _HEADER.unpack(raw)
    if width == 0 or height == 0:
        raise HeaderError(f"zero frame dimension ({width}x{height})")
    if fps_num == 0 or fps_den == 0:
        raise HeaderError(f"zero frame-rate component ({fps_num}/{fps_den})")
    header = FrameStreamHeader(width, height, fps_num, fps_den, frame_count)
    return header, _iter_frames(source, header)


def _iter_frames(source: BinaryIO, header: FrameStreamHeader) -> Iterator[np.ndarray]:
    size = header.frame_bytes
    for index in range(header.frame_count):
        chunk = source.read(size)
        if len(chunk) < size:
            raise TruncatedStreamError(
                f"stream ends inside frame {index} ({len(chunk)}/{size} bytes)")
        yield np.frombuffer(chunk, dtype=np.uint8).reshape(header.height, header.width)


def write_frame_stream(dest: BinaryIO, header: FrameStreamHeader,
                       frames: Iterable[np.ndarray]) -> None:
    """Serialize frames into the container; used by tests and the corpus builder."""
    dest.write(_HEADER.pack(MAGIC, header.width, header.height,
                            header.fps_num, header.fps_den, header.frame_count))
    written = 0
    for frame in frames:
        data = np.ascontiguousarray(frame, dtype=np.uint8).tobytes()
        if len(data) != header.frame_bytes:
            raise ValueError(f"frame {written} holds {len(data)} bytes,"
                             f" expected {header.frame_bytes}")
        dest.write(data)
        written += 1
    if written != header.frame_count:
        raise ValueError(f"wrote {written} frames, header declares {header.frame_count}")


def decode_to_stream(input_path: str, output_path: str,
                     command_template: str) -> FrameStreamHeader:
    """Run the configured external decoder and validate its EVF1 output.

    The template must contain {input} and {output} placeholders, e.g.
    ``mydecoder --gray {input} {output}``.
    """
    if "{input}" not in command_template or "{output}" not in command_template:
        raise DecoderError("decoder command template needs {input} and {output}")
    argv = [part.format(input=input_path, output=output_path)
            for part in shlex.split(command_template)]
    try:
        result = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise DecoderError(f"cannot run decoder {argv[0]!r}: {exc}") from exc
    if result.returncode != 0:
        raise DecoderError(
            f"decoder exited {result.returncode}: {result.stderr.strip()[:500]}")
    try:
        with open(output_path, "rb") as fh:
            header, _ = read_frame_stream(fh)
    except OSError as exc:
        raise DecoderError(f"decoder produced no readable output: {exc}") from exc
    except (BadMagicError, TruncatedStreamError, HeaderError) as exc:
        raise DecoderError(f"decoder output is not valid EVF1: {exc}") from exc
    return header
