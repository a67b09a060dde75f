#!/usr/bin/env python3
"""Regenerate the bundled 12-video synthetic corpus and its golden outputs.

The corpus plants a known engagement relation (y = 90 - 4 * duration_min
+ Gaussian noise, fixed seed) over streams with exact frame counts, word
counts and hard cuts, then drives the full CLI pipeline and freezes the
resulting dataset.csv / eda.json / model.json / report.json as golden
files. Everything is deterministic; rerunning must be a no-op.

Usage: python tools/gen_corpus.py
"""

from __future__ import annotations

import csv
import io
import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from eduvid.evf import FrameStreamHeader, write_frame_stream  # noqa: E402
from eduvid.project import read_json  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "tests" / "data" / "corpus"
GOLDEN = ROOT / "tests" / "data" / "golden"

SEED = 20260401
FPS = 2  # frames per second, so duration_min = frames / 120
GRAYS = [40, 110, 180, 250, 75, 145, 215]
DURATIONS_MIN = [1.5, 2.0, 2.5, 3.0, 3.25, 3.75, 4.5, 5.0, 5.75, 6.5, 7.25, 8.0]
VOCAB = ["the", "model", "beam", "force", "stress", "strain", "load", "we",
         "note", "axis", "shear", "moment", "now", "solve", "for", "this",
         "value", "gives", "result", "and", "then", "apply", "equation",
         "diagram", "section"]

COHORTS = [
    dict(institution_name="Example_University", speaker_name="Speaker_One",
         course_code="ENG1001", course_name="Statics", unit_level="Year_1",
         year=2020, video_type="Lecture", subject_area="Mechanical_Engineering"),
    dict(institution_name="Example_University", speaker_name="Speaker_One",
         course_code="ENG2002", course_name="Dynamics", unit_level="Year_2",
         year=2021, video_type="Lecture", subject_area="Mechanical_Engineering"),
]


def plan_videos(rng: np.random.RandomState) -> list[dict]:
    videos = []
    for i, duration in enumerate(DURATIONS_MIN):
        frames = round(duration * 60 * FPS)
        wpm = rng.uniform(150.0, 260.0)
        word_count = int(round(wpm * duration))
        spm = rng.uniform(1.0, 3.5)
        scene_count = max(1, int(round(spm * duration)))
        engagement = round(90.0 - 4.0 * duration + rng.normal(0.0, 2.0), 2)
        assert 0.0 <= engagement <= 100.0
        videos.append(dict(
            video_id=f"sv{i + 1:02d}", duration_min=duration,
            frame_count=frames, word_count=word_count,
            scene_count=scene_count, engagement=engagement,
            cohort=COHORTS[0] if i < 6 else COHORTS[1]))
    return videos


def cut_positions(frame_count: int, scene_count: int) -> list[int]:
    return [round((j + 1) * frame_count / (scene_count + 1))
            for j in range(scene_count)]


def write_stream(path: Path, video: dict) -> None:
    frame_count = video["frame_count"]
    cuts = set(cut_positions(frame_count, video["scene_count"]))
    header = FrameStreamHeader(width=8, height=8, fps_num=FPS, fps_den=1,
                               frame_count=frame_count)

    def frames():
        scene = 0
        for index in range(frame_count):
            if index in cuts:
                scene += 1
            yield np.full((8, 8), GRAYS[scene % len(GRAYS)], dtype=np.uint8)

    with open(path, "wb") as fh:
        write_frame_stream(fh, header, frames())


def write_transcript(path: Path, word_count: int) -> None:
    words = [VOCAB[k % len(VOCAB)] for k in range(word_count)]
    lines = [" ".join(words[i:i + 12]) for i in range(0, len(words), 12)]
    path.write_text("\n".join(lines) + ("\n" if lines else ""),
                    encoding="utf-8")


def write_corpus(videos: list[dict]) -> None:
    if CORPUS.exists():
        shutil.rmtree(CORPUS)
    (CORPUS / "videos").mkdir(parents=True)
    (CORPUS / "transcripts").mkdir()

    manual = io.StringIO()
    writer = csv.writer(manual, lineterminator="\n")
    writer.writerow(["video_id", "institution_name", "speaker_name",
                     "course_code", "course_name", "unit_level", "year",
                     "video_type", "subject_area"])
    for v in videos:
        c = v["cohort"]
        writer.writerow([v["video_id"], c["institution_name"],
                         c["speaker_name"], c["course_code"], c["course_name"],
                         c["unit_level"], c["year"], c["video_type"],
                         c["subject_area"]])
    (CORPUS / "manual.csv").write_text(manual.getvalue(), encoding="utf-8")

    engagement = io.StringIO()
    writer = csv.writer(engagement, lineterminator="\n")
    writer.writerow(["video_id", "average_percentage_viewed"])
    for v in videos:
        writer.writerow([v["video_id"], f"{v['engagement']:.2f}"])
    (CORPUS / "engagement.csv").write_text(engagement.getvalue(),
                                           encoding="utf-8")

    manifest = io.StringIO()
    writer = csv.writer(manifest, lineterminator="\n")
    writer.writerow(["video_id", "frames", "transcript"])
    for v in videos:
        vid = v["video_id"]
        write_stream(CORPUS / "videos" / f"{vid}.evf", v)
        write_transcript(CORPUS / "transcripts" / f"{vid}.txt", v["word_count"])
        writer.writerow([vid, f"videos/{vid}.evf", f"transcripts/{vid}.txt"])
    (CORPUS / "manifest.csv").write_text(manifest.getvalue(), encoding="utf-8")


def run_cli_pipeline(project: Path) -> None:
    env = {**os.environ, "SOURCE_DATE_EPOCH": "0"}

    def cli(*args: str) -> None:
        result = subprocess.run([sys.executable, "-m", "eduvid.cli", *args],
                                capture_output=True, text=True, env=env)
        if result.returncode != 0:
            raise SystemExit(f"cli {' '.join(args)} failed:\n{result.stderr}")

    cli("ingest", "--project", str(project),
        "--manual", str(CORPUS / "manual.csv"),
        "--engagement", str(CORPUS / "engagement.csv"))
    cli("extract", "--project", str(project),
        "--batch", str(CORPUS / "manifest.csv"), "--jobs", "2")
    cli("dataset", "build", "--project", str(project))
    cli("eda", "--project", str(project))
    cli("train", "--project", str(project))
    cli("report", "--project", str(project))


def main() -> None:
    rng = np.random.RandomState(SEED)
    videos = plan_videos(rng)
    write_corpus(videos)

    with tempfile.TemporaryDirectory() as tmp:
        project = Path(tmp) / "project"
        run_cli_pipeline(project)
        model = read_json(project / "model.json")
        weights = dict(zip(model["feature_names"], model["weights"]))
        top = max(weights, key=lambda k: abs(weights[k]))
        assert weights["duration_min"] < 0, weights
        assert top == "duration_min", weights
        GOLDEN.mkdir(parents=True, exist_ok=True)
        for name in ("dataset.csv", "eda.json", "model.json", "report.json"):
            shutil.copy(project / name, GOLDEN / name)

    print(f"corpus: {sum(1 for _ in CORPUS.rglob('*') if _.is_file())} files")
    print(f"golden model weights: {weights}")
    print(f"r_squared={model['metrics']['r_squared']:.4f}"
          f" rmse={model['metrics']['rmse']:.4f}")


if __name__ == "__main__":
    main()
