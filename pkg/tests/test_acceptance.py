"""Acceptance criteria, one test per criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v` for one pass/fail line per
criterion; each test also prints an explicit verdict line. Criterion 10
(web UI contract) lives in frontend/src/*.test.ts and runs under vitest
with a mocked API; every criterion here is runnable with no UI built.
"""

from __future__ import annotations

import math
import os
import shutil
import subprocess
import sys
import time
from fractions import Fraction
from io import BytesIO
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from eduvid.errors import ZeroVarianceColumnError
from eduvid.eda import loess, pearson
from eduvid.extract import SceneDetectorConfig, extract_features, frame_difference
from eduvid.insight import rank_features, what_if
from eduvid.model import (
    evaluate,
    fit_ols,
    fit_standardizer,
    load_reference_model,
    train_model,
    transform,
)
from eduvid.service import create_app

from conftest import CORPUS_DIR, GOLDEN_DIR, make_stream_bytes
from test_eda import loess_oracle_point, pearson_oracle
from test_model import NAMES5, normal_equations_oracle, planted_system
from test_service import run_full_pipeline

GOLDEN_FILES = ("dataset.csv", "eda.json", "model.json", "report.json")


def verdict(n: int, text: str) -> None:
    print(f"\ncriterion {n}: PASS - {text}")


def planted_stream(rng):
    """EVF1 bytes with planted hard cuts plus the closed-form expectations."""
    fps_options = [(25, 1), (30, 1), (30000, 1001), (24000, 1001), (50, 1),
                   (2, 1), (15, 2), (60, 1)]
    fps_num, fps_den = fps_options[rng.randint(len(fps_options))]
    frame_count = int(rng.randint(40, 400))
    n_cuts = int(rng.randint(0, 8))
    cut_at = sorted(rng.choice(np.arange(1, frame_count), size=n_cuts,
                               replace=False).tolist()) if n_cuts else []
    grays = [30, 100, 170, 240, 65, 135, 205]
    frames = []
    scene = 0
    cuts = set(cut_at)
    for index in range(frame_count):
        if index in cuts:
            scene += 1
        frames.append(np.full((8, 8), grays[scene % len(grays)],
                              dtype=np.uint8))
    words = int(rng.randint(0, 900))
    transcript = " ".join(f"w{k}" for k in range(words)) + " ... !! --"
    duration_min = Fraction(frame_count * fps_den, fps_num * 60)
    return (make_stream_bytes(frames, fps_num, fps_den), transcript,
            dict(duration_min=float(duration_min), word_count=words,
                 wpm=float(words / duration_min),
                 scene_count=len(cut_at),
                 spm=float(len(cut_at) / duration_min)))


def rel_close(a: float, b: float, rel: float = 1e-9) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300) or a == b


def test_criterion_01_feature_extraction_exactness():
    start = time.monotonic()
    rng = np.random.RandomState(101)
    cfg = SceneDetectorConfig(threshold=0.12, min_gap_s=0.0, stride=1)
    for _ in range(20):
        stream, transcript, expected = planted_stream(rng)
        feats = extract_features(BytesIO(stream), transcript, cfg, "v")
        assert rel_close(feats.duration_min, expected["duration_min"])
        assert feats.word_count == expected["word_count"]
        assert rel_close(feats.speaking_speed_wpm, expected["wpm"])
        assert feats.scene_count == expected["scene_count"]
        assert rel_close(feats.scene_rate_spm, expected["spm"])
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    verdict(1, f"20 planted streams exact within 1e-9, cuts exact"
               f" ({elapsed:.2f}s < 5s)")


def test_criterion_02_scene_detector_monotonicity():
    start = time.monotonic()
    rng = np.random.RandomState(202)
    for _ in range(200):
        n = int(rng.randint(2, 18))
        frames = [rng.randint(0, 256, size=(6, 6)).astype(np.uint8)
                  for _ in range(n)]
        t_lo, t_hi = sorted(rng.uniform(0.01, 0.95, size=2).tolist())
        header_args = dict(fps_num=25, fps_den=1)
        data = make_stream_bytes(frames, **header_args)
        from eduvid.evf import read_frame_stream

        def events_at(threshold):
            header, stream = read_frame_stream(BytesIO(data))
            from eduvid.extract import detect_scene_transitions
            return detect_scene_transitions(
                stream, header, SceneDetectorConfig(threshold=threshold,
                                                    min_gap_s=0.0))

        assert len(events_at(t_hi)) <= len(events_at(t_lo))
        a, b = frames[0], frames[-1]
        assert frame_difference(a, b) == frame_difference(b, a)
        assert frame_difference(a, a) == 0.0
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    verdict(2, f"200 random streams: count non-increasing in threshold,"
               f" diff symmetric, d(a,a)=0 ({elapsed:.2f}s < 10s)")


def test_criterion_03_statistics_oracles():
    rng = np.random.RandomState(303)
    for _ in range(1000):
        n = int(rng.randint(2, 60))
        x = rng.normal(rng.uniform(-10, 10), rng.uniform(0.5, 10), size=n)
        y = rng.normal(rng.uniform(-10, 10), rng.uniform(0.5, 10), size=n)
        if np.std(x) == 0 or np.std(y) == 0:
            continue
        r = pearson(x, y)
        assert abs(r - pearson_oracle(x.tolist(), y.tolist())) <= 1e-12
        assert abs(r) <= 1.0
    for _ in range(100):
        n = int(rng.randint(4, 51))
        x = rng.uniform(0, 20, size=n)
        y = rng.uniform(-10, 10, size=n)
        span = rng.uniform(3.0 / n, 1.0)
        k = math.ceil(span * n)
        curve = loess(x, y, span=span)
        for xi, yi in zip(curve.eval_x, curve.fitted_y):
            oracle = loess_oracle_point(x.tolist(), y.tolist(), xi, k)
            assert abs(yi - oracle) <= 1e-9
    for span in (0.25, 0.5, 1.0):
        x = np.sort(rng.uniform(0, 10, size=30))
        slope, icept = rng.uniform(-5, 5), rng.uniform(-20, 20)
        curve = loess(x, slope * x + icept, span=span)
        for xi, yi in zip(curve.eval_x, curve.fitted_y):
            assert abs(yi - (slope * xi + icept)) <= 1e-9
    verdict(3, "pearson==oracle@1e-12 x1000, |r|<=1; loess==brute-force"
               "@1e-9 x100; planted lines reproduced@1e-9")


def test_criterion_04_regression_recovery():
    start = time.monotonic()
    rng = np.random.RandomState(404)
    for _ in range(100):
        X, X_std, y, w, b, _ = planted_system(rng, n=50, p=5, noise=0.0)
        weights, intercept = fit_ols(X_std, y)
        assert np.allclose(weights, w, atol=1e-9, rtol=0)
        assert abs(intercept - b) <= 1e-9
        model = train_model(X, y, NAMES5)
        assert abs(evaluate(model, X, y).r_squared - 1.0) <= 1e-9
    for _ in range(30):
        _, X_std, y, *_ = planted_system(rng, n=50, p=5, noise=1.0)
        weights, intercept = fit_ols(X_std, y)
        ow, ob = normal_equations_oracle(X_std, y)
        assert np.allclose(weights, ow, atol=1e-7, rtol=0)
        assert abs(intercept - ob) <= 1e-7
        resid = y - (X_std @ np.array(weights) + intercept)
        n = len(y)
        assert abs(resid.sum()) <= 1e-8 * n
        for j in range(5):
            assert abs(resid @ X_std[:, j]) <= 1e-8 * n
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    verdict(4, f"100 noiseless recoveries@1e-9 + R2=1; noisy fits match"
               f" normal equations@1e-7; residual orthogonality"
               f" ({elapsed:.2f}s < 10s)")


def test_criterion_05_standardizer_contract():
    rng = np.random.RandomState(505)
    for _ in range(100):
        n = int(rng.randint(2, 150))
        p = int(rng.randint(1, 6))
        X = rng.normal(rng.uniform(-50, 50), rng.uniform(0.5, 50), size=(n, p))
        if np.any(np.std(X, axis=0) == 0):
            continue
        z = transform(fit_standardizer(X, NAMES5[:p]), X)
        assert np.all(np.abs(z.mean(axis=0)) <= 1e-12)
        assert np.all(np.abs(z.std(axis=0) - 1.0) <= 1e-12)
    with pytest.raises(ZeroVarianceColumnError):
        fit_standardizer(np.column_stack([np.arange(9.0), np.full(9, 7.0)]),
                         ("a", "b"))
    verdict(5, "standardised columns |mean|<=1e-12, |std-1|<=1e-12;"
               " constant columns rejected")


def test_criterion_06_what_if_exactness():
    rng = np.random.RandomState(606)
    for _ in range(25):
        X, _, y, *_ = planted_system(rng, n=40, p=5, noise=1.0)
        model = train_model(X, y, NAMES5)
        base = model.standardizer.means
        for j in range(5):
            deltas = [0.0] * 5
            deltas[j] = model.standardizer.stds[j]
            got = what_if(model, base, deltas).delta_engagement
            assert abs(got - model.weights[j]) <= 1e-12
        d1 = rng.uniform(-3, 3, size=5).tolist()
        d2 = rng.uniform(-3, 3, size=5).tolist()
        lhs = what_if(model, base, [a + b for a, b in zip(d1, d2)])
        rhs = what_if(model, base, d1).delta_engagement \
            + what_if(model, base, d2).delta_engagement
        assert abs(lhs.delta_engagement - rhs) <= 1e-12
        scale = float(rng.uniform(0.25, 4.0))
        homog = what_if(model, base, [scale * d for d in d1])
        assert abs(homog.delta_engagement
                   - scale * what_if(model, base, d1).delta_engagement) <= 1e-12
    verdict(6, "+1-sigma delta equals weight within 1e-12; additivity and"
               " homogeneity within 1e-12")


def run_cli(args: list[str], env_extra: dict | None = None
            ) -> subprocess.CompletedProcess:
    env = {**os.environ, "SOURCE_DATE_EPOCH": "0", **(env_extra or {})}
    return subprocess.run([sys.executable, "-m", "eduvid.cli", *args],
                          capture_output=True, text=True, env=env)


def cli_pipeline(project: Path) -> None:
    steps = [
        ["ingest", "--project", str(project),
         "--manual", str(CORPUS_DIR / "manual.csv"),
         "--engagement", str(CORPUS_DIR / "engagement.csv")],
        ["extract", "--project", str(project),
         "--batch", str(CORPUS_DIR / "manifest.csv"), "--jobs", "2"],
        ["dataset", "build", "--project", str(project)],
        ["eda", "--project", str(project)],
        ["train", "--project", str(project)],
        ["report", "--project", str(project)],
    ]
    for step in steps:
        result = run_cli(step)
        assert result.returncode == 0, f"{step}: {result.stderr}"


def test_criterion_07_end_to_end_golden_run(tmp_path):
    start = time.monotonic()
    project = tmp_path / "proj"
    cli_pipeline(project)
    for name in GOLDEN_FILES:
        got = (project / name).read_bytes()
        want = (GOLDEN_DIR / name).read_bytes()
        assert got == want, f"{name} differs from golden"
    import json
    model = json.loads((project / "model.json").read_text())
    weights = dict(zip(model["feature_names"], model["weights"]))
    assert weights["duration_min"] < 0
    assert max(weights, key=lambda k: abs(weights[k])) == "duration_min"
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    verdict(7, f"CLI golden run byte-matches 4 files; duration weight"
               f" negative and top-ranked ({elapsed:.2f}s < 30s)")


def test_criterion_08_cli_service_equivalence(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    cli_project = tmp_path / "cli-proj"
    cli_pipeline(cli_project)

    with TestClient(create_app(tmp_path / "svc-data")) as client:
        project_id = run_full_pipeline(client)
        svc_root = tmp_path / "svc-data" / project_id
        for name in ("dataset.csv", "model.json", "report.json"):
            assert (svc_root / name).read_bytes() == \
                (cli_project / name).read_bytes(), f"{name} differs"
        fresh = client.post("/projects", json={"name": "fresh"}).json()
        status = client.get(f"/projects/{fresh['project_id']}/eda").status_code
        assert status == 409
    bare = run_cli(["eda", "--project", str(tmp_path / "bare-proj")])
    assert bare.returncode == 1
    verdict(8, "HTTP pipeline byte-matches CLI for dataset.csv/model.json/"
               "report.json; stage order -> 409 and exit 1")


def test_criterion_09_reference_fixture_semantics():
    model, _ = load_reference_model()
    order = [i.feature_name for i in rank_features(model)]
    assert order == ["duration_min", "word_count", "speaking_speed_wpm",
                     "scene_rate_spm", "scene_count"]
    deltas = [0.0] * 5
    deltas[0] = model.standardizer.stds[0]
    scenario = what_if(model, model.standardizer.means, deltas)
    assert scenario.delta_engagement == -21.81
    verdict(9, "reference weights rank duration > word_count >"
               " speaking_speed > scene_rate > scene_count;"
               " +1-sigma duration = -21.81 exactly")
