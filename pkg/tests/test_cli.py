from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from eduvid.cli import main
from eduvid.project import ProjectPaths, read_json

from conftest import CORPUS_DIR


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args, expect=0):
    result = runner.invoke(main, [str(a) for a in args])
    if result.exit_code != expect:  # pragma: no cover - debugging aid
        raise AssertionError(
            f"exit {result.exit_code} (wanted {expect}) for {args}:\n"
            f"{result.output}\n{result.exception}")
    return result


@pytest.fixture
def ingested(tmp_path, runner) -> Path:
    project = tmp_path / "proj"
    invoke(runner, "ingest", "--project", project,
           "--manual", CORPUS_DIR / "manual.csv",
           "--engagement", CORPUS_DIR / "engagement.csv")
    return project


@pytest.fixture
def trained(ingested, runner, monkeypatch) -> Path:
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    invoke(runner, "extract", "--project", ingested,
           "--batch", CORPUS_DIR / "manifest.csv")
    invoke(runner, "dataset", "build", "--project", ingested)
    invoke(runner, "eda", "--project", ingested)
    invoke(runner, "train", "--project", ingested)
    return ingested


def test_ingest_writes_metadata_and_engagement(ingested):
    paths = ProjectPaths(ingested)
    assert paths.metadata_csv.exists()
    assert paths.engagement_csv.exists()
    assert len(paths.metadata_csv.read_text().splitlines()) == 13


def test_single_file_extract_appends_row(ingested, runner):
    invoke(runner, "extract", "--project", ingested,
           "--frames", CORPUS_DIR / "videos" / "sv01.evf",
           "--transcript", CORPUS_DIR / "transcripts" / "sv01.txt",
           "--video-id", "sv01")
    paths = ProjectPaths(ingested)
    lines = paths.features_csv.read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("sv01,1.5,")
    # a second run for another video appends without disturbing the first
    invoke(runner, "extract", "--project", ingested,
           "--frames", CORPUS_DIR / "videos" / "sv02.evf",
           "--transcript", CORPUS_DIR / "transcripts" / "sv02.txt",
           "--video-id", "sv02")
    lines = paths.features_csv.read_text().splitlines()
    assert len(lines) == 3 and lines[1].startswith("sv01,")


def test_eda_before_dataset_build_exits_1(ingested, runner):
    result = runner.invoke(main, ["eda", "--project", str(ingested)])
    assert result.exit_code == 1
    assert "dataset build" in result.output or "dataset build" in str(result.output)


def test_stage_order_error_is_machine_readable(ingested, runner):
    result = runner.invoke(main, ["--json", "eda", "--project", str(ingested)])
    assert result.exit_code == 1
    payload = json.loads(result.output)
    assert payload["error"]["type"] == "StageOrderViolation"


def test_missing_input_file_exits_2(runner, tmp_path):
    result = runner.invoke(main, ["ingest", "--project", str(tmp_path / "p"),
                                  "--manual", str(tmp_path / "nope.csv")])
    assert result.exit_code == 2


def test_whatif_consistent_with_stored_model(trained, runner):
    result = invoke(runner, "--json", "insight", "whatif",
                    "--project", trained,
                    "--feature", "duration_min", "--delta", "-1.0")
    scenario = json.loads(result.output)
    model = read_json(ProjectPaths(trained).model_json)
    j = model["feature_names"].index("duration_min")
    expected = model["weights"][j] * (-1.0 / model["stds"][j])
    assert scenario["delta_engagement"] == pytest.approx(expected, abs=1e-12)
    assert scenario["predicted_new"] - scenario["predicted_baseline"] == \
        pytest.approx(expected, abs=1e-12)
    # oracle: predict() on the stored model at baseline and baseline+delta
    from eduvid.model import model_from_dict, predict
    loaded = model_from_dict(model)
    baseline = list(loaded.standardizer.means)
    shifted = list(baseline)
    shifted[j] -= 1.0
    oracle = predict(loaded, shifted).value - predict(loaded, baseline).value
    assert scenario["delta_engagement"] == pytest.approx(oracle, abs=1e-9)
    assert scenario["predicted_baseline"] == pytest.approx(
        predict(loaded, baseline).value, abs=1e-12)


def test_insight_rank_lists_features_by_magnitude(trained, runner):
    result = invoke(runner, "--json", "insight", "rank", "--project", trained)
    influences = json.loads(result.output)["influences"]
    magnitudes = [abs(i["weight"]) for i in influences]
    assert magnitudes == sorted(magnitudes, reverse=True)
    assert influences[0]["feature_name"] == "duration_min"


def test_report_writes_json_and_markdown(trained, runner):
    invoke(runner, "report", "--project", trained)
    paths = ProjectPaths(trained)
    report = read_json(paths.report_json)
    assert report["influences"]
    assert "# Video design feedback" in paths.report_md.read_text()


def test_train_with_cross_validation(trained, runner):
    invoke(runner, "train", "--project", trained, "--cv", "3", "--seed", "42")
    model = read_json(ProjectPaths(trained).model_json)
    assert model["training"]["cv"]["k"] == 3
    assert model["training"]["cv"]["seed"] == 42


def test_config_file_sets_span(ingested, runner, tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    invoke(runner, "extract", "--project", ingested,
           "--batch", CORPUS_DIR / "manifest.csv")
    invoke(runner, "dataset", "build", "--project", ingested)
    config = tmp_path / "eduvid.conf"
    config.write_text("# analysis defaults\nspan=0.8\n")
    invoke(runner, "--config", config, "eda", "--project", ingested)
    assert read_json(ProjectPaths(ingested).eda_json)["span"] == 0.8


def test_unknown_whatif_feature_exits_1(trained, runner):
    result = runner.invoke(main, ["insight", "whatif", "--project",
                                  str(trained), "--feature", "bogus",
                                  "--delta", "1"])
    assert result.exit_code == 1
