import io
import json
import sys

import pytest

from gesture_spotter.cli import bench_stream, main
from gesture_spotter.activation import ActivationConfig
from gesture_spotter.streamio import read_annotations, read_detections, read_document, read_score_stream
from gesture_spotter.transition import WindowConfig


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    assert main(["synth", "-o", str(root), "--streams", "2", "--gestures", "12", "--frames", "2500", "--seed", "3", "--hands", "left,right", "--modalities", "rgb,infrared"]) == 0
    return root


def test_synth_layout(corpus):
    d = corpus / "stream_000"
    assert sorted(p.name for p in d.iterdir()) == ["annotations.json", "left_infrared.csv", "left_rgb.csv", "right_infrared.csv", "right_rgb.csv"]
    ann = read_annotations(d / "annotations.json")
    assert {a.hand.value for a in ann} == {"left", "right"}
    manifest = read_document("gesture-run-manifest", corpus / "manifest.json")
    assert manifest["seed"] == 3 and manifest["config"]["synth"]["noise_level"] == 0.0


def test_synth_byte_identical(corpus, tmp_path):
    main(["synth", "-o", str(tmp_path), "--streams", "2", "--gestures", "12", "--frames", "2500", "--seed", "3", "--hands", "left,right", "--modalities", "rgb,infrared"])
    for p in sorted(corpus.rglob("*")):
        if p.is_file():
            assert (tmp_path / p.relative_to(corpus)).read_bytes() == p.read_bytes(), p


def test_detect_matches_annotations(corpus, tmp_path, capsys):
    d = corpus / "stream_000"
    args = ["detect", str(d / "left_rgb.csv"), "--th-start", "0.6", "--th-end", "0.5", "--annotations", str(d / "annotations.json"), "-o", str(tmp_path / "a")]
    assert main(args) == 0
    events = read_detections(tmp_path / "a" / "detections_left.json")
    gt = [a.class_id for a in read_annotations(d / "annotations.json") if a.hand.value == "left"]
    assert [e.class_id for e in events] == gt
    for name in ("detections.json", "trace_left.csv", "timeline_left.png", "manifest.json"):
        assert (tmp_path / "a" / name).is_file()

    args[-1] = str(tmp_path / "b")
    assert main(args) == 0
    for name in ("detections.json", "detections_left.json", "trace_left.csv", "timeline_left.png"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_detect_fuses_and_splits_hands(corpus, tmp_path):
    d = corpus / "stream_001"
    files = [str(d / f) for f in ("left_rgb.csv", "left_infrared.csv", "right_rgb.csv")]
    assert main(["detect", *files, "--th-start", "0.6", "--no-plots", "-o", str(tmp_path)]) == 0
    assert (tmp_path / "detections_left.json").is_file() and (tmp_path / "detections_right.json").is_file()
    manifest = read_document("gesture-run-manifest", tmp_path / "manifest.json")
    assert len(manifest["inputs"]) == 3
    merged = read_detections(tmp_path / "detections.json")
    assert [e.start_frame for e in merged] == sorted(e.start_frame for e in merged)


def test_detect_missing_file(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["detect", str(tmp_path / "missing.csv"), "-o", str(out)]) != 0
    assert not out.exists()
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "format"


def test_detect_bad_config(corpus, tmp_path, capsys):
    rc = main(["detect", str(corpus / "stream_000" / "left_rgb.csv"), "--th-start", "0.4", "--th-end", "0.5", "-o", str(tmp_path / "x")])
    assert rc == 2 and not (tmp_path / "x").exists()
    assert "th_e" in json.loads(capsys.readouterr().err)["message"]


def test_detect_stdin(corpus, monkeypatch, capsys):
    text = (corpus / "stream_000" / "left_rgb.csv").read_text()
    monkeypatch.setattr(sys, "stdin", io.StringIO(text))
    assert main(["detect", "-", "--th-start", "0.6"]) == 0
    events = json.loads(capsys.readouterr().out)
    assert len(events) == 12


def test_evaluate_perfect_and_empty(corpus, tmp_path, capsys):
    d = corpus / "stream_000"
    main(["detect", str(d / "left_rgb.csv"), str(d / "right_rgb.csv"), "--th-start", "0.6", "--no-plots", "-o", str(tmp_path / "det")])
    capsys.readouterr()
    assert main(["evaluate", str(tmp_path / "det" / "detections.json"), "--annotations", str(d / "annotations.json"), "-o", str(tmp_path / "ev")]) == 0
    out = capsys.readouterr().out
    assert "100.00%" in out
    report = read_document("gesture-eval-report", tmp_path / "ev" / "report.json")
    assert report["aggregate"]["mean_accuracy"] == 1.0
    assert (tmp_path / "ev" / "accuracy.png").is_file()

    (tmp_path / "none.json").write_text('{"schema": "gesture-detections", "schema_version": 1, "detections": []}\n')
    assert main(["evaluate", str(tmp_path / "none.json"), "--annotations", str(d / "annotations.json"), "-o", str(tmp_path / "ev0")]) == 0
    out = capsys.readouterr().out
    assert "0.00%" in out
    report = read_document("gesture-eval-report", tmp_path / "ev0" / "report.json")
    for s in report["streams"]:
        assert f"{100 * s['accuracy']:.2f}%" in out
        assert s["distance"] == len(s["edit_ops"])


def test_calibrate(corpus, tmp_path, capsys):
    assert main(["calibrate", str(corpus), "--modalities", "rgb", "-o", str(tmp_path)]) == 0
    body = read_document("gesture-calibration", tmp_path / "calibration.json")
    assert body["best"]["mean_accuracy"] == 1.0
    assert (tmp_path / "calibration.csv").read_text().startswith("window_length,th_s,th_e,mean_accuracy,pooled_accuracy\n")
    assert (tmp_path / "calibration.png").is_file()
    assert "best th_s=" in capsys.readouterr().out


def test_bench(corpus, tmp_path, capsys):
    f = corpus / "stream_000" / "left_rgb.csv"
    assert main(["bench", str(f), "--repeat", "2", "-o", str(tmp_path / "b.json")]) == 0
    rep = json.loads((tmp_path / "b.json").read_text())
    assert rep["frames"] == 2500 and rep["frames_per_second"] > 0
    assert {"latency_p50_us", "latency_p99_us"} <= rep.keys()
    again = bench_stream(read_score_stream(f), ActivationConfig(), WindowConfig(), repeat=1)
    assert again["frames"] == rep["frames"] and again["events"] == rep["events"]


def test_inputs_not_mutated(corpus, tmp_path):
    f = corpus / "stream_000" / "left_rgb.csv"
    before = f.read_bytes()
    main(["detect", str(f), "--no-plots", "-o", str(tmp_path)])
    main(["bench", str(f), "--repeat", "1"])
    assert f.read_bytes() == before
