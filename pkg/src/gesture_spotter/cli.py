"""Command-line entry point: ``gesture-spotter {detect,evaluate,synth,calibrate,bench}``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from gesture_spotter import __version__
from gesture_spotter.activation import ActivationConfig, OnlineDetector, merge_hands, peak_trace, run_stream
from gesture_spotter.calibration import CalibrationGrid, calibrate
from gesture_spotter.core import Hand, Modality
from gesture_spotter.evaluation import aggregate, evaluate_run
from gesture_spotter.fusion import FusionConfig, fuse_streams, parse_weights
from gesture_spotter.sources import TextStreamSource, detect_source
from gesture_spotter.streamio import (
    FormatError,
    ScoreStreamFile,
    read_annotations,
    read_detections,
    read_score_stream,
    write_annotations,
    write_detections,
    write_document,
    write_score_stream,
    write_table,
)
from gesture_spotter.synth import SynthConfig, generate_stream, plan_corpus
from gesture_spotter.transition import WindowConfig


class CLIError(Exception):
    def __init__(self, message: str, kind: str = "config", location: str | None = None):
        super().__init__(message)
        self.kind = kind
        self.location = location


# -- argument helpers --------------------------------------------------------


def _add_window(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window-length", type=int, default=64, help="sliding window length l (even, default 64)")
    p.add_argument("--background-mass", choices=("separate", "combined"), default="separate")


def _add_thresholds(p: argparse.ArgumentParser) -> None:
    p.add_argument("--th-start", type=float, default=0.85, help="start threshold th_s")
    p.add_argument("--th-end", type=float, default=0.5, help="end threshold th_e")
    p.add_argument("--min-active-frames", type=int, default=0)
    p.add_argument("--no-flush", action="store_true", help="drop a recording still open at end of stream")


def _add_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--renormalize", action="store_true", help="repair invalid score rows instead of rejecting them")
    p.add_argument("--fusion-weights", default="", help="e.g. rgb=0.5,infrared=0.5 (default uniform)")


def _window(args) -> WindowConfig:
    try:
        return WindowConfig(args.window_length, background_mass=args.background_mass)
    except ValueError as e:
        raise CLIError(str(e)) from None


def _activation(args) -> ActivationConfig:
    try:
        return ActivationConfig(args.th_start, args.th_end, args.min_active_frames, not args.no_flush)
    except ValueError as e:
        raise CLIError(str(e)) from None


def _fusion(args) -> FusionConfig:
    try:
        return FusionConfig(parse_weights(args.fusion_weights)) if args.fusion_weights else FusionConfig()
    except ValueError as e:
        raise CLIError(f"bad --fusion-weights: {e}") from None


def _float_list(text: str) -> tuple[float, ...]:
    """``0.5,0.6`` or ``lo:hi:step``."""
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        n = int(round((hi - lo) / step))
        return tuple(round(lo + k * step, 10) for k in range(n + 1))
    return tuple(float(x) for x in text.split(",") if x.strip())


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _manifest(command: str, config: dict[str, Any], inputs: Sequence[Path], seed: int | None) -> dict[str, Any]:
    return {
        "tool": "gesture-spotter",
        "tool_version": __version__,
        "command": command,
        "seed": seed,
        "config": config,
        "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in inputs if p.is_file()],
    }


def _window_snapshot(w: WindowConfig) -> dict[str, Any]:
    return {"window_length": w.window_length, "background_mass": w.background_mass}


def _activation_snapshot(a: ActivationConfig) -> dict[str, Any]:
    return {"th_s": a.th_s, "th_e": a.th_e, "min_active_frames": a.min_active_frames, "flush_on_end": a.flush_on_end}


def _fusion_snapshot(f: FusionConfig) -> dict[str, Any]:
    return {"weights": {m.value: w for m, w in sorted(f.weights.items(), key=lambda kv: kv[0].value)}, "normalize": f.normalize}


def group_by_hand(streams: Sequence[ScoreStreamFile], fusion: FusionConfig) -> dict[Hand, ScoreStreamFile]:
    """One stream per hand, fusing modalities where several are given."""
    by_hand: dict[Hand, dict[Modality, ScoreStreamFile]] = {}
    for s in streams:
        if s.header.is_fused:
            raise CLIError("input streams must be single-modality")
        mods = by_hand.setdefault(s.header.hand, {})
        if s.header.modality in mods:
            raise CLIError(f"two {s.header.modality.value} streams given for the {s.header.hand.value} hand")
        mods[s.header.modality] = s
    out = {}
    for hand in sorted(by_hand, key=lambda h: h.value):
        mods = by_hand[hand]
        if len(mods) == 1 and not fusion.weights:
            out[hand] = next(iter(mods.values()))
        else:
            try:
                out[hand] = fuse_streams(mods, fusion)
            except ValueError as e:
                raise CLIError(str(e)) from None
    return out


# -- detect ------------------------------------------------------------------


def cmd_detect(args) -> int:
    wcfg, acfg, fcfg = _window(args), _activation(args), _fusion(args)
    paths = [Path(p) for p in args.streams]
    annotations = read_annotations(args.annotations) if args.annotations else []

    if args.streams == ["-"]:
        source = TextStreamSource(sys.stdin)
        events = detect_source(source, acfg, wcfg)
        sys.stdout.write(json.dumps([_event_json(e) for e in events]) + "\n")
        return 0

    streams = [read_score_stream(p, renormalize=args.renormalize) for p in paths]
    per_hand = group_by_hand(streams, fcfg)
    results = {}
    for hand, stream in per_hand.items():
        events = run_stream(stream, acfg, wcfg)
        peaks = peak_trace(stream.frames, wcfg)
        results[hand] = (stream, events, peaks)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for hand, (stream, events, peaks) in results.items():
        write_detections(events, out / f"detections_{hand.value}.json")
        rows = [{"frame": k, "peak": None if np.isnan(p) else float(p)} for k, p in enumerate(peaks)]
        write_table(rows, out / f"trace_{hand.value}.csv", ["frame", "peak"])
        if not args.no_plots:
            from gesture_spotter.plots import plot_timeline

            mine = [a for a in annotations if a.hand == hand]
            plot_timeline(peaks, events, out / f"timeline_{hand.value}.png", acfg.th_s, acfg.th_e, mine, f"{hand.value} hand")
        print(f"{hand.value}: {len(events)} detections")
    merged = merge_hands(*(results[h][1] if h in results else [] for h in (Hand.LEFT, Hand.RIGHT)))
    write_detections(merged, out / "detections.json")
    config = {"window": _window_snapshot(wcfg), "activation": _activation_snapshot(acfg), "fusion": _fusion_snapshot(fcfg), "renormalize": args.renormalize}
    inputs = paths + ([Path(args.annotations)] if args.annotations else [])
    write_document("gesture-run-manifest", _manifest("detect", config, inputs, args.seed), out / "manifest.json")
    return 0


def _event_json(e) -> dict[str, Any]:
    return {"class_id": int(e.class_id), "hand": e.hand.value, "start_frame": e.start_frame, "end_frame": e.end_frame, "confidence": e.confidence}


# -- evaluate ----------------------------------------------------------------


def cmd_evaluate(args) -> int:
    events = [e for p in args.detections for e in read_detections(p)]
    annotations = read_annotations(args.annotations)
    hands = sorted({a.hand for a in annotations}, key=lambda h: h.value)
    if not hands:
        raise CLIError("ground truth is empty; accuracy is undefined", kind="input")
    reports = []
    for hand in hands:
        reports.append((hand, evaluate_run(events, annotations, hand, stream_id=hand.value)))
    results = [r.per_stream[0] for _, r in reports]
    agg = aggregate(results, clamp_zero=args.clamp_zero)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    body = {
        "clamp_zero": args.clamp_zero,
        "aggregate": agg,
        "streams": [{"hand": h.value, **r.to_dict()} for h, r in reports],
    }
    write_document("gesture-eval-report", body, out / "report.json")
    rows = [vars(s) for s in results]
    write_table(rows, out / "per_stream.csv", ["stream_id", "distance", "gt_length", "accuracy"])
    if not args.no_plots:
        from gesture_spotter.plots import plot_accuracy

        plot_accuracy([s.stream_id for s in results], [s.accuracy for s in results], out / "accuracy.png")
    inputs = [Path(p) for p in args.detections] + [Path(args.annotations)]
    write_document("gesture-run-manifest", _manifest("evaluate", {"clamp_zero": args.clamp_zero}, inputs, None), out / "manifest.json")

    print(f"{'stream':<10}{'distance':>10}{'length':>8}{'accuracy':>11}")
    for s in results:
        print(f"{s.stream_id:<10}{s.distance:>10}{s.gt_length:>8}{format_pct(s.accuracy):>11}")
    print(f"{'mean':<28}{format_pct(agg['mean_accuracy']):>11}")
    print(f"{'pooled':<28}{format_pct(agg['pooled_accuracy']):>11}")
    return 0


def format_pct(x: float) -> str:
    return f"{100.0 * x:.2f}%"


# -- synth -------------------------------------------------------------------


def _parse_enum_list(text: str, enum_cls, flag: str) -> list:
    try:
        return [enum_cls(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise CLIError(f"bad {flag}: {e}") from None


def cmd_synth(args) -> int:
    hands = _parse_enum_list(args.hands, Hand, "--hands")
    modalities = _parse_enum_list(args.modalities, Modality, "--modalities")
    try:
        cfg = SynthConfig(seed=args.seed, noise_level=args.noise, ramp_frames=args.ramp, background_mix=args.background_mix)
        plans = {h: plan_corpus(args.streams, args.gestures, args.frames, cfg, h, args.min_gap) for h in hands}
    except ValueError as e:
        raise CLIError(str(e)) from None
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.streams):
        d = out / f"stream_{k:03d}"
        d.mkdir(exist_ok=True)
        ann = []
        for h in hands:
            h_ann, scfg = plans[h][k]
            ann.extend(h_ann)
            for m in modalities:
                write_score_stream(generate_stream(h_ann, h, args.frames, scfg, m), d / f"{h.value}_{m.value}.csv")
        write_annotations(sorted(ann, key=lambda a: (a.start_frame, a.hand.value)), d / "annotations.json")
    config = {
        "synth": cfg.snapshot(),
        "streams": args.streams,
        "gestures_per_stream": args.gestures,
        "frames_per_stream": args.frames,
        "min_gap": args.min_gap,
        "hands": [h.value for h in hands],
        "modalities": [m.value for m in modalities],
    }
    write_document("gesture-run-manifest", _manifest("synth", config, [], args.seed), out / "manifest.json")
    print(f"wrote {args.streams} streams to {out}")
    return 0


# -- calibrate ---------------------------------------------------------------


def load_corpus(root: Path, fusion: FusionConfig, renormalize: bool = False, modalities: Sequence[Modality] | None = None):
    """Pairs of (stream, annotations), one per (stream directory, hand)."""
    dirs = sorted(p for p in root.iterdir() if p.is_dir() and (p / "annotations.json").is_file())
    if not dirs:
        raise CLIError(f"no stream directories with annotations.json under {root}", kind="input")
    corpus, files = [], []
    for d in dirs:
        ann = read_annotations(d / "annotations.json")
        files.append(d / "annotations.json")
        streams = []
        for p in sorted(d.glob("*.csv")):
            s = read_score_stream(p, renormalize=renormalize)
            if modalities and s.header.modality not in modalities:
                continue
            streams.append(s)
            files.append(p)
        for hand, s in group_by_hand(streams, fusion).items():
            corpus.append((f"{d.name}/{hand.value}", s, [a for a in ann if a.hand == hand]))
    return corpus, files


def cmd_calibrate(args) -> int:
    wcfg, fcfg = _window(args), _fusion(args)
    try:
        grid = CalibrationGrid(
            _float_list(args.th_start_grid),
            _float_list(args.th_end_grid),
            tuple(int(x) for x in args.window_lengths.split(",")) if args.window_lengths else None,
        )
    except ValueError as e:
        raise CLIError(f"bad grid: {e}") from None
    mods = _parse_enum_list(args.modalities, Modality, "--modalities") if args.modalities else None
    corpus, files = load_corpus(Path(args.corpus), fcfg, args.renormalize, mods)
    empty = [name for name, _, ann in corpus if not ann]
    if empty:
        raise CLIError(f"ground truth is empty for {', '.join(empty)}", kind="input")
    try:
        result = calibrate([(s, a) for _, s, a in corpus], grid, wcfg, workers=args.workers)
    except ValueError as e:
        raise CLIError(str(e)) from None

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = [vars(r).copy() for r in result.table]
    write_table(rows, out / "calibration.csv", ["window_length", "th_s", "th_e", "mean_accuracy", "pooled_accuracy"])
    body = {
        "best": {"th_s": result.th_s, "th_e": result.th_e, "window_length": result.window_length, "mean_accuracy": result.best.mean_accuracy},
        "table": rows,
    }
    write_document("gesture-calibration", body, out / "calibration.json")
    if not args.no_plots:
        from gesture_spotter.plots import plot_calibration

        plot_calibration([r for r in result.table if r.window_length == result.window_length], out / "calibration.png", (result.th_s, result.th_e))
    config = {
        "window": _window_snapshot(wcfg),
        "fusion": _fusion_snapshot(fcfg),
        "grid": {"th_s": list(grid.th_s_values), "th_e": list(grid.th_e_values), "window_lengths": list(grid.window_lengths or [])},
    }
    write_document("gesture-run-manifest", _manifest("calibrate", config, files, args.seed), out / "manifest.json")
    print(f"best th_s={result.th_s:g} th_e={result.th_e:g} l={result.window_length} mean accuracy {format_pct(result.best.mean_accuracy)}")
    return 0


# -- bench -------------------------------------------------------------------


def bench_stream(stream: ScoreStreamFile, acfg: ActivationConfig, wcfg: WindowConfig, repeat: int = 5) -> dict[str, Any]:
    """Throughput and per-frame latency of transition + activation."""
    frames = stream.frames
    det = OnlineDetector(acfg, wcfg, stream.header.hand)
    best = float("inf")
    events = 0
    for _ in range(repeat):
        det.reset()
        push = det.push
        t0 = time.perf_counter()
        n_ev = 0
        for f in frames:
            if push(f) is not None:
                n_ev += 1
        if det.finish() is not None:
            n_ev += 1
        best = min(best, time.perf_counter() - t0)
        events = n_ev

    det.reset()
    push = det.push
    clock = time.perf_counter_ns
    lat = np.empty(len(frames))
    for k, f in enumerate(frames):
        t0 = clock()
        push(f)
        lat[k] = clock() - t0
    n = len(frames)
    return {
        "frames": n,
        "repeat": repeat,
        "events": events,
        "seconds": best,
        "frames_per_second": n / best if best > 0 and n else 0.0,
        "latency_p50_us": float(np.percentile(lat, 50) / 1e3) if n else 0.0,
        "latency_p99_us": float(np.percentile(lat, 99) / 1e3) if n else 0.0,
        "realtime_budget_us": 1e6 / stream.header.frame_rate,
    }


def cmd_bench(args) -> int:
    wcfg, acfg = _window(args), _activation(args)
    stream = read_score_stream(args.stream, renormalize=args.renormalize)
    report = bench_stream(stream, acfg, wcfg, args.repeat)
    text = json.dumps(report, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gesture-spotter", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect gestures in score streams")
    d.add_argument("streams", nargs="+", help="score stream files (one per hand/modality), or '-' for stdin")
    d.add_argument("-o", "--output", default="detections")
    d.add_argument("--annotations", help="ground truth, drawn on the timeline figure only")
    d.add_argument("--seed", type=int, default=None, help="recorded in the manifest; detection itself is deterministic")
    d.add_argument("--no-plots", action="store_true")
    _add_window(d)
    _add_thresholds(d)
    _add_inputs(d)
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("evaluate", help="Levenshtein accuracy of detections against annotations")
    e.add_argument("detections", nargs="+")
    e.add_argument("--annotations", required=True)
    e.add_argument("-o", "--output", default="evaluation")
    e.add_argument("--clamp-zero", action="store_true", help="clamp negative accuracies to 0 when aggregating")
    e.add_argument("--no-plots", action="store_true")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("synth", help="generate a synthetic labelled corpus")
    s.add_argument("-o", "--output", default="corpus")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--streams", type=int, default=10)
    s.add_argument("--gestures", type=int, default=30)
    s.add_argument("--frames", type=int, default=6500)
    s.add_argument("--ramp", type=int, default=4)
    s.add_argument("--background-mix", type=float, default=0.2)
    s.add_argument("--min-gap", type=int, default=64)
    s.add_argument("--hands", default="left")
    s.add_argument("--modalities", default="rgb")
    s.set_defaults(func=cmd_synth)

    c = sub.add_parser("calibrate", help="grid-search th_s/th_e on a corpus")
    c.add_argument("corpus")
    c.add_argument("-o", "--output", default="calibration")
    c.add_argument("--th-start-grid", default="0.55:0.95:0.05")
    c.add_argument("--th-end-grid", default="0.30:0.95:0.05")
    c.add_argument("--window-lengths", default="", help="comma list; default is --window-length only")
    c.add_argument("--modalities", default="", help="restrict to these modalities")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--no-plots", action="store_true")
    _add_window(c)
    _add_inputs(c)
    c.set_defaults(func=cmd_calibrate)

    b = sub.add_parser("bench", help="throughput of transition + activation")
    b.add_argument("stream")
    b.add_argument("--repeat", type=int, default=5)
    b.add_argument("-o", "--output", default=None)
    b.add_argument("--renormalize", action="store_true")
    _add_window(b)
    _add_thresholds(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as e:
        _report_error("format", str(e), e.location)
        return 1
    except CLIError as e:
        _report_error(e.kind, str(e), e.location)
        return 2 if e.kind == "config" else 1
    except OSError as e:
        _report_error("io", e.strerror or str(e), getattr(e, "filename", None))
        return 1


def _report_error(kind: str, message: str, location: str | None) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "location": location}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
