"""Text file formats for score streams, annotations, detections and reports.

Score streams are a ``key: value`` header block, a ``---`` separator and a CSV
table with one row per frame::

    # gesture-score-stream v1
    hand: left
    modality: rgb
    frame_rate: 30
    total_frames: 2
    class_names: SwipeRight,SwipeLeft,FlickDown,FlickUp,Tap,None,Other
    ---
    frame_index,p0,p1,p2,p3,p4,p5,p6
    0,0.0,0.0,0.0,0.0,0.0,1.0,0.0
    1,0.0,0.0,0.0,0.0,0.0,1.0,0.0

Annotations, detections, reports and calibration tables are JSON documents
carrying ``schema`` and ``schema_version`` keys.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from gesture_spotter.core import (
    NUM_CLASSES,
    Annotation,
    ClassId,
    DetectionEvent,
    Hand,
    Modality,
    ScoreFrame,
    StreamHeader,
    check_annotations,
    validate_frame,
)

STREAM_MAGIC = "# gesture-score-stream v1"
SCHEMA_VERSION = 1
HEADER_KEYS = ("hand", "modality", "frame_rate", "total_frames", "class_names")
COLUMNS = ("frame_index",) + tuple(f"p{k}" for k in range(NUM_CLASSES))


class FormatError(ValueError):
    """A file did not match its format; ``location`` says where."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass(frozen=True)
class ScoreStreamFile:
    header: StreamHeader
    frames: tuple[ScoreFrame, ...]

    def __post_init__(self) -> None:
        if len(self.frames) != self.header.total_frames:
            raise ValueError(f"header says {self.header.total_frames} frames, got {len(self.frames)}")
        for expected, f in enumerate(self.frames):
            if f.frame_index != expected:
                raise ValueError(f"frame_index gap: expected {expected}, got {f.frame_index}")

    def __len__(self) -> int:
        return len(self.frames)

    def scores_array(self):
        import numpy as np

        return np.array([f.scores for f in self.frames], dtype=float).reshape(len(self.frames), NUM_CLASSES)

    @classmethod
    def from_scores(cls, header: StreamHeader, scores) -> "ScoreStreamFile":
        rows = [ScoreFrame(i, tuple(float(x) for x in row)) for i, row in enumerate(scores)]
        return cls(_with_total(header, len(rows)), tuple(rows))


def _with_total(header: StreamHeader, n: int) -> StreamHeader:
    if header.total_frames == n:
        return header
    return StreamHeader(header.hand, header.modalities, header.frame_rate, header.class_names, n)


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips the double exactly
    return repr(float(x))


def _fmt_rate(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


# -- score streams -----------------------------------------------------------


def format_header(header: StreamHeader) -> str:
    lines = [
        STREAM_MAGIC,
        f"hand: {header.hand.value}",
        f"modality: {'+'.join(m.value for m in header.modalities)}",
        f"frame_rate: {_fmt_rate(header.frame_rate)}",
        f"total_frames: {header.total_frames}",
        f"class_names: {','.join(header.class_names)}",
        "---",
        ",".join(COLUMNS),
    ]
    return "\n".join(lines) + "\n"


def format_row(frame: ScoreFrame) -> str:
    return f"{frame.frame_index}," + ",".join(_fmt(s) for s in frame.scores) + "\n"


def dumps_score_stream(stream: ScoreStreamFile) -> str:
    buf = io.StringIO()
    buf.write(format_header(stream.header))
    for f in stream.frames:
        buf.write(format_row(f))
    return buf.getvalue()


def write_score_stream(stream: ScoreStreamFile, path: str | os.PathLike) -> None:
    Path(path).write_text(dumps_score_stream(stream), encoding="utf-8", newline="\n")


def _parse_float(tok: str, where: str) -> float:
    t = tok.strip()
    # float() tolerates '_' separators and surrounding junk we do not want
    if not t or "_" in t:
        raise FormatError(f"bad number {tok!r}", where)
    try:
        return float(t)
    except ValueError:
        raise FormatError(f"bad number {tok!r}", where) from None


def _parse_int(tok: str, where: str) -> int:
    t = tok.strip()
    if not t or not (t.isascii() and (t.isdigit() or (t[0] in "+-" and t[1:].isdigit()))):
        raise FormatError(f"bad integer {tok!r}", where)
    return int(t)


def parse_header_lines(lines: Iterable[tuple[int, str]]) -> StreamHeader:
    """Parse header lines up to (and consuming) the column row."""
    it = iter(lines)
    try:
        lineno, first = next(it)
    except StopIteration:
        raise FormatError("empty file", "line 1") from None
    if first.strip() != STREAM_MAGIC:
        raise FormatError(f"missing magic line {STREAM_MAGIC!r}", f"line {lineno}")
    values: dict[str, tuple[int, str]] = {}
    lineno = 1
    for lineno, line in it:
        s = line.strip()
        if s == "---":
            break
        if not s or s.startswith("#"):
            continue
        key, sep, value = s.partition(":")
        key = key.strip()
        if not sep or key not in HEADER_KEYS:
            raise FormatError(f"unrecognised header line {line!r}", f"line {lineno}")
        if key in values:
            raise FormatError(f"duplicate header key {key!r}", f"line {lineno}")
        values[key] = (lineno, value.strip())
    else:
        raise FormatError("header not terminated by '---'", f"line {lineno}")
    missing = [k for k in HEADER_KEYS if k not in values]
    if missing:
        raise FormatError(f"missing header keys {missing}", "header")
    try:
        col_lineno, cols = next(it)
    except StopIteration:
        raise FormatError("missing column row", f"line {lineno + 1}") from None
    if tuple(c.strip() for c in cols.strip().split(",")) != COLUMNS:
        raise FormatError(f"expected columns {','.join(COLUMNS)}", f"line {col_lineno}")

    def field(key: str) -> tuple[str, str]:
        ln, v = values[key]
        return f"line {ln}", v

    where, v = field("hand")
    try:
        hand = Hand(v)
    except ValueError:
        raise FormatError(f"unknown hand {v!r}", where) from None
    where, v = field("modality")
    try:
        modalities = tuple(Modality(m.strip()) for m in v.split("+"))
    except ValueError:
        raise FormatError(f"unknown modality {v!r}", where) from None
    where, v = field("frame_rate")
    rate = _parse_float(v, where)
    where, v = field("total_frames")
    total = _parse_int(v, where)
    where, v = field("class_names")
    names = tuple(n.strip() for n in v.split(","))
    try:
        return StreamHeader(hand, modalities, rate, names, total)
    except ValueError as e:
        raise FormatError(str(e), "header") from None


def parse_row(line: str, lineno: int, expected_index: int) -> ScoreFrame:
    where = f"line {lineno}"
    parts = line.strip().split(",")
    if len(parts) != len(COLUMNS):
        raise FormatError(f"expected {len(COLUMNS)} fields, got {len(parts)}", where)
    idx = _parse_int(parts[0], where)
    if idx != expected_index:
        raise FormatError(f"frame_index gap: expected {expected_index}, got {idx}", where)
    return ScoreFrame(idx, tuple(_parse_float(p, where) for p in parts[1:]))


def renormalize_scores(scores: Sequence[float]) -> tuple[float, ...] | None:
    """Clip to non-negative and rescale to unit sum; None if nothing is left."""
    clipped = [s if s > 0.0 and math.isfinite(s) else 0.0 for s in scores]
    total = math.fsum(clipped)
    if not total > 0.0 or not math.isfinite(total):
        return None
    return tuple(min(1.0, s / total) for s in clipped)


def _numbered(text: str) -> Iterator[tuple[int, str]]:
    for n, line in enumerate(text.splitlines(), start=1):
        yield n, line


def loads_score_stream(text: str | bytes, renormalize: bool = False) -> ScoreStreamFile:
    """Parse a score stream; invalid softmax rows raise unless ``renormalize``."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"not UTF-8 text ({e.reason})", f"byte {e.start}") from None
    lines = _numbered(text)
    header = parse_header_lines(lines)
    frames: list[ScoreFrame] = []
    for lineno, line in lines:
        if not line.strip():
            continue
        frame = parse_row(line, lineno, len(frames))
        result = validate_frame(frame)
        if not result.ok:
            fixed = renormalize_scores(frame.scores) if renormalize else None
            if fixed is None:
                msgs = "; ".join(v.message for v in result.violations)
                raise FormatError(f"invalid score frame: {msgs}", f"line {lineno}")
            frame = ScoreFrame(frame.frame_index, fixed)
        frames.append(frame)
    if len(frames) != header.total_frames:
        raise FormatError(f"header declares {header.total_frames} frames, found {len(frames)}", "header")
    return ScoreStreamFile(header, tuple(frames))


def read_score_stream(path: str | os.PathLike, renormalize: bool = False) -> ScoreStreamFile:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read file: {e.strerror}", str(path)) from None
    try:
        return loads_score_stream(data, renormalize=renormalize)
    except FormatError as e:
        raise FormatError(str(e), str(path)) from None


# -- JSON documents ----------------------------------------------------------


def _dump_doc(schema: str, body: dict[str, Any]) -> str:
    doc = {"schema": schema, "schema_version": SCHEMA_VERSION, **body}
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _load_doc(text: str | bytes, schema: str) -> dict[str, Any]:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"not UTF-8 text ({e.reason})", f"byte {e.start}") from None

    def no_constants(name: str) -> float:
        raise FormatError(f"non-finite number {name}", "document")

    try:
        doc = json.loads(text, parse_constant=no_constants)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, f"line {e.lineno} column {e.colno}") from None
    except RecursionError:
        raise FormatError("document nested too deeply", "document") from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be an object", "document")
    if doc.get("schema") != schema:
        raise FormatError(f"expected schema {schema!r}, got {doc.get('schema')!r}", "schema")
    if doc.get("schema_version") != SCHEMA_VERSION or isinstance(doc.get("schema_version"), bool):
        raise FormatError(f"unsupported schema_version {doc.get('schema_version')!r}", "schema_version")
    return doc


def _get(obj: Any, key: str, kind: type | tuple[type, ...], where: str) -> Any:
    if not isinstance(obj, dict):
        raise FormatError("expected an object", where)
    if key not in obj:
        raise FormatError(f"missing field {key!r}", where)
    v = obj[key]
    if isinstance(v, bool) and bool not in (kind if isinstance(kind, tuple) else (kind,)):
        raise FormatError(f"field {key!r} has wrong type", f"{where}.{key}")
    if not isinstance(v, kind):
        raise FormatError(f"field {key!r} has wrong type", f"{where}.{key}")
    return v


def _get_list(doc: dict[str, Any], key: str) -> list[Any]:
    return _get(doc, key, list, "document")


def _class_field(item: Any, where: str) -> ClassId:
    v = _get(item, "class_id", int, where)
    try:
        cid = ClassId.parse(v)
    except ValueError as e:
        raise FormatError(str(e), f"{where}.class_id") from None
    return cid


def _hand_field(item: Any, where: str) -> Hand:
    v = _get(item, "hand", str, where)
    try:
        return Hand(v)
    except ValueError:
        raise FormatError(f"unknown hand {v!r}", f"{where}.hand") from None


def _annotation_record(a: Annotation) -> dict[str, Any]:
    return {
        "class_id": int(a.class_id),
        "label": a.class_id.label,
        "hand": a.hand.value,
        "start_frame": a.start_frame,
        "end_frame": a.end_frame,
    }


def dumps_annotations(annotations: Sequence[Annotation]) -> str:
    return _dump_doc("gesture-annotations", {"annotations": [_annotation_record(a) for a in annotations]})


def loads_annotations(text: str | bytes) -> list[Annotation]:
    doc = _load_doc(text, "gesture-annotations")
    out = []
    for k, item in enumerate(_get_list(doc, "annotations")):
        where = f"annotations[{k}]"
        cid = _class_field(item, where)
        hand = _hand_field(item, where)
        start = _get(item, "start_frame", int, where)
        end = _get(item, "end_frame", int, where)
        try:
            out.append(Annotation(cid, hand, start, end))
        except ValueError as e:
            raise FormatError(str(e), where) from None
    try:
        check_annotations(out)
    except ValueError as e:
        raise FormatError(str(e), "annotations") from None
    return out


def write_annotations(annotations: Sequence[Annotation], path: str | os.PathLike) -> None:
    Path(path).write_text(dumps_annotations(annotations), encoding="utf-8", newline="\n")


def read_annotations(path: str | os.PathLike) -> list[Annotation]:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read file: {e.strerror}", str(path)) from None
    return loads_annotations(data)


def _event_record(e: DetectionEvent) -> dict[str, Any]:
    return {
        "class_id": int(e.class_id),
        "label": e.class_id.label,
        "hand": e.hand.value,
        "start_frame": e.start_frame,
        "end_frame": e.end_frame,
        "confidence": float(e.confidence),
    }


def dumps_detections(events: Sequence[DetectionEvent]) -> str:
    return _dump_doc("gesture-detections", {"detections": [_event_record(e) for e in events]})


def loads_detections(text: str | bytes) -> list[DetectionEvent]:
    doc = _load_doc(text, "gesture-detections")
    out = []
    for k, item in enumerate(_get_list(doc, "detections")):
        where = f"detections[{k}]"
        cid = _class_field(item, where)
        hand = _hand_field(item, where)
        start = _get(item, "start_frame", int, where)
        end = _get(item, "end_frame", int, where)
        conf = _get(item, "confidence", (int, float), where)
        try:
            out.append(DetectionEvent(cid, start, end, float(conf), hand))
        except ValueError as e:
            raise FormatError(str(e), where) from None
    return out


def write_detections(events: Sequence[DetectionEvent], path: str | os.PathLike) -> None:
    Path(path).write_text(dumps_detections(events), encoding="utf-8", newline="\n")


def read_detections(path: str | os.PathLike) -> list[DetectionEvent]:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read file: {e.strerror}", str(path)) from None
    return loads_detections(data)


def write_document(schema: str, body: dict[str, Any], path: str | os.PathLike) -> None:
    Path(path).write_text(_dump_doc(schema, body), encoding="utf-8", newline="\n")


def read_document(schema: str, path: str | os.PathLike) -> dict[str, Any]:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read file: {e.strerror}", str(path)) from None
    return _load_doc(data, schema)


def write_table(rows: Sequence[dict[str, Any]], path: str | os.PathLike, columns: Sequence[str] | None = None) -> None:
    """Tidy CSV table, one row per record, fixed column order."""
    cols = list(columns) if columns is not None else (list(rows[0]) if rows else [])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: (_fmt(v) if isinstance(v, float) else v) for c, v in r.items() if c in cols})
