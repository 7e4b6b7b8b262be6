"""Score producers: the seam where a live classifier would plug in.

Anything with ``header()`` and ``next()`` can drive the detector. ``next()``
returns frames in increasing ``frame_index`` order, each a valid softmax
vector, and returns ``None`` forever once exhausted.

A live classifier adapter is expected to write the score-stream text format
(header block, then one ``frame_index,p0..p6`` row per frame) to a pipe;
:class:`TextStreamSource` reads exactly that.
"""

from __future__ import annotations

import time
from typing import Iterator, Protocol, Sequence, TextIO

from gesture_spotter.activation import ActivationConfig, OnlineDetector
from gesture_spotter.core import Annotation, DetectionEvent, Hand, Modality, ScoreFrame, StreamHeader, validate_frame
from gesture_spotter.streamio import FormatError, ScoreStreamFile, parse_header_lines, parse_row
from gesture_spotter.synth import SynthConfig, generate_stream
from gesture_spotter.transition import WindowConfig


class ScoreSource(Protocol):
    def header(self) -> StreamHeader: ...

    def next(self) -> ScoreFrame | None: ...


def iter_source(source: ScoreSource) -> Iterator[ScoreFrame]:
    while True:
        f = source.next()
        if f is None:
            return
        yield f


class ReplaySource:
    def __init__(self, stream: ScoreStreamFile):
        self._stream = stream
        self._pos = 0

    def header(self) -> StreamHeader:
        return self._stream.header

    def next(self) -> ScoreFrame | None:
        if self._pos >= len(self._stream.frames):
            return None
        f = self._stream.frames[self._pos]
        self._pos += 1
        return f


def replay_source(stream: ScoreStreamFile) -> ReplaySource:
    return ReplaySource(stream)


class ThrottledSource:
    """Paces an inner source to at most ``frame_rate`` frames per second."""

    def __init__(self, inner: ScoreSource, frame_rate: float, clock=time.monotonic, sleep=time.sleep):
        if not frame_rate > 0:
            raise ValueError(f"frame_rate must be positive, got {frame_rate}")
        self._inner = inner
        self._period = 1.0 / frame_rate
        self._clock = clock
        self._sleep = sleep
        self._t0: float | None = None
        self._n = 0

    def header(self) -> StreamHeader:
        return self._inner.header()

    def next(self) -> ScoreFrame | None:
        f = self._inner.next()
        if f is None:
            return None
        if self._t0 is None:
            self._t0 = self._clock()
        else:
            due = self._t0 + self._n * self._period
            while (wait := due - self._clock()) > 0:
                self._sleep(wait)
        self._n += 1
        return f


def throttled_source(inner: ScoreSource, frame_rate: float) -> ThrottledSource:
    return ThrottledSource(inner, frame_rate)


def synth_source(annotations: Sequence[Annotation], hand: Hand, total_frames: int, cfg: SynthConfig, modality: Modality = Modality.RGB) -> ReplaySource:
    """Synthetic scores served through the source interface."""
    return ReplaySource(generate_stream(annotations, hand, total_frames, cfg, modality))


class TextStreamSource:
    """Reads the score-stream text format incrementally from a file object."""

    def __init__(self, fh: TextIO):
        self._lines = ((n, line.rstrip("\r\n")) for n, line in enumerate(fh, start=1))
        self._header = parse_header_lines(self._lines)
        self._expected = 0
        self._done = False

    def header(self) -> StreamHeader:
        return self._header

    def next(self) -> ScoreFrame | None:
        if self._done:
            return None
        for lineno, line in self._lines:
            if not line.strip():
                continue
            frame = parse_row(line, lineno, self._expected)
            result = validate_frame(frame)
            if not result.ok:
                raise FormatError("; ".join(v.message for v in result.violations), f"line {lineno}")
            self._expected += 1
            return frame
        self._done = True
        return None


def detect_source(source: ScoreSource, cfg: ActivationConfig | None = None, wcfg: WindowConfig | None = None) -> list[DetectionEvent]:
    det = OnlineDetector(cfg, wcfg, source.header().hand)
    return det.run(iter_source(source))
