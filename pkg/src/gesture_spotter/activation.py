"""Single-time activation: one detection per performed gesture.

While idle, any path probability above ``th_s`` opens a recording. While
recording, every frame's score vector is kept; the first step where every
path is below ``th_e`` closes it, and the recording's mean score vector is
classified by its best gesture class.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from gesture_spotter.core import ClassId, DetectionEvent, Hand, ScoreFrame
from gesture_spotter.transition import TransitionEngine, TransitionMatrix, WindowConfig


@dataclass(frozen=True)
class ActivationConfig:
    th_s: float = 0.85
    th_e: float = 0.5
    min_active_frames: int = 0
    flush_on_end: bool = True

    def __post_init__(self) -> None:
        if not (0.0 < self.th_e <= self.th_s < 1.0):
            raise ValueError(f"thresholds must satisfy 0 < th_e <= th_s < 1, got th_s={self.th_s}, th_e={self.th_e}")
        if self.min_active_frames < 0:
            raise ValueError("min_active_frames must be non-negative")


class Phase(enum.Enum):
    IDLE = "idle"
    ACTIVE = "active"


def classify_recording(rows) -> tuple[ClassId, float]:
    """Average the recorded score vectors; pick the best gesture (0-4)."""
    mean = np.asarray(rows, dtype=float).mean(axis=0)
    k = int(np.argmax(mean[:5]))
    return ClassId(k), float(min(1.0, max(0.0, mean[k])))


class SingleTimeActivator:
    def __init__(self, config: ActivationConfig | None = None, hand: Hand = Hand.LEFT):
        self.config = config or ActivationConfig()
        self.hand = hand
        self.reset()

    def reset(self) -> None:
        self.phase = Phase.IDLE
        self.record: list[tuple[float, ...]] = []
        self.active_start: int | None = None
        self._last_t: int | None = None

    def step(self, matrix: TransitionMatrix, frame: ScoreFrame) -> DetectionEvent | None:
        t = matrix.t
        self._last_t = t
        peak = matrix.peak
        if self.phase is Phase.IDLE:
            if peak > self.config.th_s:
                self.phase = Phase.ACTIVE
                self.active_start = t
                self.record = [frame.scores]
            return None
        self.record.append(frame.scores)
        if peak < self.config.th_e:
            return self._close(t)
        return None

    def finish(self) -> DetectionEvent | None:
        """End of stream: emit a pending recording if flushing is enabled."""
        if self.phase is Phase.IDLE:
            return None
        if not self.config.flush_on_end or self._last_t is None or self._last_t <= self.active_start:
            self.reset()
            return None
        return self._close(self._last_t)

    def _close(self, t: int) -> DetectionEvent | None:
        start, rows = self.active_start, self.record
        self.phase = Phase.IDLE
        self.record = []
        self.active_start = None
        if len(rows) < self.config.min_active_frames:
            return None
        cid, conf = classify_recording(rows)
        return DetectionEvent(cid, start, t, conf, self.hand)


class OnlineDetector:
    """Transition engine and activator paired for one (hand, modality) stream."""

    def __init__(self, activation: ActivationConfig | None = None, window: WindowConfig | None = None, hand: Hand = Hand.LEFT):
        self.engine = TransitionEngine(window)
        self.activator = SingleTimeActivator(activation, hand)

    def reset(self) -> None:
        self.engine.reset()
        self.activator.reset()

    def push(self, frame: ScoreFrame) -> DetectionEvent | None:
        m = self.engine.push(frame)
        if m is None:
            return None
        return self.activator.step(m, frame)

    def finish(self) -> DetectionEvent | None:
        return self.activator.finish()

    def run(self, frames: Iterable[ScoreFrame]) -> list[DetectionEvent]:
        out = []
        push = self.push
        for f in frames:
            ev = push(f)
            if ev is not None:
                out.append(ev)
        ev = self.finish()
        if ev is not None:
            out.append(ev)
        return out


def run_stream(stream, cfg: ActivationConfig | None = None, wcfg: WindowConfig | None = None) -> list[DetectionEvent]:
    det = OnlineDetector(cfg, wcfg, stream.header.hand)
    return det.run(stream.frames)


def peak_trace(frames: Sequence[ScoreFrame], wcfg: WindowConfig | None = None) -> np.ndarray:
    """Per-frame peak path probability; NaN during warm-up."""
    eng = TransitionEngine(wcfg)
    out = np.full(len(frames), np.nan)
    for k, f in enumerate(frames):
        m = eng.push(f)
        if m is not None:
            out[k] = m.peak
    return out


def detect_from_peaks(
    peaks: np.ndarray,
    scores: np.ndarray,
    cfg: ActivationConfig,
    hand: Hand = Hand.LEFT,
) -> list[DetectionEvent]:
    """Replay the activator over a precomputed peak trace.

    Gives the same events as stepping the machine frame by frame, but lets a
    threshold sweep reuse one pass of the transition engine.
    """
    n = len(peaks)
    # NaN compares False both ways, so warm-up frames never start or end
    with np.errstate(invalid="ignore"):
        starts = np.flatnonzero(peaks > cfg.th_s)
        ends = np.flatnonzero(peaks < cfg.th_e)
    events = []
    t = 0
    while True:
        k = np.searchsorted(starts, t)
        if k >= len(starts):
            break
        start = int(starts[k])
        j = np.searchsorted(ends, start + 1)
        if j < len(ends):
            end = int(ends[j])
        elif cfg.flush_on_end and n - 1 > start:
            end = n - 1
        else:
            break
        t = end + 1
        if end - start + 1 < cfg.min_active_frames:
            continue
        cid, conf = classify_recording(scores[start : end + 1])
        events.append(DetectionEvent(cid, start, end, conf, hand))
    return events


_HAND_ORDER = {Hand.LEFT: 0, Hand.RIGHT: 1}


def merge_hands(left: Sequence[DetectionEvent], right: Sequence[DetectionEvent]) -> list[DetectionEvent]:
    return sorted([*left, *right], key=lambda e: (e.start_frame, _HAND_ORDER[e.hand]))
