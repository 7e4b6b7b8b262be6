"""Exhaustive threshold search against a labelled corpus."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gesture_spotter.activation import ActivationConfig, detect_from_peaks, peak_trace
from gesture_spotter.core import Annotation, ClassId, annotations_to_sequence
from gesture_spotter.evaluation import StreamResult, aggregate, levenshtein_distance
from gesture_spotter.streamio import ScoreStreamFile
from gesture_spotter.transition import WindowConfig


def _steps(lo: float, hi: float, step: float = 0.05) -> tuple[float, ...]:
    n = int(round((hi - lo) / step))
    return tuple(round(lo + k * step, 10) for k in range(n + 1))


@dataclass(frozen=True)
class CalibrationGrid:
    th_s_values: tuple[float, ...] = _steps(0.55, 0.95)
    th_e_values: tuple[float, ...] = _steps(0.30, 0.95)
    window_lengths: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        for name in ("th_s_values", "th_e_values"):
            vals = getattr(self, name)
            if not vals:
                raise ValueError(f"{name} must be nonempty")
            if any(not 0.0 < v < 1.0 for v in vals):
                raise ValueError(f"{name} must lie in (0, 1)")
            if list(vals) != sorted(vals):
                raise ValueError(f"{name} must be ascending")

    def pairs(self) -> list[tuple[float, float]]:
        """Feasible (th_s, th_e) pairs, i.e. th_e <= th_s."""
        return [(s, e) for s in self.th_s_values for e in self.th_e_values if e <= s]


@dataclass(frozen=True)
class CalibrationRow:
    window_length: int
    th_s: float
    th_e: float
    mean_accuracy: float
    pooled_accuracy: float


@dataclass
class CalibrationResult:
    th_s: float
    th_e: float
    window_length: int
    table: list[CalibrationRow]

    @property
    def best(self) -> CalibrationRow:
        return next(r for r in self.table if (r.th_s, r.th_e, r.window_length) == (self.th_s, self.th_e, self.window_length))


@dataclass(frozen=True)
class _Prepared:
    peaks: np.ndarray
    scores: np.ndarray
    truth: tuple[ClassId, ...]
    stream: ScoreStreamFile


def _prepare(corpus, wcfg: WindowConfig) -> list[_Prepared]:
    out = []
    for stream, ann in corpus:
        truth = tuple(annotations_to_sequence(ann, stream.header.hand))
        if not truth:
            raise ValueError("every corpus stream needs a nonempty ground truth")
        out.append(_Prepared(peak_trace(stream.frames, wcfg), stream.scores_array(), truth, stream))
    return out


def _score_pair(prepared: Sequence[_Prepared], th_s: float, th_e: float) -> tuple[float, float]:
    cfg = ActivationConfig(th_s=th_s, th_e=th_e)
    results = []
    for k, p in enumerate(prepared):
        hand = p.stream.header.hand
        events = detect_from_peaks(p.peaks, p.scores, cfg, hand)
        d = levenshtein_distance([e.class_id for e in events], p.truth)
        results.append(StreamResult(str(k), d, len(p.truth), 1.0 - d / len(p.truth)))
    agg = aggregate(results)
    return agg["mean_accuracy"], agg["pooled_accuracy"]


def _score_cell(args) -> tuple[float, float]:
    return _score_pair(*args)


def calibrate(
    corpus: Sequence[tuple[ScoreStreamFile, Sequence[Annotation]]],
    grid: CalibrationGrid | None = None,
    wcfg: WindowConfig | None = None,
    workers: int = 1,
) -> CalibrationResult:
    """Evaluate every feasible threshold pair; keep the best mean accuracy.

    Ties go to the larger ``th_s``, then the larger ``th_e``, then the
    earlier window length in the grid.
    """
    grid = grid or CalibrationGrid()
    wcfg = wcfg or WindowConfig()
    if not corpus:
        raise ValueError("calibration corpus is empty")
    pairs = grid.pairs()
    if not pairs:
        raise ValueError("no feasible (th_s, th_e) pair with th_e <= th_s")
    lengths = grid.window_lengths or (wcfg.window_length,)
    table: list[CalibrationRow] = []
    for l in lengths:
        w = WindowConfig(l, background_mass=wcfg.background_mass)
        prepared = _prepare(corpus, w)
        cells = [(prepared, s, e) for s, e in pairs]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                scores = list(ex.map(_score_cell, cells))
        else:
            scores = [_score_cell(c) for c in cells]
        table.extend(CalibrationRow(l, s, e, m, p) for (s, e), (m, p) in zip(pairs, scores))

    best = None
    for r in table:
        key = (r.mean_accuracy, r.th_s, r.th_e, -lengths.index(r.window_length))
        if best is None or key > best[0]:
            best = (key, r)
    row = best[1]
    return CalibrationResult(row.th_s, row.th_e, row.window_length, table)
