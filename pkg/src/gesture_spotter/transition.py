"""Sliding-window transition probabilities from background to each gesture.

For a window of ``l`` frames ending at ``t``, the probability of the path
``source -> gesture i`` is the background mass of ``source`` summed over the
older half of the window plus the mass of class ``i`` summed over the newer
half, divided by ``l``. Two background sources times five gestures give ten
paths per frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from gesture_spotter.core import NUM_CLASSES, ClassId, ScoreFrame, is_background, is_gesture

SEPARATE = "separate"
COMBINED = "combined"
RESYNC_INTERVAL = 4096

_ZERO = (0.0,) * NUM_CLASSES


@dataclass(frozen=True)
class WindowConfig:
    window_length: int = 64
    num_classes: int = NUM_CLASSES
    # "combined" reads the older half as None + Other mass for both sources
    background_mass: str = SEPARATE

    def __post_init__(self) -> None:
        l = self.window_length
        if isinstance(l, bool) or not isinstance(l, int) or l < 2 or l % 2:
            raise ValueError(f"window_length must be an even integer >= 2, got {l!r}")
        if self.num_classes != NUM_CLASSES:
            raise ValueError(f"num_classes must be {NUM_CLASSES}")
        if self.background_mass not in (SEPARATE, COMBINED):
            raise ValueError(f"background_mass must be 'separate' or 'combined', got {self.background_mass!r}")


class TransitionMatrix:
    """Transition probabilities for the window ending at ``t``.

    Stored as half-window sums; ``probs[s][i]`` for source ``s`` in
    (None, Other) and gesture ``i`` in 0..4.
    """

    __slots__ = ("t", "background_sums", "gesture_sums", "window_length")

    def __init__(self, t: int, background_sums: tuple[float, float], gesture_sums: tuple[float, ...], window_length: int):
        self.t = t
        self.background_sums = background_sums
        self.gesture_sums = gesture_sums
        self.window_length = window_length

    @property
    def probs(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        l = self.window_length
        return tuple(tuple((b + g) / l for g in self.gesture_sums) for b in self.background_sums)  # type: ignore[return-value]

    def prob(self, source: int, gesture: int) -> float:
        return (self.background_sums[int(source) - 5] + self.gesture_sums[int(gesture)]) / self.window_length

    @property
    def peak(self) -> float:
        """Largest of the ten path probabilities."""
        return (max(self.background_sums) + max(self.gesture_sums)) / self.window_length

    def argpeak(self) -> tuple[ClassId, ClassId]:
        s = max(range(2), key=lambda k: self.background_sums[k])
        g = max(range(5), key=lambda k: self.gesture_sums[k])
        return ClassId(s + 5), ClassId(g)

    def __repr__(self) -> str:
        return f"TransitionMatrix(t={self.t}, peak={self.peak:.6f})"


def transition_prob_direct(
    window: Sequence[ScoreFrame],
    gesture: int,
    source: int,
    window_length: int | None = None,
    background_mass: str = SEPARATE,
) -> float:
    """Evaluate one path by explicit summation over the window."""
    l = len(window) if window_length is None else window_length
    if len(window) != l:
        raise ValueError(f"window has {len(window)} frames, expected {l}")
    if l < 2 or l % 2:
        raise ValueError(f"window length must be even and >= 2, got {l}")
    if not is_gesture(gesture):
        raise ValueError(f"gesture must be a gesture class (0-4), got {gesture}")
    if not is_background(source):
        raise ValueError(f"source must be None (5) or Other (6), got {source}")
    half = l // 2
    older = 0.0
    for f in window[:half]:
        if background_mass == COMBINED:
            older += f.scores[5] + f.scores[6]
        else:
            older += f.scores[int(source)]
    newer = 0.0
    for f in window[half:]:
        newer += f.scores[int(gesture)]
    return (older + newer) / l


class TransitionEngine:
    """Incremental computation of the ten path probabilities, one frame at a time.

    Keeps the last ``l`` frames in a ring and two rolling sums: background
    mass over the older half and gesture mass over the newer half. Sums are
    rebuilt from the ring every ``RESYNC_INTERVAL`` pushes to bound drift.
    """

    def __init__(self, config: WindowConfig | None = None):
        self.config = config or WindowConfig()
        self._l = self.config.window_length
        self._half = self._l // 2
        self._combined = self.config.background_mass == COMBINED
        self.reset()

    def reset(self) -> None:
        self._ring: list[tuple[float, ...]] = [_ZERO] * self._l
        self._count = 0
        self._next_index: int | None = None
        self._bg = [0.0, 0.0]
        self._g = [0.0, 0.0, 0.0, 0.0, 0.0]

    @property
    def frames_seen(self) -> int:
        return self._count

    def push(self, frame: ScoreFrame) -> TransitionMatrix | None:
        idx = frame.frame_index
        if self._next_index is not None and idx != self._next_index:
            raise ValueError(f"out-of-order frame: expected index {self._next_index}, got {idx}")
        self._next_index = idx + 1

        new = frame.scores
        ring = self._ring
        pos = self._count % self._l
        old = ring[pos]  # frame t-l, leaving the older half
        mid = ring[(pos + self._half) % self._l]  # frame t-l/2, crossing halves
        ring[pos] = new
        self._count += 1

        bg = self._bg
        g = self._g
        bg[0] += mid[5] - old[5]
        bg[1] += mid[6] - old[6]
        g[0] += new[0] - mid[0]
        g[1] += new[1] - mid[1]
        g[2] += new[2] - mid[2]
        g[3] += new[3] - mid[3]
        g[4] += new[4] - mid[4]

        if self._count % RESYNC_INTERVAL == 0:
            self._resync()
        if self._count < self._l:
            return None
        if self._combined:
            b = bg[0] + bg[1]
            return TransitionMatrix(idx, (b, b), tuple(g), self._l)
        return TransitionMatrix(idx, (bg[0], bg[1]), tuple(g), self._l)

    def _resync(self) -> None:
        # ring[(count + k) % l] is frame t-l+1+k once count >= l
        ordered = [self._ring[(self._count + k) % self._l] for k in range(self._l)]
        older, newer = ordered[: self._half], ordered[self._half :]
        self._bg = [math.fsum(f[5] for f in older), math.fsum(f[6] for f in older)]
        self._g = [math.fsum(f[c] for f in newer) for c in range(5)]
